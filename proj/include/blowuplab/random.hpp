#pragma once

// Counter-based random streams (Philox4x32-10) keyed by a seed and a path of
// integers, so that every replica of an experiment owns an independent
// stream regardless of scheduling.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>

namespace blowuplab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    std::uint64_t z = x + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

struct Philox4x32
{
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key)
    {
        constexpr std::uint32_t kM0 = 0xD2511F53u;
        constexpr std::uint32_t kM1 = 0xCD9E8D57u;
        constexpr std::uint32_t kW0 = 0x9E3779B9u;
        constexpr std::uint32_t kW1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round)
        {
            if (round > 0)
            {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

/// Sequential view of one Philox stream. The 128-bit counter is split into a
/// 64-bit block index and a 64-bit stream id; the key comes from the seed.
class RandomStream
{
  public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : key_{static_cast<std::uint32_t>(splitmix64(seed)),
               static_cast<std::uint32_t>(splitmix64(seed) >> 32)},
          seed_(seed),
          stream_id_(stream_id)
    {
    }

    /// Stream for (seed, path[0], path[1], ...).
    static RandomStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    {
        std::uint64_t id = 0x5be0cd19137e2179ull;
        for (std::uint64_t v : path) id = splitmix64(id ^ splitmix64(v + 0x1234567ull));
        return RandomStream(seed, id);
    }

    /// Independent child stream; does not advance this one.
    RandomStream split(std::uint64_t tag) const
    {
        return RandomStream(seed_, splitmix64(stream_id_ ^ splitmix64(tag ^ 0xa5a5a5a5a5a5a5a5ull)));
    }

    std::uint64_t next_u64()
    {
        if (lane_ >= 2) refill();
        const std::uint64_t v = (static_cast<std::uint64_t>(block_[2 * lane_]) << 32) |
                                block_[2 * lane_ + 1];
        ++lane_;
        return v;
    }

    /// Uniform in the open interval (0, 1).
    double uniform()
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by Box-Muller; pairs are cached.
    double normal()
    {
        if (has_spare_)
        {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    void fill_normal(std::span<double> out)
    {
        for (double& x : out) x = normal();
    }

    std::uint64_t blocks_consumed() const noexcept { return block_index_; }

  private:
    void refill()
    {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_index_),
                                      static_cast<std::uint32_t>(block_index_ >> 32),
                                      static_cast<std::uint32_t>(stream_id_),
                                      static_cast<std::uint32_t>(stream_id_ >> 32)};
        block_ = Philox4x32::apply(ctr, key_);
        ++block_index_;
        lane_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_index_ = 0;
    Philox4x32::Counter block_{};
    int lane_ = 2;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace blowuplab
