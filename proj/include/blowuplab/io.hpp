#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace blowuplab::io {

/// Writes through a temporary sibling file and renames it into place, so a
/// failed writer never leaves a partial file behind.
inline void atomic_write(const std::filesystem::path& target,
                         const std::function<void(std::ostream&)>& writer)
{
    namespace fs = std::filesystem;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    try
    {
        {
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
            writer(os);
            os.flush();
            if (!os) throw std::runtime_error("write to " + tmp.string() + " failed");
        }
        fs::rename(tmp, target);
    }
    catch (...)
    {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

inline void atomic_write(const std::filesystem::path& target, const std::string& content)
{
    atomic_write(target, [&](std::ostream& os) { os << content; });
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace blowuplab::io
