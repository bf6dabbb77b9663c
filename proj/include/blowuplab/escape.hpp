#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "domain_g.hpp"
#include "montecarlo.hpp"

namespace blowuplab::phase {

/// N seeded paths from the origin at a single eps: exit time from G, the
/// cap flag of the exit point, and the explosion time of the same path.
inline SampleTable escape_experiment(const ModelParams& params, const DomainG& G, double eps,
                                     std::size_t N, const SdeConfig& cfg, std::uint64_t seed,
                                     unsigned workers = 1)
{
    if (!(eps > 0.0)) throw std::invalid_argument("escape_experiment: eps must be positive");
    SweepSpec spec;
    spec.model = params;
    spec.eps_list = {eps};
    spec.N = N;
    spec.u0 = State::constant(params.d, 0.0);
    spec.seed = seed;
    spec.sde = cfg;
    spec.experiment = Experiment::ExitFromG;
    spec.domain = std::make_shared<const DomainG>(G);
    spec.workers = workers;
    return montecarlo::run_sweep(spec);
}

}  // namespace blowuplab::phase
