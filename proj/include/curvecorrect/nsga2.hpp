#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace curvecorrect {

struct Nsga2Config {
    int population = 40;
    int offspring = 10;  ///< evaluated per generation (mu + lambda survival)
    int generations = 300;
    double eta_crossover = 15.0;  ///< SBX distribution index
    double eta_mutation = 20.0;   ///< polynomial-mutation distribution index
    double crossover_prob = 0.9;
    double mutation_prob = -1.0;  ///< per variable; < 0 means 1/n_vars
    int jobs = 1;                 ///< workers for objective evaluation
};

struct Nsga2Member {
    std::vector<double> x;
    std::vector<double> f;
};

/// Evaluates all objectives of x into f (f.size() == objective count).
/// Must be pure and thread-safe.
using ObjectiveFn = std::function<void(std::span<const double> x, std::span<double> f)>;

/// NSGA-II over a box: simulated binary crossover, polynomial mutation,
/// binary tournaments on (rank, crowding), mu + lambda elitist survival.
/// Returns the nondominated front of the final population; every member lies
/// inside [lo, hi]. Deterministic per seed for any jobs value.
std::vector<Nsga2Member> nsga2_search(const ObjectiveFn& objectives, std::size_t n_objectives,
                                      std::span<const double> lo, std::span<const double> hi,
                                      const Nsga2Config& config, std::uint64_t seed);

}  // namespace curvecorrect
