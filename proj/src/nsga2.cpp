#include "curvecorrect/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "curvecorrect/parallel.hpp"
#include "curvecorrect/rng.hpp"

namespace curvecorrect {

namespace {

constexpr double kEps = 1e-14;

struct Individual {
    std::vector<double> x;
    std::vector<double> f;
    int rank = 0;
    double crowding = 0.0;
};

// a dominates b: no objective worse, at least one strictly better.
bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly = true;
    }
    return strictly;
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<int> dom_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(pop[p].f, pop[q].f)) {
                dominated[p].push_back(q);
            } else if (dominates(pop[q].f, pop[p].f)) {
                ++dom_count[p];
            }
        }
        if (dom_count[p] == 0) {
            pop[p].rank = 0;
            fronts[0].push_back(p);
        }
    }

    std::size_t i = 0;
    while (!fronts[i].empty()) {
        std::vector<std::size_t> next;
        for (std::size_t p : fronts[i]) {
            for (std::size_t q : dominated[p]) {
                if (--dom_count[q] == 0) {
                    pop[q].rank = static_cast<int>(i) + 1;
                    next.push_back(q);
                }
            }
        }
        fronts.push_back(std::move(next));
        ++i;
    }
    fronts.pop_back();
    return fronts;
}

void assign_crowding(std::vector<Individual>& pop, const std::vector<std::size_t>& front) {
    for (std::size_t idx : front) pop[idx].crowding = 0.0;
    if (front.size() < 3) {
        for (std::size_t idx : front) pop[idx].crowding = std::numeric_limits<double>::infinity();
        return;
    }
    const std::size_t n_obj = pop[front[0]].f.size();
    std::vector<std::size_t> order(front);
    for (std::size_t m = 0; m < n_obj; ++m) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (pop[a].f[m] != pop[b].f[m]) return pop[a].f[m] < pop[b].f[m];
            return a < b;  // stable tie-break for determinism
        });
        const double lo = pop[order.front()].f[m];
        const double hi = pop[order.back()].f[m];
        pop[order.front()].crowding = std::numeric_limits<double>::infinity();
        pop[order.back()].crowding = std::numeric_limits<double>::infinity();
        if (hi - lo <= 0.0) continue;
        for (std::size_t j = 1; j + 1 < order.size(); ++j) {
            pop[order[j]].crowding +=
                (pop[order[j + 1]].f[m] - pop[order[j - 1]].f[m]) / (hi - lo);
        }
    }
}

// Crowded-comparison operator: lower rank wins, then larger crowding.
bool better(const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
}

std::size_t tournament(const std::vector<Individual>& pop, Rng& rng) {
    const std::size_t a = static_cast<std::size_t>(rng.below(pop.size()));
    const std::size_t b = static_cast<std::size_t>(rng.below(pop.size()));
    return better(pop[b], pop[a]) ? b : a;
}

// Simulated binary crossover (Deb & Agrawal), bounded form.
void sbx_pair(std::vector<double>& c1, std::vector<double>& c2, std::span<const double> lo,
              std::span<const double> hi, double eta, Rng& rng) {
    for (std::size_t i = 0; i < c1.size(); ++i) {
        if (rng.uniform() > 0.5) continue;
        if (std::abs(c1[i] - c2[i]) <= kEps) continue;
        const double y1 = std::min(c1[i], c2[i]);
        const double y2 = std::max(c1[i], c2[i]);
        const double u = rng.uniform();

        auto spread = [&](double beta) {
            const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
            if (u <= 1.0 / alpha) return std::pow(u * alpha, 1.0 / (eta + 1.0));
            return std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
        };

        const double beta_lo = 1.0 + 2.0 * (y1 - lo[i]) / (y2 - y1);
        const double beta_hi = 1.0 + 2.0 * (hi[i] - y2) / (y2 - y1);
        double child1 = 0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1));
        double child2 = 0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1));
        child1 = std::clamp(child1, lo[i], hi[i]);
        child2 = std::clamp(child2, lo[i], hi[i]);
        if (rng.uniform() <= 0.5) std::swap(child1, child2);
        c1[i] = child1;
        c2[i] = child2;
    }
}

// Polynomial mutation (Deb), bounded form.
void polynomial_mutation(std::vector<double>& x, std::span<const double> lo,
                         std::span<const double> hi, double eta, double prob, Rng& rng) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (rng.uniform() >= prob) continue;
        const double range = hi[i] - lo[i];
        if (range <= 0.0) continue;
        const double u = rng.uniform();
        double deltaq;
        if (u < 0.5) {
            const double d = (x[i] - lo[i]) / range;
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d, eta + 1.0);
            deltaq = std::pow(val, 1.0 / (eta + 1.0)) - 1.0;
        } else {
            const double d = (hi[i] - x[i]) / range;
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d, eta + 1.0);
            deltaq = 1.0 - std::pow(val, 1.0 / (eta + 1.0));
        }
        x[i] = std::clamp(x[i] + deltaq * range, lo[i], hi[i]);
    }
}

void refresh_rank_and_crowding(std::vector<Individual>& pop) {
    const auto fronts = fast_nondominated_sort(pop);
    for (const auto& front : fronts) assign_crowding(pop, front);
}

}  // namespace

std::vector<Nsga2Member> nsga2_search(const ObjectiveFn& objectives, std::size_t n_objectives,
                                      std::span<const double> lo, std::span<const double> hi,
                                      const Nsga2Config& config, std::uint64_t seed) {
    const std::size_t n_vars = lo.size();
    if (n_vars == 0 || hi.size() != n_vars) {
        throw std::invalid_argument("bounds must be a nonempty box");
    }
    for (std::size_t i = 0; i < n_vars; ++i) {
        if (!(lo[i] <= hi[i])) throw std::invalid_argument("bounds must satisfy lo <= hi");
    }
    if (config.population < 2) throw std::invalid_argument("population must be >= 2");
    if (config.offspring < 1) throw std::invalid_argument("offspring must be >= 1");
    if (n_objectives == 0) throw std::invalid_argument("need at least one objective");

    const double pm = config.mutation_prob >= 0.0 ? config.mutation_prob
                                                  : 1.0 / static_cast<double>(n_vars);
    Rng rng(seed);

    auto evaluate_batch = [&](std::vector<Individual>& batch) {
        parallel_for(batch.size(), config.jobs, [&](std::size_t i) {
            batch[i].f.assign(n_objectives, 0.0);
            objectives(batch[i].x, batch[i].f);
        });
    };

    std::vector<Individual> pop(static_cast<std::size_t>(config.population));
    for (auto& ind : pop) {
        ind.x.resize(n_vars);
        for (std::size_t i = 0; i < n_vars; ++i) {
            ind.x[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
        }
    }
    evaluate_batch(pop);
    refresh_rank_and_crowding(pop);

    for (int gen = 0; gen < config.generations; ++gen) {
        std::vector<Individual> kids;
        kids.reserve(static_cast<std::size_t>(config.offspring));
        while (kids.size() < static_cast<std::size_t>(config.offspring)) {
            const std::size_t pa = tournament(pop, rng);
            const std::size_t pb = tournament(pop, rng);
            Individual c1{pop[pa].x, {}, 0, 0.0};
            Individual c2{pop[pb].x, {}, 0, 0.0};
            if (rng.uniform() <= config.crossover_prob) {
                sbx_pair(c1.x, c2.x, lo, hi, config.eta_crossover, rng);
            }
            polynomial_mutation(c1.x, lo, hi, config.eta_mutation, pm, rng);
            polynomial_mutation(c2.x, lo, hi, config.eta_mutation, pm, rng);
            kids.push_back(std::move(c1));
            if (kids.size() < static_cast<std::size_t>(config.offspring)) {
                kids.push_back(std::move(c2));
            }
        }
        evaluate_batch(kids);

        std::vector<Individual> merged;
        merged.reserve(pop.size() + kids.size());
        std::move(pop.begin(), pop.end(), std::back_inserter(merged));
        std::move(kids.begin(), kids.end(), std::back_inserter(merged));

        const auto fronts = fast_nondominated_sort(merged);
        for (const auto& front : fronts) assign_crowding(merged, front);

        std::vector<Individual> next;
        next.reserve(static_cast<std::size_t>(config.population));
        for (const auto& front : fronts) {
            if (next.size() + front.size() <= static_cast<std::size_t>(config.population)) {
                for (std::size_t idx : front) next.push_back(std::move(merged[idx]));
            } else {
                std::vector<std::size_t> order(front);
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    if (merged[a].crowding != merged[b].crowding) {
                        return merged[a].crowding > merged[b].crowding;
                    }
                    return a < b;
                });
                for (std::size_t idx : order) {
                    if (next.size() == static_cast<std::size_t>(config.population)) break;
                    next.push_back(std::move(merged[idx]));
                }
            }
            if (next.size() == static_cast<std::size_t>(config.population)) break;
        }
        pop = std::move(next);
        refresh_rank_and_crowding(pop);
    }

    std::vector<Nsga2Member> front;
    for (const auto& ind : pop) {
        if (ind.rank == 0) front.push_back(Nsga2Member{ind.x, ind.f});
    }
    return front;
}

}  // namespace curvecorrect
