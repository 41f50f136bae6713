#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "hwnas/bench_table.hpp"
#include "hwnas/genotype.hpp"
#include "hwnas/hwcost.hpp"
#include "hwnas/rmi.hpp"
#include "hwnas/rng.hpp"
#include "hwnas/surrogate.hpp"

namespace hwnas {

enum class EstimatorKind { rmi_surrogate, tabular_accuracy };

const char* estimator_name(EstimatorKind k);
EstimatorKind estimator_from_name(const std::string& name);  // throws ParseError

/// Whether per-generation fitness evaluation runs on OpenMP workers or on
/// the serial reference path. Results are bit-identical either way;
/// evaluation is pure and merged in population index order.
enum class Exec { serial, parallel };

/// Run parameters. The seed, together with the table, fully determines a
/// run's output.
struct SearchConfig {
    int n_gen = 100;
    int n_pop = 20;
    int n_train = 100;
    double beta = 0.8;
    double mutation_rate = 1.0 / 6.0;
    int elitism = 1;
    int tournament = 2;
    Constraint constraint{std::numeric_limits<double>::infinity(), CostQuery::macs()};
    EstimatorKind estimator = EstimatorKind::tabular_accuracy;
    Dataset dataset = Dataset::cifar10;
    std::uint64_t seed = 0;
    double step_size = 1e-2;
    std::string reference_arch;  // empty selects the built-in default

    void validate() const;  // throws std::invalid_argument
};

/// One individual's evaluation: similarity-or-accuracy score, tagged
/// hardware cost, shortfall penalty and their sum. fitness == phi + psi
/// exactly, and psi == 0 iff the cost is within budget.
struct FitnessRecord {
    Genotype genotype;
    double phi = 0.0;
    CostValue cost;
    double psi = 0.0;
    double fitness = 0.0;
};

struct GenerationStats {
    int generation = 0;
    FitnessRecord best;  // best of this generation by fitness
    double mean_fitness = 0.0;
    std::uint64_t cumulative_evals = 0;
};

struct SearchHistory {
    std::vector<GenerationStats> generations;  // indices 0..n_gen
    std::uint64_t total_samples = 0;           // genotype sampling events
    std::uint64_t total_evals = 0;
};

/// Everything evaluation needs besides the config: the table (tabular
/// estimator and latency costs), the cost skeleton, and the fixed batch,
/// targets and reference stack for the surrogate estimator.
struct EvalContext {
    const BenchTable* table = nullptr;
    MacroSkeleton skeleton;
    ReferenceModel reference;
    Matrix batch;
    Matrix targets;
    std::uint64_t surrogate_seed = 0;
};

/// Surrogate batch geometry: large enough for non-trivial Gram structure,
/// small enough to evaluate the whole space in seconds.
inline constexpr std::size_t kBatchRows = 32;
inline constexpr std::size_t kFeatureWidth = 16;

/// Builds the evaluation context for a config: derives the batch, targets
/// and reference stack from the seed. `table` may be null when neither the
/// estimator nor the constraint needs it.
EvalContext make_context(const SearchConfig& cfg, const BenchTable* table);

/// Score, cost and penalize one architecture. Pure given (g, cfg, ctx).
FitnessRecord evaluate_fitness(const Genotype& g, const SearchConfig& cfg,
                               const EvalContext& ctx);

/// n_pop uniform random architectures; duplicates permitted. Nothing is
/// rejected for infeasibility; the penalty term handles constraints, so the
/// number of draws never depends on the budget.
std::vector<Genotype> init_population(const SearchConfig& cfg, Rng& rng);

/// Next generation: the top `elitism` individuals carry over unchanged
/// (fitness ties broken by canonical string), the rest are produced by
/// tournament selection of two parents, uniform crossover and mutation.
std::vector<Genotype> evolve_generation(const std::vector<Genotype>& pop,
                                        const std::vector<FitnessRecord>& records,
                                        const SearchConfig& cfg, Rng& rng);

using FitnessMemo = std::unordered_map<std::uint32_t, FitnessRecord>;

/// Evaluate a population, reusing memoized records for repeated genotypes.
/// The parallel path evaluates cache misses on OpenMP workers and merges in
/// index order; it returns exactly the serial path's records.
std::vector<FitnessRecord> evaluate_population(const std::vector<Genotype>& pop,
                                               const SearchConfig& cfg, const EvalContext& ctx,
                                               FitnessMemo& memo, Exec exec);

struct SearchResult {
    FitnessRecord best;  // best-ever individual; feasible whenever any
                         // evaluated individual was feasible
    SearchHistory history;
};

/// The generational search: evaluate, select, cross over, mutate for n_gen
/// generations (plus the initial population), tracking the best individual
/// ever evaluated. Deterministic given (seed, config, table).
SearchResult run_search(const SearchConfig& cfg, const EvalContext& ctx,
                        Exec exec = Exec::parallel);

}  // namespace hwnas
