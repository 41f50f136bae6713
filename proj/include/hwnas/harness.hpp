#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hwnas/bench_table.hpp"
#include "hwnas/engine.hpp"
#include "hwnas/genotype.hpp"
#include "hwnas/hwcost.hpp"

namespace hwnas {

/// Per-operation mean edge count over a set of architectures. The five
/// means always sum to 6 (every architecture has exactly six edges).
struct OpDistribution {
    std::array<double, kNumOperations> mean_count{};
};

/// Throws std::invalid_argument on an empty list.
OpDistribution op_distribution(const std::vector<Genotype>& archs);

/// Full synthetic benchmark: MACs from the analytic estimate, per-device
/// latency from seeded affine-plus-noise profiles over the MACs, and
/// accuracies that increase with conv-gene count. Self-contained stand-in
/// with the same schema as a real measured table; deterministic per seed.
BenchTable gen_bench_table(std::uint64_t seed, const MacroSkeleton& skel = {},
                           Exec exec = Exec::parallel);

/// The cost an engine run would assign: analytic MACs, or the table's
/// latency column.
double cost_of(const Genotype& g, const CostQuery& query, const BenchTable* table,
               const MacroSkeleton& skel);

/// Smallest cost value whose feasible set covers at least fraction p of the
/// present rows (p in (0, 1]).
double cost_quantile(const BenchTable& table, const CostQuery& query, const MacroSkeleton& skel,
                     double p);

double feasible_fraction(const BenchTable& table, const Constraint& constraint,
                         const MacroSkeleton& skel);

/// Brute-force constrained optimum over the table.
struct OracleResult {
    Genotype best;
    double accuracy = 0.0;
    double cost = 0.0;
    std::size_t feasible_count = 0;
};

/// Scans every present row; the best feasible architecture by accuracy
/// (ties broken by canonical string). Throws LookupError when nothing is
/// feasible. Serial and parallel scans return the same result.
OracleResult exhaustive_best(const BenchTable& table, const Constraint& constraint, Dataset ds,
                             const MacroSkeleton& skel, Exec exec = Exec::parallel);

/// Top-k feasible architectures by accuracy, best first.
std::vector<Genotype> oracle_top_k(const BenchTable& table, const Constraint& constraint,
                                   Dataset ds, const MacroSkeleton& skel, std::size_t k);

/// One search run plus everything needed to reproduce it.
struct RunResult {
    SearchConfig config;
    FitnessRecord best;
    SearchHistory history;
    double duration_s = 0.0;

    /// Field-for-field equality, wall-clock duration excluded.
    bool equivalent(const RunResult& other) const;
};

/// Builds the context for cfg and executes the search, timing it.
RunResult run_from_config(const SearchConfig& cfg, const BenchTable* table,
                          Exec exec = Exec::parallel);

/// Grid of constraint values x devices x seeds. Devices apply only to the
/// latency metric; run s of a cell uses seed template.seed + s.
struct SweepSpec {
    CostMetric metric = CostMetric::latency;
    std::vector<DeviceId> devices;
    std::vector<double> omegas;
    int num_seeds = 10;
};

struct SweepCellSummary {
    CostQuery query;
    double omega = 0.0;
    int runs = 0;
    std::vector<std::string> errors;  // one entry per failed run
    double mean_accuracy = 0.0;       // table accuracy of discovered bests, percent
    double std_accuracy = 0.0;
    double mean_cost = 0.0;
    // Mean tabulated latency of the discovered bests on every device; shows
    // how the same constraint lands on different hardware (NaN when absent).
    std::array<double, kNumDevices> mean_latency_ms{};
    OpDistribution discovered_ops;    // over the discovered bests
    OpDistribution oracle_top10_ops;  // over the top-10 feasible table rows
    OracleResult oracle;
};

struct SweepResult {
    std::vector<RunResult> runs;
    std::vector<SweepCellSummary> cells;
};

/// Executes run_from_config per grid cell. A failed run is recorded in its
/// cell's error list and excluded from the statistics; remaining cells
/// still execute.
SweepResult run_sweep(const SweepSpec& spec, const SearchConfig& tmpl, const BenchTable& table,
                      Exec exec = Exec::parallel);

/// One row of the sampling-cost comparison between the rejection baseline
/// and the penalty strategy.
struct AblationRow {
    double omega = 0.0;
    double feasible_frac = 0.0;          // exhaustively measured
    double rejection_mean_samples = 0.0; // mean draws over the runs; NaN when halted
    bool halted = false;
    double penalty_samples = 0.0;        // constant: the population size
};

/// For each constraint: mean rejection-sampling draw count over `runs`
/// runs versus the penalty strategy's constant `size`. A constraint whose
/// sampler halts produces a flagged row, not an abort.
std::vector<AblationRow> rejection_vs_penalty_experiment(
    const std::vector<double>& omegas, const CostQuery& query, const BenchTable* table,
    const MacroSkeleton& skel, std::size_t size, int runs, std::uint64_t seed,
    std::size_t max_attempts = 1000000);

/// Line-delimited results file: one self-describing record per line with
/// stable field order; reload yields equal records.
void write_results(const std::vector<RunResult>& results, const std::string& path);
std::vector<RunResult> read_results(const std::string& path);

std::string run_result_to_line(const RunResult& r);
RunResult run_result_from_line(const std::string& line);

}  // namespace hwnas
