// Command-line front end: single searches, constraint sweeps, the
// rejection-vs-penalty sampling comparison, table statistics and synthetic
// benchmark generation. All numeric outputs are plot-ready CSV or JSONL.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hwnas/bench_table.hpp"
#include "hwnas/engine.hpp"
#include "hwnas/harness.hpp"
#include "hwnas/hwcost.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace hwnas;

double parse_omega(const std::string& s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad omega value '" + s + "'");
    return v;
}

std::vector<double> parse_omega_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_omega(item));
    if (out.empty()) throw std::invalid_argument("empty omega list");
    return out;
}

std::vector<DeviceId> parse_device_list(const std::string& s) {
    std::vector<DeviceId> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(device_from_name(item));
    return out;
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    return file;
}

std::string query_label(const CostQuery& q) {
    return q.metric == CostMetric::macs ? "macs" : std::string(device_name(*q.device));
}

void print_op_header(std::ostream& os, const std::string& prefix) {
    for (int i = 0; i < kNumOperations; ++i)
        os << ',' << prefix << op_name(static_cast<Operation>(i));
}

void print_op_row(std::ostream& os, const OpDistribution& d) {
    for (int i = 0; i < kNumOperations; ++i) os << ',' << d.mean_count[i];
}

struct CommonFlags {
    std::string bench_path;
    std::string estimator = "tabular";
    std::string metric = "latency";
    std::string device = "edgegpu";
    std::string dataset = "cifar10";
    std::uint64_t seed = 0;
    int gens = 100;
    int pop = 20;
    int epochs = 100;
    double beta = 0.8;
    double mutation_rate = 1.0 / 6.0;
    int threads = 0;
    bool serial = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_estimator = true) {
    cmd->add_option("--bench", f.bench_path, "Benchmark CSV path");
    if (with_estimator)
        cmd->add_option("--estimator", f.estimator, "Performance estimator: rmi|tabular")
            ->check(CLI::IsMember({"rmi", "tabular"}));
    cmd->add_option("--metric", f.metric, "Hardware cost metric: macs|latency")
        ->check(CLI::IsMember({"macs", "latency"}));
    cmd->add_option("--device", f.device, "Target device for latency costs");
    cmd->add_option("--dataset", f.dataset, "Accuracy dataset: cifar10|cifar100|in16")
        ->check(CLI::IsMember({"cifar10", "cifar100", "in16"}));
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--gens", f.gens, "Generations");
    cmd->add_option("--pop", f.pop, "Population size");
    cmd->add_option("--epochs", f.epochs, "Surrogate training epochs per evaluation");
    cmd->add_option("--beta", f.beta, "Similarity-vs-task weight in the training loss");
    cmd->add_option("--mutation-rate", f.mutation_rate, "Per-gene mutation probability");
    cmd->add_option("--threads", f.threads, "OpenMP thread count (0 = library default)");
    cmd->add_flag("--serial", f.serial, "Use the serial reference evaluation path");
}

SearchConfig config_from_flags(const CommonFlags& f, double omega,
                               const std::string& ref_arch = "") {
    SearchConfig cfg;
    cfg.n_gen = f.gens;
    cfg.n_pop = f.pop;
    cfg.n_train = f.epochs;
    cfg.beta = f.beta;
    cfg.mutation_rate = f.mutation_rate;
    cfg.estimator = estimator_from_name(f.estimator);
    cfg.dataset = dataset_from_name(f.dataset);
    cfg.seed = f.seed;
    cfg.reference_arch = ref_arch;
    const CostQuery query = cost_metric_from_name(f.metric) == CostMetric::macs
                                ? CostQuery::macs()
                                : CostQuery::latency(device_from_name(f.device));
    cfg.constraint = Constraint{omega, query};
    return cfg;
}

void apply_threads(const CommonFlags& f) {
#ifdef _OPENMP
    if (f.threads > 0) omp_set_num_threads(f.threads);
#else
    (void)f;
#endif
}

int cmd_search(const CommonFlags& f, const std::string& omega_str, const std::string& ref_arch,
               const std::string& out_path) {
    apply_threads(f);
    SearchConfig cfg = config_from_flags(f, parse_omega(omega_str), ref_arch);

    std::optional<BenchTable> table;
    if (!f.bench_path.empty()) table = load_bench(f.bench_path);
    const BenchTable* table_ptr = table.has_value() ? &*table : nullptr;

    RunResult result = run_from_config(cfg, table_ptr, f.serial ? Exec::serial : Exec::parallel);

    std::cout << "best_arch: " << format_arch_str(result.best.genotype) << '\n'
              << "phi: " << result.best.phi << '\n'
              << "cost[" << query_label(cfg.constraint.query) << "]: " << result.best.cost.value
              << '\n'
              << "psi: " << result.best.psi << '\n'
              << "fitness: " << result.best.fitness << '\n'
              << "samples: " << result.history.total_samples << '\n'
              << "evaluations: " << result.history.total_evals << '\n'
              << "duration_s: " << result.duration_s << '\n';
    if (table_ptr != nullptr && table_ptr->contains(result.best.genotype))
        std::cout << "table_accuracy[" << f.dataset
                  << "]: " << table_ptr->accuracy(result.best.genotype, cfg.dataset) << '\n';
    if (!out_path.empty()) write_results({result}, out_path);
    return 0;
}

int cmd_sweep(const CommonFlags& f, const std::string& omegas_str, const std::string& devices_str,
              int num_seeds, const std::string& out_path, const std::string& summary_path) {
    apply_threads(f);
    if (f.bench_path.empty()) throw std::invalid_argument("sweep requires --bench");
    BenchTable table = load_bench(f.bench_path);

    SweepSpec spec;
    spec.metric = cost_metric_from_name(f.metric);
    spec.omegas = parse_omega_list(omegas_str);
    spec.num_seeds = num_seeds;
    if (spec.metric == CostMetric::latency) {
        spec.devices = devices_str.empty() ? std::vector<DeviceId>{device_from_name(f.device)}
                                           : parse_device_list(devices_str);
    }

    SearchConfig tmpl = config_from_flags(f, spec.omegas.front());
    SweepResult sweep = run_sweep(spec, tmpl, table, f.serial ? Exec::serial : Exec::parallel);

    if (!out_path.empty()) write_results(sweep.runs, out_path);

    std::ofstream summary_file;
    std::ostream& os = open_or_stdout(summary_file, summary_path);
    os << "metric,device,omega,runs,failures,mean_accuracy,std_accuracy,mean_cost,"
          "oracle_accuracy,oracle_cost,oracle_arch,feasible_count";
    for (int d = 0; d < kNumDevices; ++d)
        os << ",mean_" << device_name(static_cast<DeviceId>(d)) << "_ms";
    print_op_header(os, "discovered_");
    print_op_header(os, "top10_");
    os << '\n';
    for (const SweepCellSummary& cell : sweep.cells) {
        os << cost_metric_name(cell.query.metric) << ','
           << (cell.query.device.has_value() ? device_name(*cell.query.device) : "") << ','
           << cell.omega << ',' << cell.runs << ',' << cell.errors.size() << ','
           << cell.mean_accuracy << ',' << cell.std_accuracy << ',' << cell.mean_cost << ','
           << cell.oracle.accuracy << ',' << cell.oracle.cost << ','
           << format_arch_str(cell.oracle.best) << ',' << cell.oracle.feasible_count;
        for (double lat : cell.mean_latency_ms) {
            os << ',';
            if (!std::isnan(lat)) os << lat;
        }
        print_op_row(os, cell.discovered_ops);
        print_op_row(os, cell.oracle_top10_ops);
        os << '\n';
        for (const std::string& e : cell.errors) std::cerr << "cell failure: " << e << '\n';
    }
    return 0;
}

int cmd_ablate(const CommonFlags& f, const std::string& omegas_str, std::size_t size, int runs,
               const std::string& out_path) {
    apply_threads(f);
    std::optional<BenchTable> table;
    if (!f.bench_path.empty()) table = load_bench(f.bench_path);
    const BenchTable* table_ptr = table.has_value() ? &*table : nullptr;

    const CostQuery query = cost_metric_from_name(f.metric) == CostMetric::macs
                                ? CostQuery::macs()
                                : CostQuery::latency(device_from_name(f.device));
    auto rows = rejection_vs_penalty_experiment(parse_omega_list(omegas_str), query, table_ptr,
                                                MacroSkeleton{}, size, runs, f.seed);

    std::ofstream file;
    std::ostream& os = open_or_stdout(file, out_path);
    os << "omega,feasible_fraction,rejection_mean_samples,halted,penalty_samples\n";
    for (const AblationRow& r : rows) {
        os << r.omega << ',' << r.feasible_frac << ',';
        if (r.halted)
            os << "";
        else
            os << r.rejection_mean_samples;
        os << ',' << (r.halted ? 1 : 0) << ',' << r.penalty_samples << '\n';
    }
    return 0;
}

int cmd_stats(const CommonFlags& f, int top_k, const std::string& omega_str,
              const std::string& out_path) {
    if (f.bench_path.empty()) throw std::invalid_argument("stats requires --bench");
    BenchTable table = load_bench(f.bench_path);

    const double omega = omega_str.empty() ? std::numeric_limits<double>::infinity()
                                           : parse_omega(omega_str);
    const CostQuery query = cost_metric_from_name(f.metric) == CostMetric::macs
                                ? CostQuery::macs()
                                : CostQuery::latency(device_from_name(f.device));
    const Constraint constraint{omega, query};
    const Dataset ds = dataset_from_name(f.dataset);

    auto top = oracle_top_k(table, constraint, ds, MacroSkeleton{}, top_k);
    if (top.empty()) throw std::runtime_error("no feasible architectures under the constraint");
    OpDistribution dist = op_distribution(top);

    std::ofstream file;
    std::ostream& os = open_or_stdout(file, out_path);
    os << "op,mean_count\n";
    for (int i = 0; i < kNumOperations; ++i)
        os << op_name(static_cast<Operation>(i)) << ',' << dist.mean_count[i] << '\n';
    return 0;
}

int cmd_gen_bench(std::uint64_t seed, const std::string& out_path) {
    if (out_path.empty()) throw std::invalid_argument("gen-bench requires --out");
    BenchTable table = gen_bench_table(seed);
    write_bench(table, out_path);
    std::cout << "wrote " << table.size() << " rows to " << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constraint-aware evolutionary architecture search over a tabular space"};
    app.require_subcommand(1);

    CommonFlags search_flags, sweep_flags, ablate_flags, stats_flags;
    std::string search_omega = "inf", search_ref, search_out;
    std::string sweep_omegas, sweep_devices, sweep_out, sweep_summary;
    int sweep_seeds = 10;
    std::string ablate_omegas, ablate_out;
    std::size_t ablate_size = 50;
    int ablate_runs = 10;
    int stats_top_k = 10;
    std::string stats_omega, stats_out;
    std::uint64_t gen_seed = 0;
    std::string gen_out;

    CLI::App* search = app.add_subcommand("search", "Run one architecture search");
    add_common(search, search_flags);
    search->add_option("--omega", search_omega, "Hardware budget (or 'inf')");
    search->add_option("--ref-arch", search_ref, "Reference architecture string (rmi estimator)");
    search->add_option("--out", search_out, "Write the run result as JSONL");

    CLI::App* sweep = app.add_subcommand("sweep", "Grid of constraints x devices x seeds");
    add_common(sweep, sweep_flags);
    sweep->add_option("--omegas", sweep_omegas, "Comma-separated constraint values")->required();
    sweep->add_option("--devices", sweep_devices, "Comma-separated device names");
    sweep->add_option("--seeds", sweep_seeds, "Runs per cell (seeds seed..seed+n-1)");
    sweep->add_option("--out", sweep_out, "Write per-run results as JSONL");
    sweep->add_option("--summary", sweep_summary, "Write the per-cell summary CSV (default: stdout)");

    CLI::App* ablate = app.add_subcommand(
        "ablate-rejection", "Compare rejection-sampling draw counts with the penalty strategy");
    add_common(ablate, ablate_flags, /*with_estimator=*/false);
    ablate->add_option("--omegas", ablate_omegas, "Comma-separated constraint values")->required();
    ablate->add_option("--size", ablate_size, "Population size to fill");
    ablate->add_option("--runs", ablate_runs, "Runs per constraint");
    ablate->add_option("--out", ablate_out, "Write the comparison CSV (default: stdout)");

    CLI::App* stats = app.add_subcommand("stats", "Operation distribution over top table rows");
    add_common(stats, stats_flags, /*with_estimator=*/false);
    stats->add_option("--top-k", stats_top_k, "How many top architectures to aggregate");
    stats->add_option("--omega", stats_omega, "Optional feasibility filter");
    stats->add_option("--out", stats_out, "Write the distribution CSV (default: stdout)");

    CLI::App* gen = app.add_subcommand("gen-bench", "Generate the synthetic benchmark table");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (search->parsed()) return cmd_search(search_flags, search_omega, search_ref, search_out);
        if (sweep->parsed())
            return cmd_sweep(sweep_flags, sweep_omegas, sweep_devices, sweep_seeds, sweep_out,
                             sweep_summary);
        if (ablate->parsed())
            return cmd_ablate(ablate_flags, ablate_omegas, ablate_size, ablate_runs, ablate_out);
        if (stats->parsed()) return cmd_stats(stats_flags, stats_top_k, stats_omega, stats_out);
        if (gen->parsed()) return cmd_gen_bench(gen_seed, gen_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
