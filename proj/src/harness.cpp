#include "hwnas/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hwnas/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hwnas {

using ordered_json = nlohmann::ordered_json;

OpDistribution op_distribution(const std::vector<Genotype>& archs) {
    if (archs.empty()) throw std::invalid_argument("op_distribution: empty architecture list");
    std::array<std::uint64_t, kNumOperations> counts{};
    for (const Genotype& g : archs)
        for (Operation op : g.genes) ++counts[static_cast<int>(op)];
    OpDistribution dist;
    for (int i = 0; i < kNumOperations; ++i)
        dist.mean_count[i] = static_cast<double>(counts[i]) / static_cast<double>(archs.size());
    return dist;
}

namespace {

struct DeviceProfile {
    double per_mac_ms;  // slope over the MACs estimate (ms per million MACs)
    double base_ms;
    double noise_ms;    // half-width of the uniform noise band
};

// Synthetic edge-device profiles; invented, but ordered so that slow and
// fast devices disagree about the same architecture.
constexpr DeviceProfile kDeviceProfiles[kNumDevices] = {
    {0.045, 1.2, 0.35},  // edgegpu
    {0.56, 3.0, 1.0},    // raspi4
    {0.009, 0.5, 0.1},   // edgetpu
    {0.11, 1.5, 0.5},    // pixel3
    {0.018, 0.8, 0.2},   // eyeriss
    {0.028, 0.9, 0.25},  // fpga
};

constexpr std::uint64_t kTableStream = 0x7AB1E;

BenchRow synth_row(const Genotype& g, const MacroSkeleton& skel, std::uint64_t table_seed,
                   std::uint32_t idx) {
    Rng rng(derive_seed(table_seed, kTableStream, idx));
    BenchRow row;
    row.macs_m = macs_estimate(g, skel);

    // Accuracy grows with conv genes (3x3 worth more than 1x1), a little
    // with skips, and carries per-architecture noise so rankings are total.
    const double signal = 4.2 * g.count_op(Operation::nor_conv_3x3) +
                          2.0 * g.count_op(Operation::nor_conv_1x1) +
                          0.5 * g.count_op(Operation::skip_connect) +
                          0.1 * g.count_op(Operation::avg_pool_3x3);
    row.accuracy[static_cast<int>(Dataset::cifar10)] = 55.0 + signal + rng.real(-0.5, 0.5);
    row.accuracy[static_cast<int>(Dataset::cifar100)] = 33.0 + signal + rng.real(-0.5, 0.5);
    row.accuracy[static_cast<int>(Dataset::in16)] = 17.0 + signal + rng.real(-0.5, 0.5);

    for (int d = 0; d < kNumDevices; ++d) {
        const DeviceProfile& p = kDeviceProfiles[d];
        row.latency_ms[d] = p.base_ms + p.per_mac_ms * row.macs_m + p.noise_ms * rng.real(-1.0, 1.0);
    }
    return row;
}

}  // namespace

BenchTable gen_bench_table(std::uint64_t seed, const MacroSkeleton& skel, Exec exec) {
    std::vector<BenchRow> rows(kSpaceSize);
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::uint32_t idx = 0; idx < kSpaceSize; ++idx)
            rows[idx] = synth_row(Genotype::from_index(idx), skel, seed, idx);
    } else {
        for (std::uint32_t idx = 0; idx < kSpaceSize; ++idx)
            rows[idx] = synth_row(Genotype::from_index(idx), skel, seed, idx);
    }
    BenchTable table;
    for (std::uint32_t idx = 0; idx < kSpaceSize; ++idx)
        table.insert(Genotype::from_index(idx), rows[idx]);
    return table;
}

double cost_of(const Genotype& g, const CostQuery& query, const BenchTable* table,
               const MacroSkeleton& skel) {
    query.validate();
    if (query.metric == CostMetric::macs) return macs_estimate(g, skel);
    if (table == nullptr) throw std::invalid_argument("cost_of: latency needs a table");
    return latency_lookup(*table, g, *query.device);
}

double cost_quantile(const BenchTable& table, const CostQuery& query, const MacroSkeleton& skel,
                     double p) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("cost_quantile: p must lie in (0, 1]");
    std::vector<double> costs;
    costs.reserve(table.size());
    for (std::uint32_t idx = 0; idx < kSpaceSize; ++idx)
        if (table.row_by_index(idx).has_value())
            costs.push_back(cost_of(Genotype::from_index(idx), query, &table, skel));
    if (costs.empty()) throw std::invalid_argument("cost_quantile: empty table");
    std::sort(costs.begin(), costs.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(costs.size())));
    return costs[rank == 0 ? 0 : rank - 1];
}

double feasible_fraction(const BenchTable& table, const Constraint& constraint,
                         const MacroSkeleton& skel) {
    constraint.validate();
    std::uint64_t feasible = 0;
    std::uint64_t present = 0;
    for (std::uint32_t idx = 0; idx < kSpaceSize; ++idx) {
        if (!table.row_by_index(idx).has_value()) continue;
        ++present;
        if (cost_of(Genotype::from_index(idx), constraint.query, &table, skel) <= constraint.omega)
            ++feasible;
    }
    if (present == 0) throw std::invalid_argument("feasible_fraction: empty table");
    return static_cast<double>(feasible) / static_cast<double>(present);
}

namespace {

struct OracleCandidate {
    std::uint32_t idx = 0;
    double accuracy = 0.0;
    double cost = 0.0;
    bool valid = false;
};

bool oracle_better(const OracleCandidate& a, const OracleCandidate& b) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return arch_str_less(Genotype::from_index(a.idx), Genotype::from_index(b.idx));
}

OracleCandidate scan_range(const BenchTable& table, const Constraint& constraint, Dataset ds,
                           const MacroSkeleton& skel, std::uint32_t lo, std::uint32_t hi,
                           std::uint64_t& feasible) {
    OracleCandidate best;
    for (std::uint32_t idx = lo; idx < hi; ++idx) {
        if (!table.row_by_index(idx).has_value()) continue;
        const Genotype g = Genotype::from_index(idx);
        const double cost = cost_of(g, constraint.query, &table, skel);
        if (cost > constraint.omega) continue;
        ++feasible;
        OracleCandidate cand{idx, table.accuracy(g, ds), cost, true};
        if (oracle_better(cand, best)) best = cand;
    }
    return best;
}

}  // namespace

OracleResult exhaustive_best(const BenchTable& table, const Constraint& constraint, Dataset ds,
                             const MacroSkeleton& skel, Exec exec) {
    constraint.validate();
    OracleCandidate best;
    std::uint64_t feasible = 0;

    if (exec == Exec::parallel) {
#ifdef _OPENMP
        const int num_chunks = std::max(1, omp_get_max_threads());
#else
        const int num_chunks = 1;
#endif
        std::vector<OracleCandidate> chunk_best(num_chunks);
        std::vector<std::uint64_t> chunk_feasible(num_chunks, 0);
        const std::uint32_t chunk = (kSpaceSize + num_chunks - 1) / num_chunks;
#ifdef _OPENMP
#pragma omp parallel for schedule(static, 1)
#endif
        for (int c = 0; c < num_chunks; ++c) {
            const std::uint32_t lo = static_cast<std::uint32_t>(c) * chunk;
            const std::uint32_t hi = std::min<std::uint32_t>(lo + chunk, kSpaceSize);
            chunk_best[c] = scan_range(table, constraint, ds, skel, lo, hi, chunk_feasible[c]);
        }
        // Ordered merge under a total order: result independent of scheduling.
        for (int c = 0; c < num_chunks; ++c) {
            feasible += chunk_feasible[c];
            if (oracle_better(chunk_best[c], best)) best = chunk_best[c];
        }
    } else {
        best = scan_range(table, constraint, ds, skel, 0, kSpaceSize, feasible);
    }

    if (!best.valid)
        throw LookupError("exhaustive_best: no feasible architecture under omega " +
                          std::to_string(constraint.omega));
    return OracleResult{Genotype::from_index(best.idx), best.accuracy, best.cost, feasible};
}

std::vector<Genotype> oracle_top_k(const BenchTable& table, const Constraint& constraint,
                                   Dataset ds, const MacroSkeleton& skel, std::size_t k) {
    constraint.validate();
    std::vector<std::pair<double, std::uint32_t>> feasible;
    for (std::uint32_t idx = 0; idx < kSpaceSize; ++idx) {
        if (!table.row_by_index(idx).has_value()) continue;
        const Genotype g = Genotype::from_index(idx);
        if (cost_of(g, constraint.query, &table, skel) > constraint.omega) continue;
        feasible.emplace_back(table.accuracy(g, ds), idx);
    }
    std::sort(feasible.begin(), feasible.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return arch_str_less(Genotype::from_index(a.second), Genotype::from_index(b.second));
    });
    if (feasible.size() > k) feasible.resize(k);
    std::vector<Genotype> top;
    top.reserve(feasible.size());
    for (const auto& [acc, idx] : feasible) top.push_back(Genotype::from_index(idx));
    return top;
}

RunResult run_from_config(const SearchConfig& cfg, const BenchTable* table, Exec exec) {
    const auto start = std::chrono::steady_clock::now();
    EvalContext ctx = make_context(cfg, table);
    SearchResult search = run_search(cfg, ctx, exec);
    const auto stop = std::chrono::steady_clock::now();

    RunResult result;
    result.config = cfg;
    result.best = search.best;
    result.history = std::move(search.history);
    result.duration_s = std::chrono::duration<double>(stop - start).count();
    return result;
}

SweepResult run_sweep(const SweepSpec& spec, const SearchConfig& tmpl, const BenchTable& table,
                      Exec exec) {
    if (spec.omegas.empty()) throw std::invalid_argument("run_sweep: empty constraint grid");
    if (spec.num_seeds < 1) throw std::invalid_argument("run_sweep: num_seeds must be >= 1");
    if (spec.metric == CostMetric::latency && spec.devices.empty())
        throw std::invalid_argument("run_sweep: latency sweep needs at least one device");

    std::vector<CostQuery> queries;
    if (spec.metric == CostMetric::macs) {
        queries.push_back(CostQuery::macs());
    } else {
        for (DeviceId d : spec.devices) queries.push_back(CostQuery::latency(d));
    }

    const MacroSkeleton skel{};  // engine default
    SweepResult out;
    for (const CostQuery& query : queries) {
        for (double omega : spec.omegas) {
            SweepCellSummary cell;
            cell.query = query;
            cell.omega = omega;
            cell.runs = spec.num_seeds;

            std::vector<Genotype> discovered;
            std::vector<double> accuracies;
            std::vector<double> costs;
            for (int s = 0; s < spec.num_seeds; ++s) {
                SearchConfig cfg = tmpl;
                cfg.constraint = Constraint{omega, query};
                cfg.seed = tmpl.seed + static_cast<std::uint64_t>(s);
                try {
                    RunResult run = run_from_config(cfg, &table, exec);
                    discovered.push_back(run.best.genotype);
                    accuracies.push_back(table.accuracy(run.best.genotype, tmpl.dataset));
                    costs.push_back(run.best.cost.value);
                    out.runs.push_back(std::move(run));
                } catch (const std::exception& e) {
                    cell.errors.emplace_back("seed " + std::to_string(cfg.seed) + ": " + e.what());
                }
            }

            cell.mean_latency_ms.fill(std::nan(""));
            if (!accuracies.empty()) {
                double sum = 0.0, sum_sq = 0.0, cost_sum = 0.0;
                for (double a : accuracies) {
                    sum += a;
                    sum_sq += a * a;
                }
                for (double c : costs) cost_sum += c;
                const double n = static_cast<double>(accuracies.size());
                cell.mean_accuracy = sum / n;
                const double var = std::max(0.0, sum_sq / n - cell.mean_accuracy * cell.mean_accuracy);
                cell.std_accuracy = std::sqrt(var);
                cell.mean_cost = cost_sum / n;
                cell.discovered_ops = op_distribution(discovered);
                for (int d = 0; d < kNumDevices; ++d) {
                    double lat_sum = 0.0;
                    std::size_t lat_n = 0;
                    for (const Genotype& g : discovered) {
                        const double lat = table.at(g).latency_ms[d];
                        if (std::isnan(lat)) continue;
                        lat_sum += lat;
                        ++lat_n;
                    }
                    if (lat_n > 0) cell.mean_latency_ms[d] = lat_sum / static_cast<double>(lat_n);
                }
            }

            try {
                Constraint constraint{omega, query};
                cell.oracle = exhaustive_best(table, constraint, tmpl.dataset, skel, exec);
                auto top10 = oracle_top_k(table, constraint, tmpl.dataset, skel, 10);
                if (!top10.empty()) cell.oracle_top10_ops = op_distribution(top10);
            } catch (const std::exception& e) {
                cell.errors.emplace_back(std::string("oracle: ") + e.what());
            }
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

std::vector<AblationRow> rejection_vs_penalty_experiment(
    const std::vector<double>& omegas, const CostQuery& query, const BenchTable* table,
    const MacroSkeleton& skel, std::size_t size, int runs, std::uint64_t seed,
    std::size_t max_attempts) {
    if (omegas.empty()) throw std::invalid_argument("ablation: empty constraint list");
    if (runs < 1) throw std::invalid_argument("ablation: runs must be >= 1");
    query.validate();
    if (query.metric == CostMetric::latency && table == nullptr)
        throw std::invalid_argument("ablation: latency constraints need a table");

    CostFn cost_fn = [&](const Genotype& g) { return cost_of(g, query, table, skel); };

    std::vector<AblationRow> rows;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        AblationRow row;
        row.omega = omegas[i];
        row.penalty_samples = static_cast<double>(size);
        Constraint constraint{omegas[i], query};
        if (table != nullptr) row.feasible_frac = feasible_fraction(*table, constraint, skel);

        double total = 0.0;
        for (int r = 0; r < runs && !row.halted; ++r) {
            Rng rng(derive_seed(seed, i, static_cast<std::uint64_t>(r)));
            try {
                total += static_cast<double>(
                    rejection_sample_population(constraint, cost_fn, size, rng, max_attempts)
                        .samples_drawn);
            } catch (const HaltingError&) {
                row.halted = true;
            }
        }
        row.rejection_mean_samples =
            row.halted ? std::nan("") : total / static_cast<double>(runs);
        rows.push_back(row);
    }
    return rows;
}

// --- results serialization ------------------------------------------------

namespace {

ordered_json encode_omega(double omega) {
    if (std::isinf(omega)) return "inf";
    return omega;
}

double decode_omega(const ordered_json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw std::runtime_error("results: bad omega encoding '" + j.get<std::string>() + "'");
    }
    return j.get<double>();
}

ordered_json query_to_json(const CostQuery& q) {
    ordered_json j;
    j["metric"] = cost_metric_name(q.metric);
    j["device"] = q.device.has_value() ? ordered_json(device_name(*q.device)) : ordered_json();
    return j;
}

CostQuery query_from_json(const ordered_json& j) {
    CostQuery q;
    q.metric = cost_metric_from_name(j.at("metric").get<std::string>());
    if (!j.at("device").is_null())
        q.device = device_from_name(j.at("device").get<std::string>());
    return q;
}

ordered_json record_to_json(const FitnessRecord& r) {
    ordered_json j;
    j["arch"] = format_arch_str(r.genotype);
    j["phi"] = r.phi;
    j["cost"] = r.cost.value;
    j["cost_query"] = query_to_json(r.cost.query);
    j["psi"] = r.psi;
    j["fitness"] = r.fitness;
    return j;
}

FitnessRecord record_from_json(const ordered_json& j) {
    FitnessRecord r;
    r.genotype = parse_arch_str(j.at("arch").get<std::string>());
    r.phi = j.at("phi").get<double>();
    r.cost.value = j.at("cost").get<double>();
    r.cost.query = query_from_json(j.at("cost_query"));
    r.psi = j.at("psi").get<double>();
    r.fitness = j.at("fitness").get<double>();
    return r;
}

ordered_json config_to_json(const SearchConfig& c) {
    ordered_json j;
    j["n_gen"] = c.n_gen;
    j["n_pop"] = c.n_pop;
    j["n_train"] = c.n_train;
    j["beta"] = c.beta;
    j["mutation_rate"] = c.mutation_rate;
    j["elitism"] = c.elitism;
    j["tournament"] = c.tournament;
    j["omega"] = encode_omega(c.constraint.omega);
    j["cost_query"] = query_to_json(c.constraint.query);
    j["estimator"] = estimator_name(c.estimator);
    j["dataset"] = dataset_name(c.dataset);
    j["seed"] = c.seed;
    j["step_size"] = c.step_size;
    j["reference_arch"] = c.reference_arch;
    return j;
}

SearchConfig config_from_json(const ordered_json& j) {
    SearchConfig c;
    c.n_gen = j.at("n_gen").get<int>();
    c.n_pop = j.at("n_pop").get<int>();
    c.n_train = j.at("n_train").get<int>();
    c.beta = j.at("beta").get<double>();
    c.mutation_rate = j.at("mutation_rate").get<double>();
    c.elitism = j.at("elitism").get<int>();
    c.tournament = j.at("tournament").get<int>();
    c.constraint.omega = decode_omega(j.at("omega"));
    c.constraint.query = query_from_json(j.at("cost_query"));
    c.estimator = estimator_from_name(j.at("estimator").get<std::string>());
    c.dataset = dataset_from_name(j.at("dataset").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.step_size = j.at("step_size").get<double>();
    c.reference_arch = j.at("reference_arch").get<std::string>();
    return c;
}

ordered_json history_to_json(const SearchHistory& h) {
    ordered_json j;
    j["total_samples"] = h.total_samples;
    j["total_evals"] = h.total_evals;
    ordered_json gens = ordered_json::array();
    for (const GenerationStats& g : h.generations) {
        ordered_json jg;
        jg["generation"] = g.generation;
        jg["best"] = record_to_json(g.best);
        jg["mean_fitness"] = g.mean_fitness;
        jg["cumulative_evals"] = g.cumulative_evals;
        gens.push_back(std::move(jg));
    }
    j["generations"] = std::move(gens);
    return j;
}

SearchHistory history_from_json(const ordered_json& j) {
    SearchHistory h;
    h.total_samples = j.at("total_samples").get<std::uint64_t>();
    h.total_evals = j.at("total_evals").get<std::uint64_t>();
    for (const auto& jg : j.at("generations")) {
        GenerationStats g;
        g.generation = jg.at("generation").get<int>();
        g.best = record_from_json(jg.at("best"));
        g.mean_fitness = jg.at("mean_fitness").get<double>();
        g.cumulative_evals = jg.at("cumulative_evals").get<std::uint64_t>();
        h.generations.push_back(std::move(g));
    }
    return h;
}

ordered_json run_result_to_json(const RunResult& r) {
    ordered_json j;
    j["config"] = config_to_json(r.config);
    j["best"] = record_to_json(r.best);
    j["history"] = history_to_json(r.history);
    j["duration_s"] = r.duration_s;
    return j;
}

RunResult run_result_from_json(const ordered_json& j) {
    RunResult r;
    r.config = config_from_json(j.at("config"));
    r.best = record_from_json(j.at("best"));
    r.history = history_from_json(j.at("history"));
    r.duration_s = j.at("duration_s").get<double>();
    return r;
}

}  // namespace

bool RunResult::equivalent(const RunResult& other) const {
    ordered_json a = run_result_to_json(*this);
    ordered_json b = run_result_to_json(other);
    a.erase("duration_s");
    b.erase("duration_s");
    return a == b;
}

std::string run_result_to_line(const RunResult& r) { return run_result_to_json(r).dump(); }

RunResult run_result_from_line(const std::string& line) {
    return run_result_from_json(ordered_json::parse(line));
}

void write_results(const std::vector<RunResult>& results, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (const RunResult& r : results) out << run_result_to_line(r) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<RunResult> read_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file '" + path + "'");
    std::vector<RunResult> results;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        results.push_back(run_result_from_line(line));
    }
    return results;
}

}  // namespace hwnas
