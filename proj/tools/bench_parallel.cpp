// Timing comparison between the serial reference paths and their OpenMP
// counterparts: synthetic table generation, the exhaustive table scan, and
// population evaluation with the surrogate estimator. Both paths must agree
// exactly; the tests assert it, this target measures it.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "hwnas/engine.hpp"
#include "hwnas/harness.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace hwnas;
using clock_type = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn) {
    const auto start = clock_type::now();
    fn();
    return std::chrono::duration<double, std::milli>(clock_type::now() - start).count();
}

void report(const char* name, double serial_ms, double parallel_ms, bool match) {
    std::printf("%-28s serial %9.1f ms   parallel %9.1f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms, match ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const int pop_size = argc > 1 ? std::atoi(argv[1]) : 128;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    // Synthetic table generation over the full space.
    BenchTable table_serial, table_parallel;
    const double gen_s = time_ms([&] { table_serial = gen_bench_table(7, {}, Exec::serial); });
    const double gen_p = time_ms([&] { table_parallel = gen_bench_table(7, {}, Exec::parallel); });
    bool gen_match = true;
    for (std::uint32_t i = 0; i < kSpaceSize && gen_match; ++i)
        gen_match = table_serial.row_by_index(i) == table_parallel.row_by_index(i);
    report("gen_bench_table", gen_s, gen_p, gen_match);

    // Exhaustive constrained scan.
    const Constraint constraint{cost_quantile(table_serial, CostQuery::latency(DeviceId::edgegpu),
                                              {}, 0.5),
                                CostQuery::latency(DeviceId::edgegpu)};
    OracleResult oracle_serial, oracle_parallel;
    const double scan_s = time_ms([&] {
        oracle_serial = exhaustive_best(table_serial, constraint, Dataset::cifar10, {}, Exec::serial);
    });
    const double scan_p = time_ms([&] {
        oracle_parallel =
            exhaustive_best(table_serial, constraint, Dataset::cifar10, {}, Exec::parallel);
    });
    report("exhaustive_best", scan_s, scan_p,
           oracle_serial.best == oracle_parallel.best &&
               oracle_serial.feasible_count == oracle_parallel.feasible_count);

    // Population evaluation with the surrogate estimator (the per-generation
    // hot loop of a search run).
    SearchConfig cfg;
    cfg.estimator = EstimatorKind::rmi_surrogate;
    cfg.n_train = 25;
    cfg.n_pop = pop_size;
    cfg.seed = 11;
    EvalContext ctx = make_context(cfg, nullptr);
    Rng rng(cfg.seed);
    std::vector<Genotype> pop;
    for (int i = 0; i < pop_size; ++i) pop.push_back(random_genotype(rng));

    std::vector<FitnessRecord> rec_serial, rec_parallel;
    const double eval_s = time_ms([&] {
        FitnessMemo memo;
        rec_serial = evaluate_population(pop, cfg, ctx, memo, Exec::serial);
    });
    const double eval_p = time_ms([&] {
        FitnessMemo memo;
        rec_parallel = evaluate_population(pop, cfg, ctx, memo, Exec::parallel);
    });
    bool eval_match = rec_serial.size() == rec_parallel.size();
    for (std::size_t i = 0; i < rec_serial.size() && eval_match; ++i)
        eval_match = rec_serial[i].fitness == rec_parallel[i].fitness &&
                     rec_serial[i].genotype == rec_parallel[i].genotype;
    report("evaluate_population", eval_s, eval_p, eval_match);

    return gen_match && eval_match ? 0 : 1;
}
