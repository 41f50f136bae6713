#include "hwnas/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>

#include "hwnas/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hwnas {

namespace {

constexpr std::uint64_t kBatchStream = 0xBA7C4;
constexpr std::uint64_t kTargetStream = 0x7A26E7;
constexpr std::uint64_t kSurrogateStream = 0x5126;

Genotype default_reference() {
    Genotype g;
    g.genes.fill(Operation::nor_conv_3x3);
    return g;
}

// Within-run ordering: fitness first, canonical-string order on ties.
bool record_better(const FitnessRecord& a, const FitnessRecord& b) {
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    return arch_str_less(a.genotype, b.genotype);
}

// Ordering for the returned best: a feasible individual always beats an
// infeasible one. The penalty makes infeasible fitness smaller than the
// individual's own score, but a marginally-infeasible candidate can still
// out-score every feasible one, so feasibility has to be ranked explicitly
// for the final answer to respect the budget.
bool returned_best_better(const FitnessRecord& a, const FitnessRecord& b) {
    const bool fa = a.psi == 0.0;
    const bool fb = b.psi == 0.0;
    if (fa != fb) return fa;
    return record_better(a, b);
}

std::size_t tournament_pick(const std::vector<FitnessRecord>& records, int size, Rng& rng) {
    std::size_t best = rng.below(records.size());
    for (int t = 1; t < size; ++t) {
        std::size_t contender = rng.below(records.size());
        if (record_better(records[contender], records[best])) best = contender;
    }
    return best;
}

}  // namespace

const char* estimator_name(EstimatorKind k) {
    return k == EstimatorKind::rmi_surrogate ? "rmi" : "tabular";
}

EstimatorKind estimator_from_name(const std::string& name) {
    if (name == "rmi") return EstimatorKind::rmi_surrogate;
    if (name == "tabular") return EstimatorKind::tabular_accuracy;
    throw ParseError("unknown estimator '" + name + "'");
}

void SearchConfig::validate() const {
    if (n_gen < 0) throw std::invalid_argument("SearchConfig: n_gen must be >= 0");
    if (n_pop < 2) throw std::invalid_argument("SearchConfig: n_pop must be >= 2");
    if (n_train < 0) throw std::invalid_argument("SearchConfig: n_train must be >= 0");
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("SearchConfig: beta must lie in [0, 1]");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
        throw std::invalid_argument("SearchConfig: mutation_rate must lie in [0, 1]");
    if (elitism < 0 || elitism >= n_pop)
        throw std::invalid_argument("SearchConfig: elitism must lie in [0, n_pop)");
    if (tournament < 1) throw std::invalid_argument("SearchConfig: tournament must be >= 1");
    if (step_size <= 0.0) throw std::invalid_argument("SearchConfig: step_size must be positive");
    constraint.validate();
    if (!reference_arch.empty()) parse_arch_str(reference_arch);
}

EvalContext make_context(const SearchConfig& cfg, const BenchTable* table) {
    cfg.validate();
    EvalContext ctx;
    ctx.table = table;
    ctx.surrogate_seed = derive_seed(cfg.seed, kSurrogateStream);

    ctx.batch = Matrix(kBatchRows, kFeatureWidth);
    Rng batch_rng(derive_seed(cfg.seed, kBatchStream));
    for (std::size_t i = 0; i < ctx.batch.size(); ++i) ctx.batch.data()[i] = batch_rng.normal();

    ctx.targets = Matrix(kBatchRows, kFeatureWidth);
    Rng target_rng(derive_seed(cfg.seed, kTargetStream));
    for (std::size_t i = 0; i < ctx.targets.size(); ++i) ctx.targets.data()[i] = target_rng.normal();

    const Genotype ref =
        cfg.reference_arch.empty() ? default_reference() : parse_arch_str(cfg.reference_arch);
    ctx.reference.stack = synth_forward(ref, ctx.batch, ctx.surrogate_seed);
    ctx.reference.descriptor = format_arch_str(ref);
    return ctx;
}

FitnessRecord evaluate_fitness(const Genotype& g, const SearchConfig& cfg,
                               const EvalContext& ctx) {
    FitnessRecord rec;
    rec.genotype = g;

    if (cfg.estimator == EstimatorKind::tabular_accuracy) {
        if (ctx.table == nullptr)
            throw std::invalid_argument("evaluate_fitness: tabular estimator needs a table");
        rec.phi = tabular_accuracy(*ctx.table, g, cfg.dataset) / 100.0;
    } else {
        SurrogateNet net = SurrogateNet::from_genotype(g, ctx.batch.cols(), kFeatureWidth,
                                                       ctx.surrogate_seed);
        TrainSettings settings;
        settings.epochs = cfg.n_train;
        settings.beta = cfg.beta;
        settings.step_size = cfg.step_size;
        settings.batch = ctx.batch;
        settings.targets = ctx.targets;
        try {
            rec.phi = train_single_batch(net, ctx.reference, settings).final_score;
        } catch (const DivergenceError& e) {
            throw DivergenceError(e.epoch, std::string(e.what()) + " for architecture '" +
                                               format_arch_str(g) + "'");
        }
    }

    rec.cost.query = cfg.constraint.query;
    if (cfg.constraint.query.metric == CostMetric::macs) {
        rec.cost.value = macs_estimate(g, ctx.skeleton);
    } else {
        if (ctx.table == nullptr)
            throw std::invalid_argument("evaluate_fitness: latency constraint needs a table");
        rec.cost.value = latency_lookup(*ctx.table, g, *cfg.constraint.query.device);
    }
    rec.psi = penalty(rec.cost, cfg.constraint);
    rec.fitness = rec.phi + rec.psi;
    return rec;
}

std::vector<Genotype> init_population(const SearchConfig& cfg, Rng& rng) {
    std::vector<Genotype> pop;
    pop.reserve(cfg.n_pop);
    for (int i = 0; i < cfg.n_pop; ++i) pop.push_back(random_genotype(rng));
    return pop;
}

std::vector<Genotype> evolve_generation(const std::vector<Genotype>& pop,
                                        const std::vector<FitnessRecord>& records,
                                        const SearchConfig& cfg, Rng& rng) {
    if (pop.size() != records.size() || pop.empty())
        throw std::invalid_argument("evolve_generation: every individual needs a record");

    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return record_better(records[a], records[b]);
    });

    std::vector<Genotype> next;
    next.reserve(pop.size());
    for (int e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);
    while (next.size() < pop.size()) {
        const Genotype& a = pop[tournament_pick(records, cfg.tournament, rng)];
        const Genotype& b = pop[tournament_pick(records, cfg.tournament, rng)];
        next.push_back(mutate(crossover(a, b, rng), cfg.mutation_rate, rng));
    }
    return next;
}

std::vector<FitnessRecord> evaluate_population(const std::vector<Genotype>& pop,
                                               const SearchConfig& cfg, const EvalContext& ctx,
                                               FitnessMemo& memo, Exec exec) {
    // Gather cache misses once, preserving first-seen order so the memo's
    // contents do not depend on the execution mode.
    std::vector<Genotype> missing;
    for (const Genotype& g : pop)
        if (memo.find(g.index()) == memo.end() &&
            std::none_of(missing.begin(), missing.end(),
                         [&](const Genotype& m) { return m == g; }))
            missing.push_back(g);

    std::vector<FitnessRecord> fresh(missing.size());
    if (exec == Exec::parallel) {
        std::vector<std::exception_ptr> errors(missing.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (std::size_t i = 0; i < missing.size(); ++i) {
            try {
                fresh[i] = evaluate_fitness(missing[i], cfg, ctx);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    } else {
        for (std::size_t i = 0; i < missing.size(); ++i)
            fresh[i] = evaluate_fitness(missing[i], cfg, ctx);
    }
    for (std::size_t i = 0; i < missing.size(); ++i) memo.emplace(missing[i].index(), fresh[i]);

    std::vector<FitnessRecord> records;
    records.reserve(pop.size());
    for (const Genotype& g : pop) records.push_back(memo.at(g.index()));
    return records;
}

SearchResult run_search(const SearchConfig& cfg, const EvalContext& ctx, Exec exec) {
    cfg.validate();

    Rng master(cfg.seed);
    FitnessMemo memo;
    SearchResult result;
    SearchHistory& history = result.history;

    std::vector<Genotype> pop = init_population(cfg, master);
    history.total_samples += pop.size();

    bool have_best = false;
    auto record_generation = [&](int generation, const std::vector<FitnessRecord>& records) {
        history.total_evals += records.size();
        GenerationStats stats;
        stats.generation = generation;
        stats.cumulative_evals = history.total_evals;
        stats.best = records.front();
        double sum = 0.0;
        for (const FitnessRecord& r : records) {
            sum += r.fitness;
            if (record_better(r, stats.best)) stats.best = r;
            if (!have_best || returned_best_better(r, result.best)) {
                result.best = r;
                have_best = true;
            }
        }
        stats.mean_fitness = sum / static_cast<double>(records.size());
        history.generations.push_back(std::move(stats));
    };

    std::vector<FitnessRecord> records = evaluate_population(pop, cfg, ctx, memo, exec);
    record_generation(0, records);

    for (int g = 1; g <= cfg.n_gen; ++g) {
        pop = evolve_generation(pop, records, cfg, master);
        history.total_samples += pop.size() - static_cast<std::size_t>(cfg.elitism);
        records = evaluate_population(pop, cfg, ctx, memo, exec);
        record_generation(g, records);
    }
    return result;
}

}  // namespace hwnas
