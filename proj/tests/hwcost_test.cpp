#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hwnas/errors.hpp"
#include "hwnas/hwcost.hpp"

using namespace hwnas;

namespace {

Genotype with_counts(int conv3, int conv1) {
    Genotype g;
    int i = 0;
    for (; i < conv3; ++i) g.genes[i] = Operation::nor_conv_3x3;
    for (; i < conv3 + conv1; ++i) g.genes[i] = Operation::nor_conv_1x1;
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("hwcost");

TEST_CASE("macs_estimate: all-none genotype costs stem + head only") {
    // Default skeleton: stem 9*3*16*32*32 = 442368, head 64*10 = 640.
    const double base = 0.443008;
    CHECK(macs_estimate(Genotype{}, MacroSkeleton{}) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("macs_estimate: adding a conv gene strictly increases the cost") {
    MacroSkeleton skel;
    Genotype g;
    double prev = macs_estimate(g, skel);
    for (int i = 0; i < kNumGenes; ++i) {
        g.genes[i] = Operation::nor_conv_1x1;
        double now = macs_estimate(g, skel);
        CHECK(now > prev);
        prev = now;
    }
    // Skip, pool and none edges cost nothing.
    Genotype zero_cost;
    zero_cost.genes = {Operation::skip_connect, Operation::avg_pool_3x3, Operation::none,
                       Operation::skip_connect, Operation::avg_pool_3x3, Operation::none};
    CHECK(macs_estimate(zero_cost, skel) == macs_estimate(Genotype{}, skel));
}

TEST_CASE("macs_estimate: equal conv multisets give equal totals") {
    // All edges share a stage resolution, so the estimate may only depend on
    // how many of each conv op appear, not where.
    MacroSkeleton skel;
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        Genotype g = random_genotype(rng);
        Genotype shuffled = g;
        for (int i = kNumGenes - 1; i > 0; --i)
            std::swap(shuffled.genes[i], shuffled.genes[rng.below(i + 1)]);
        CHECK(macs_estimate(g, skel) == macs_estimate(shuffled, skel));
    }
}

TEST_CASE("macs_estimate: conv3x3 edge term is exactly 9x the conv1x1 term") {
    MacroSkeleton skel;
    const double base = macs_estimate(Genotype{}, skel);
    const double all3 = macs_estimate(with_counts(6, 0), skel) - base;
    const double all1 = macs_estimate(with_counts(0, 6), skel) - base;
    CHECK(all3 == doctest::Approx(9.0 * all1).epsilon(1e-12));
}

TEST_CASE("penalty: boundary and substitution values") {
    CHECK(penalty(300.0, 300.0) == 0.0);
    CHECK(penalty(350.0, 300.0) == -50.0);
    CHECK(penalty(299.9, 300.0) == 0.0);
}

TEST_CASE("penalty: piecewise identity over a grid") {
    for (int ci = 1; ci <= 40; ++ci) {
        for (int oi = 1; oi <= 40; ++oi) {
            const double cost = 7.5 * ci;
            const double omega = 7.5 * oi;
            const double psi = penalty(cost, omega);
            if (cost <= omega)
                CHECK(psi == 0.0);
            else
                CHECK(psi == omega - cost);
        }
    }
    // Proportionality: farther past the budget means a larger penalty.
    double prev = penalty(101.0, 100.0);
    for (double cost = 102.0; cost < 120.0; cost += 1.0) {
        const double psi = penalty(cost, 100.0);
        CHECK(std::abs(psi) > std::abs(prev));
        prev = psi;
    }
}

TEST_CASE("penalty: unit tags must match") {
    const Constraint macs_budget{100.0, CostQuery::macs()};
    const CostValue macs_cost{120.0, CostQuery::macs()};
    CHECK(penalty(macs_cost, macs_budget) == -20.0);

    const CostValue latency_cost{120.0, CostQuery::latency(DeviceId::pixel3)};
    CHECK_THROWS_AS(penalty(latency_cost, macs_budget), std::invalid_argument);

    const Constraint pixel{100.0, CostQuery::latency(DeviceId::pixel3)};
    const CostValue raspi{120.0, CostQuery::latency(DeviceId::raspi4)};
    CHECK_THROWS_AS(penalty(raspi, pixel), std::invalid_argument);
}

TEST_CASE("cost query validation") {
    const CostQuery latency_no_device{CostMetric::latency, std::nullopt};
    CHECK_THROWS_AS(latency_no_device.validate(), std::invalid_argument);
    const CostQuery macs_with_device{CostMetric::macs, DeviceId::fpga};
    CHECK_THROWS_AS(macs_with_device.validate(), std::invalid_argument);
    const Constraint zero_budget{0.0, CostQuery::macs()};
    CHECK_THROWS_AS(zero_budget.validate(), std::invalid_argument);
    const Constraint ok{1.0, CostQuery::macs()};
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("latency_lookup: stored values are independent per device") {
    BenchTable table;
    Genotype g0 = parse_arch_str("|none~0|+|none~0|none~1|+|none~0|none~1|none~2|");
    BenchRow row;
    row.accuracy = {90.0, 70.0, 45.0};
    row.macs_m = 1.0;
    row.latency_ms = {4.2, 33.0, 0.9, 7.7, 1.4, 2.2};
    table.insert(g0, row);

    CHECK(latency_lookup(table, g0, DeviceId::edgegpu) == 4.2);
    CHECK(latency_lookup(table, g0, DeviceId::raspi4) == 33.0);

    Genotype missing = Genotype::from_index(1);
    CHECK_THROWS_AS(latency_lookup(table, missing, DeviceId::edgegpu), LookupError);
}

TEST_CASE("latency_lookup: missing device cell") {
    BenchTable table;
    Genotype g0;
    BenchRow row;
    row.macs_m = 1.0;
    row.latency_ms = {4.2, std::nan(""), 0.9, 7.7, 1.4, 2.2};
    table.insert(g0, row);
    CHECK(latency_lookup(table, g0, DeviceId::edgegpu) == 4.2);
    CHECK_THROWS_AS(latency_lookup(table, g0, DeviceId::raspi4), LookupError);
}

TEST_CASE("rejection sampling: nothing rejected under a loose budget") {
    Rng rng(1);
    Constraint loose{1e9, CostQuery::macs()};
    auto cost_fn = [](const Genotype& g) { return macs_estimate(g, MacroSkeleton{}); };
    auto result = rejection_sample_population(loose, cost_fn, 50, rng);
    CHECK(result.kept.size() == 50);
    CHECK(result.samples_drawn == 50);
}

TEST_CASE("rejection sampling: draw count tracks the feasible fraction") {
    MacroSkeleton skel;
    auto cost_fn = [&](const Genotype& g) { return macs_estimate(g, skel); };

    // Feasible set: conv-free genotypes only -> 3^6 / 5^6 of the space.
    const double omega = macs_estimate(Genotype{}, skel);
    const double p = 729.0 / 15625.0;
    Constraint tight{omega, CostQuery::macs()};

    double total = 0.0;
    const int runs = 10;
    const std::size_t size = 50;
    for (int r = 0; r < runs; ++r) {
        Rng rng(derive_seed(77, r));
        auto result = rejection_sample_population(tight, cost_fn, size, rng);
        CHECK(result.kept.size() == size);
        for (const Genotype& g : result.kept) CHECK(cost_fn(g) <= tight.omega);
        total += static_cast<double>(result.samples_drawn);
    }
    const double mean = total / runs;
    const double expected = static_cast<double>(size) / p;
    CHECK(mean > 0.75 * expected);
    CHECK(mean < 1.25 * expected);
}

TEST_CASE("rejection sampling: infeasible budget halts") {
    Rng rng(2);
    // Below the minimum cost in the space (stem + head).
    Constraint impossible{0.01, CostQuery::macs()};
    auto cost_fn = [](const Genotype& g) { return macs_estimate(g, MacroSkeleton{}); };
    CHECK_THROWS_AS(rejection_sample_population(impossible, cost_fn, 5, rng, 2000), HaltingError);
    try {
        Rng rng2(3);
        rejection_sample_population(impossible, cost_fn, 5, rng2, 2000);
    } catch (const HaltingError& e) {
        CHECK(e.attempts == 2000);
    }
}

TEST_SUITE_END();
