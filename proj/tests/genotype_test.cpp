#include <doctest.h>

#include <set>
#include <unordered_set>

#include "hwnas/errors.hpp"
#include "hwnas/genotype.hpp"

using namespace hwnas;

TEST_SUITE_BEGIN("genotype");

TEST_CASE("operation names round-trip") {
    for (int i = 0; i < kNumOperations; ++i) {
        auto op = static_cast<Operation>(i);
        CHECK(op_from_name(op_name(op)) == op);
    }
    CHECK_THROWS_AS(op_from_name("max_pool_3x3"), ParseError);
}

TEST_CASE("gene order follows the cell edges") {
    const int sources[kNumGenes] = {0, 0, 1, 0, 1, 2};
    const int targets[kNumGenes] = {1, 2, 2, 3, 3, 3};
    for (int i = 0; i < kNumGenes; ++i) {
        CHECK(edge_source(i) == sources[i]);
        CHECK(edge_target(i) == targets[i]);
    }
}

TEST_CASE("parse: all-none and single substitution") {
    Genotype g = parse_arch_str("|none~0|+|none~0|none~1|+|none~0|none~1|none~2|");
    for (auto gene : g.genes) CHECK(gene == Operation::none);

    Genotype h = parse_arch_str("|nor_conv_3x3~0|+|none~0|none~1|+|none~0|none~1|none~2|");
    CHECK(h.genes[0] == Operation::nor_conv_3x3);
    for (int i = 1; i < kNumGenes; ++i) CHECK(h.genes[i] == Operation::none);
}

TEST_CASE("format: positional mapping") {
    Genotype g;
    CHECK(format_arch_str(g) == "|none~0|+|none~0|none~1|+|none~0|none~1|none~2|");

    g.genes = {Operation::nor_conv_3x3, Operation::skip_connect, Operation::nor_conv_1x1,
               Operation::none, Operation::avg_pool_3x3, Operation::skip_connect};
    CHECK(format_arch_str(g) ==
          "|nor_conv_3x3~0|+|skip_connect~0|nor_conv_1x1~1|+"
          "|none~0|avg_pool_3x3~1|skip_connect~2|");
}

TEST_CASE("round-trip over the whole space") {
    // Exhaustive oracle: every enumerated genotype survives format+parse,
    // and the formatted strings are pairwise distinct.
    auto space = enumerate_space();
    std::unordered_set<std::string> seen;
    for (const Genotype& g : space) {
        std::string s = format_arch_str(g);
        CHECK(parse_arch_str(s) == g);
        seen.insert(std::move(s));
    }
    CHECK(seen.size() == kSpaceSize);
}

TEST_CASE("format(parse(s)) == s on random strings") {
    Rng rng(21);
    for (int i = 0; i < 1000; ++i) {
        Genotype g = random_genotype(rng);
        std::string s = format_arch_str(g);
        CHECK(format_arch_str(parse_arch_str(s)) == s);
    }
}

TEST_CASE("parse errors name the offending token") {
    CHECK_THROWS_AS(parse_arch_str("nonsense"), ParseError);
    CHECK_THROWS_AS(parse_arch_str("|none~0|+|none~0|none~1|"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse_arch_str("|wat~0|+|none~0|none~1|+|none~0|none~1|none~2|"),
        "unknown operation name 'wat' at gene position 0", ParseError);
    CHECK_THROWS_WITH_AS(
        parse_arch_str("|none~0|+|none~0|none~0|+|none~0|none~1|none~2|"),
        "token 'none~0' at gene position 2 has input index '0', expected '1'", ParseError);
    CHECK_THROWS_AS(parse_arch_str("|none~0|+|none~0|none~1|+|none~0|none~1|none|"), ParseError);
}

TEST_CASE("random_genotype is deterministic per seed") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 50; ++i) CHECK(random_genotype(a) == random_genotype(b));
}

TEST_CASE("all randomized operators are pure in (inputs, rng state)") {
    Rng a(555), b(555);
    for (int i = 0; i < 200; ++i) {
        Genotype p1 = random_genotype(a), p1b = random_genotype(b);
        Genotype p2 = random_genotype(a), p2b = random_genotype(b);
        CHECK(crossover(p1, p2, a) == crossover(p1b, p2b, b));
        CHECK(mutate(p1, 0.4, a) == mutate(p1b, 0.4, b));
    }
}

TEST_CASE("random_genotype marginals are uniform") {
    Rng rng(9);
    const int draws = 100000;
    int counts[kNumGenes][kNumOperations] = {};
    for (int i = 0; i < draws; ++i) {
        Genotype g = random_genotype(rng);
        for (int p = 0; p < kNumGenes; ++p) ++counts[p][static_cast<int>(g.genes[p])];
    }
    for (int p = 0; p < kNumGenes; ++p)
        for (int o = 0; o < kNumOperations; ++o) {
            double freq = static_cast<double>(counts[p][o]) / draws;
            CHECK(freq == doctest::Approx(0.2).epsilon(0.05));  // 0.2 +/- 0.01
        }
}

TEST_CASE("random_genotype covers the space within 1e6 draws") {
    Rng rng(5);
    std::vector<bool> seen(kSpaceSize, false);
    std::uint32_t distinct = 0;
    for (int i = 0; i < 1000000 && distinct < kSpaceSize; ++i) {
        auto idx = random_genotype(rng).index();
        if (!seen[idx]) {
            seen[idx] = true;
            ++distinct;
        }
    }
    CHECK(distinct == kSpaceSize);
}

TEST_CASE("crossover of identical parents is the identity") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        Genotype g = random_genotype(rng);
        CHECK(crossover(g, g, rng) == g);
    }
}

TEST_CASE("crossover closure: child genes come from the parents") {
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
        Genotype a = random_genotype(rng), b = random_genotype(rng);
        Genotype c = crossover(a, b, rng);
        for (int p = 0; p < kNumGenes; ++p)
            CHECK((c.genes[p] == a.genes[p] || c.genes[p] == b.genes[p]));
    }
}

TEST_CASE("crossover picks each parent with probability 1/2") {
    Genotype zeros;  // all none
    Genotype fours;
    fours.genes.fill(Operation::avg_pool_3x3);
    Rng rng(6);
    int from_a[kNumGenes] = {};
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        Genotype c = crossover(zeros, fours, rng);
        for (int p = 0; p < kNumGenes; ++p) from_a[p] += (c.genes[p] == Operation::none);
    }
    for (int p = 0; p < kNumGenes; ++p) {
        double freq = static_cast<double>(from_a[p]) / trials;
        CHECK(freq > 0.48);
        CHECK(freq < 0.52);
    }
}

TEST_CASE("mutate rate endpoints") {
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        Genotype g = random_genotype(rng);
        CHECK(mutate(g, 0.0, rng) == g);
        Genotype m = mutate(g, 1.0, rng);
        for (int p = 0; p < kNumGenes; ++p) CHECK(m.genes[p] != g.genes[p]);
    }
    Genotype g;
    CHECK_THROWS_AS(mutate(g, -0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(mutate(g, 1.5, rng), std::invalid_argument);
}

TEST_CASE("mutate expected Hamming distance is 6*rate") {
    Rng rng(10);
    const int trials = 10000;
    long total = 0;
    for (int i = 0; i < trials; ++i) {
        Genotype g = random_genotype(rng);
        Genotype m = mutate(g, 1.0 / 6.0, rng);
        for (int p = 0; p < kNumGenes; ++p) total += (m.genes[p] != g.genes[p]);
    }
    double mean = static_cast<double>(total) / trials;
    CHECK(mean > 0.95);
    CHECK(mean < 1.05);
}

TEST_CASE("enumerate_space: count, endpoints, no duplicates") {
    auto space = enumerate_space();
    REQUIRE(space.size() == 15625);
    for (auto gene : space.front().genes) CHECK(gene == Operation::none);
    for (auto gene : space.back().genes) CHECK(gene == Operation::avg_pool_3x3);

    std::set<std::uint32_t> indices;
    for (const Genotype& g : space) indices.insert(g.index());
    CHECK(indices.size() == space.size());
    // Lexicographic gene order == index order.
    for (std::size_t i = 1; i < space.size(); ++i)
        CHECK(space[i - 1].index() < space[i].index());
}

TEST_SUITE_END();
