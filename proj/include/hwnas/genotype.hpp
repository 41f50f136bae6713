#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hwnas/rng.hpp"

namespace hwnas {

/// Cell operation placed on one edge of the 4-node cell DAG.
enum class Operation : std::uint8_t {
    none = 0,
    skip_connect = 1,
    nor_conv_1x1 = 2,
    nor_conv_3x3 = 3,
    avg_pool_3x3 = 4,
};

inline constexpr int kNumOperations = 5;
inline constexpr int kNumGenes = 6;
inline constexpr int kNumCellNodes = 4;

/// Total number of distinct genotypes: 5^6.
inline constexpr std::uint32_t kSpaceSize = 15625;

const char* op_name(Operation op);
Operation op_from_name(const std::string& name);  // throws ParseError

/// (source, target) node pair for each gene, in canonical gene order.
/// Gene i sits on the edge feeding cell node edge_target(i) from
/// cell node edge_source(i).
int edge_source(int gene);
int edge_target(int gene);

/// Fixed-length encoding of one cell: six operation genes in canonical
/// edge order (1<-0, 2<-0, 2<-1, 3<-0, 3<-1, 3<-2).
struct Genotype {
    std::array<Operation, kNumGenes> genes{};

    bool operator==(const Genotype&) const = default;

    /// Packed index in [0, 15625); gene 0 is the most significant digit,
    /// so index order equals lexicographic gene order.
    std::uint32_t index() const {
        std::uint32_t v = 0;
        for (auto g : genes) v = v * kNumOperations + static_cast<std::uint32_t>(g);
        return v;
    }

    static Genotype from_index(std::uint32_t idx) {
        Genotype g;
        for (int i = kNumGenes - 1; i >= 0; --i) {
            g.genes[i] = static_cast<Operation>(idx % kNumOperations);
            idx /= kNumOperations;
        }
        return g;
    }

    int count_op(Operation op) const {
        int n = 0;
        for (auto g : genes) n += (g == op);
        return n;
    }
};

/// Parse the canonical architecture string
/// "|op~0|+|op~0|op~1|+|op~0|op~1|op~2|". Throws ParseError naming the
/// offending token and position.
Genotype parse_arch_str(const std::string& s);

/// Inverse of parse_arch_str.
std::string format_arch_str(const Genotype& g);

/// Compares canonical architecture strings; the total order used for all
/// tie-breaking so runs are reproducible.
bool arch_str_less(const Genotype& a, const Genotype& b);

/// Each gene drawn independently and uniformly over the five operations.
Genotype random_genotype(Rng& rng);

/// Uniform per-gene crossover: child gene i comes from either parent with
/// probability 1/2.
Genotype crossover(const Genotype& a, const Genotype& b, Rng& rng);

/// Each gene is independently resampled with probability `rate` to a
/// uniformly chosen *different* operation; rate 0 is the identity.
Genotype mutate(const Genotype& g, double rate, Rng& rng);

/// All 15,625 genotypes in lexicographic gene order, each exactly once.
std::vector<Genotype> enumerate_space();

}  // namespace hwnas
