#include "hwnas/genotype.hpp"

#include <stdexcept>

#include "hwnas/errors.hpp"

namespace hwnas {

namespace {

constexpr const char* kOpNames[kNumOperations] = {
    "none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"};

// Source node per gene; targets are 1,2,2,3,3,3.
constexpr int kEdgeSource[kNumGenes] = {0, 0, 1, 0, 1, 2};
constexpr int kEdgeTarget[kNumGenes] = {1, 2, 2, 3, 3, 3};

}  // namespace

const char* op_name(Operation op) { return kOpNames[static_cast<int>(op)]; }

Operation op_from_name(const std::string& name) {
    for (int i = 0; i < kNumOperations; ++i)
        if (name == kOpNames[i]) return static_cast<Operation>(i);
    throw ParseError("unknown operation name '" + name + "'");
}

int edge_source(int gene) { return kEdgeSource[gene]; }
int edge_target(int gene) { return kEdgeTarget[gene]; }

Genotype parse_arch_str(const std::string& s) {
    // Split on '+': one segment per computed cell node, in node order.
    std::vector<std::string> segments;
    std::size_t start = 0;
    while (true) {
        std::size_t plus = s.find('+', start);
        if (plus == std::string::npos) {
            segments.push_back(s.substr(start));
            break;
        }
        segments.push_back(s.substr(start, plus - start));
        start = plus + 1;
    }
    if (segments.size() != kNumCellNodes - 1)
        throw ParseError("expected 3 '+'-separated node groups, got " +
                         std::to_string(segments.size()) + " in '" + s + "'");

    Genotype g;
    int gene = 0;
    for (std::size_t node = 0; node < segments.size(); ++node) {
        const std::string& seg = segments[node];
        if (seg.size() < 2 || seg.front() != '|' || seg.back() != '|')
            throw ParseError("node group " + std::to_string(node + 1) +
                             " is not '|'-delimited: '" + seg + "'");
        // Tokens between the bars: "op~k" with k the input node index.
        std::vector<std::string> tokens;
        std::size_t pos = 1;
        while (pos < seg.size()) {
            std::size_t bar = seg.find('|', pos);
            if (bar == std::string::npos)
                throw ParseError("unterminated token in node group " +
                                 std::to_string(node + 1) + ": '" + seg + "'");
            tokens.push_back(seg.substr(pos, bar - pos));
            pos = bar + 1;
        }
        if (tokens.size() != node + 1)
            throw ParseError("node group " + std::to_string(node + 1) + " has " +
                             std::to_string(tokens.size()) + " operations, expected " +
                             std::to_string(node + 1));
        for (std::size_t input = 0; input < tokens.size(); ++input) {
            const std::string& tok = tokens[input];
            std::size_t tilde = tok.rfind('~');
            if (tilde == std::string::npos)
                throw ParseError("token '" + tok + "' at gene position " +
                                 std::to_string(gene) + " lacks an input-index suffix");
            const std::string name = tok.substr(0, tilde);
            const std::string idx = tok.substr(tilde + 1);
            if (idx != std::to_string(input))
                throw ParseError("token '" + tok + "' at gene position " +
                                 std::to_string(gene) + " has input index '" + idx +
                                 "', expected '" + std::to_string(input) + "'");
            try {
                g.genes[gene] = op_from_name(name);
            } catch (const ParseError&) {
                throw ParseError("unknown operation name '" + name + "' at gene position " +
                                 std::to_string(gene));
            }
            ++gene;
        }
    }
    return g;
}

std::string format_arch_str(const Genotype& g) {
    std::string s;
    int gene = 0;
    for (int node = 1; node < kNumCellNodes; ++node) {
        if (node > 1) s += '+';
        for (int input = 0; input < node; ++input) {
            s += '|';
            s += op_name(g.genes[gene++]);
            s += '~';
            s += std::to_string(input);
        }
        s += '|';
    }
    return s;
}

bool arch_str_less(const Genotype& a, const Genotype& b) {
    // Gene-by-gene comparison in operation-name order; equivalent to
    // comparing the formatted strings without building them.
    for (int i = 0; i < kNumGenes; ++i) {
        if (a.genes[i] == b.genes[i]) continue;
        return std::string_view(op_name(a.genes[i])) < std::string_view(op_name(b.genes[i]));
    }
    return false;
}

Genotype random_genotype(Rng& rng) {
    Genotype g;
    for (auto& gene : g.genes)
        gene = static_cast<Operation>(rng.below(kNumOperations));
    return g;
}

Genotype crossover(const Genotype& a, const Genotype& b, Rng& rng) {
    Genotype child;
    for (int i = 0; i < kNumGenes; ++i)
        child.genes[i] = rng.below(2) == 0 ? a.genes[i] : b.genes[i];
    return child;
}

Genotype mutate(const Genotype& g, double rate, Rng& rng) {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("mutate: rate must lie in [0, 1]");
    Genotype out = g;
    for (int i = 0; i < kNumGenes; ++i) {
        if (rng.real() >= rate) continue;
        // Resample to a different operation so `rate` keeps its literal meaning.
        auto offset = 1 + rng.below(kNumOperations - 1);
        out.genes[i] = static_cast<Operation>(
            (static_cast<std::uint64_t>(out.genes[i]) + offset) % kNumOperations);
    }
    return out;
}

std::vector<Genotype> enumerate_space() {
    std::vector<Genotype> all;
    all.reserve(kSpaceSize);
    for (std::uint32_t idx = 0; idx < kSpaceSize; ++idx)
        all.push_back(Genotype::from_index(idx));
    return all;
}

}  // namespace hwnas
