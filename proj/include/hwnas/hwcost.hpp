#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hwnas/bench_table.hpp"
#include "hwnas/genotype.hpp"
#include "hwnas/rng.hpp"

namespace hwnas {

enum class CostMetric { macs, latency };

const char* cost_metric_name(CostMetric m);
CostMetric cost_metric_from_name(const std::string& name);  // throws ParseError

/// What quantity a hardware cost is measured in: MACs (millions) or
/// per-device latency (milliseconds). A device is required exactly when the
/// metric is latency; the tag travels with every cost so unit mixing is
/// caught at penalty time.
struct CostQuery {
    CostMetric metric = CostMetric::macs;
    std::optional<DeviceId> device;

    static CostQuery macs() { return {CostMetric::macs, std::nullopt}; }
    static CostQuery latency(DeviceId d) { return {CostMetric::latency, d}; }

    void validate() const;  // throws std::invalid_argument
    bool operator==(const CostQuery&) const = default;
};

/// A cost measurement together with its unit tag.
struct CostValue {
    double value = 0.0;
    CostQuery query;
};

/// Hardware budget: costs at or below omega are feasible.
struct Constraint {
    double omega = 0.0;  // > 0, in the query's units
    CostQuery query;

    void validate() const;  // throws std::invalid_argument
};

/// Macro structure wrapped around a cell: input resolution, per-stage
/// channel widths (the resolution halves at each stage boundary), cells per
/// stage, and classifier width.
struct MacroSkeleton {
    int height = 32;
    int width = 32;
    std::array<int, 3> stage_channels{16, 32, 64};
    int cells_per_stage = 5;
    int num_classes = 10;
};

/// Analytic multiply-accumulate count in millions, summed over every cell
/// instance: 9*C_in*C_out*H*W per conv3x3 edge, C_in*C_out*H*W per conv1x1
/// edge, 0 for skip/pool/none, plus fixed stem and classifier-head terms.
/// Deterministic and monotone in the number of conv genes.
double macs_estimate(const Genotype& g, const MacroSkeleton& skel);

/// Pure lookup of the stored latency; LookupError when missing.
double latency_lookup(const BenchTable& table, const Genotype& g, DeviceId device);

/// Shortfall penalty: 0 when cost <= omega, omega - cost (negative) when
/// cost > omega. Continuous at the boundary and strictly decreasing in cost
/// on the infeasible side, so the search is penalized in proportion to how
/// far past the budget an architecture lies.
double penalty(double cost, double omega);

/// Unit-checked variant; throws std::invalid_argument when the cost's tag
/// does not match the constraint's.
double penalty(const CostValue& cost, const Constraint& constraint);

using CostFn = std::function<double(const Genotype&)>;

struct RejectionResult {
    std::vector<Genotype> kept;
    std::size_t samples_drawn = 0;
};

/// Baseline population builder that discards infeasible draws: samples
/// uniform genotypes and keeps those with cost <= omega until `size` are
/// kept. Throws HaltingError once more than max_attempts draws would be
/// needed.
RejectionResult rejection_sample_population(const Constraint& constraint, const CostFn& cost_fn,
                                            std::size_t size, Rng& rng,
                                            std::size_t max_attempts = 1000000);

}  // namespace hwnas
