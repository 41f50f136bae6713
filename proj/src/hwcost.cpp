#include "hwnas/hwcost.hpp"

#include <stdexcept>
#include <string>

#include "hwnas/errors.hpp"

namespace hwnas {

const char* cost_metric_name(CostMetric m) {
    return m == CostMetric::macs ? "macs" : "latency";
}

CostMetric cost_metric_from_name(const std::string& name) {
    if (name == "macs") return CostMetric::macs;
    if (name == "latency") return CostMetric::latency;
    throw ParseError("unknown cost metric '" + name + "'");
}

void CostQuery::validate() const {
    if ((metric == CostMetric::latency) != device.has_value())
        throw std::invalid_argument("CostQuery: a device is required exactly when metric is latency");
}

void Constraint::validate() const {
    query.validate();
    if (!(omega > 0.0)) throw std::invalid_argument("Constraint: omega must be positive");
}

double macs_estimate(const Genotype& g, const MacroSkeleton& skel) {
    // MACs of a single conv1x1 edge summed over every cell instance; the
    // C^2*H*W factor is evaluated per stage with the resolution halved at
    // each stage boundary.
    double edge_unit = 0.0;
    for (int s = 0; s < 3; ++s) {
        const double c = skel.stage_channels[s];
        const double h = std::max(1, skel.height >> s);
        const double w = std::max(1, skel.width >> s);
        edge_unit += c * c * h * w * skel.cells_per_stage;
    }
    const int n33 = g.count_op(Operation::nor_conv_3x3);
    const int n11 = g.count_op(Operation::nor_conv_1x1);
    const double cell_macs = edge_unit * (9.0 * n33 + 1.0 * n11);
    const double stem_macs = 9.0 * 3.0 * skel.stage_channels[0] * skel.height * skel.width;
    const double head_macs = static_cast<double>(skel.stage_channels[2]) * skel.num_classes;
    return (cell_macs + stem_macs + head_macs) / 1e6;
}

double latency_lookup(const BenchTable& table, const Genotype& g, DeviceId device) {
    return table.latency(g, device);
}

double penalty(double cost, double omega) {
    return cost <= omega ? 0.0 : omega - cost;
}

double penalty(const CostValue& cost, const Constraint& constraint) {
    if (!(cost.query == constraint.query))
        throw std::invalid_argument("penalty: cost units do not match the constraint (" +
                                    std::string(cost_metric_name(cost.query.metric)) + " vs " +
                                    cost_metric_name(constraint.query.metric) + ")");
    return penalty(cost.value, constraint.omega);
}

RejectionResult rejection_sample_population(const Constraint& constraint, const CostFn& cost_fn,
                                            std::size_t size, Rng& rng,
                                            std::size_t max_attempts) {
    if (size < 1) throw std::invalid_argument("rejection_sample_population: size must be >= 1");
    if (max_attempts < size)
        throw std::invalid_argument("rejection_sample_population: max_attempts must be >= size");
    constraint.validate();

    RejectionResult result;
    result.kept.reserve(size);
    while (result.kept.size() < size) {
        if (result.samples_drawn >= max_attempts)
            throw HaltingError(result.samples_drawn,
                               "rejection sampling drew " + std::to_string(result.samples_drawn) +
                                   " candidates without filling a population of " +
                                   std::to_string(size));
        Genotype g = random_genotype(rng);
        ++result.samples_drawn;
        if (cost_fn(g) <= constraint.omega) result.kept.push_back(g);
    }
    return result;
}

}  // namespace hwnas
