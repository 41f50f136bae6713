#pragma once

#include <cstdint>
#include <vector>

#include "hwnas/genotype.hpp"
#include "hwnas/matrix.hpp"
#include "hwnas/rmi.hpp"

namespace hwnas {

/// Settings for single-batch training of a surrogate.
struct TrainSettings {
    int epochs = 100;
    double beta = 0.8;
    double step_size = 1e-2;
    Matrix batch;    // n x d0 input rows
    Matrix targets;  // n x d regression targets for the final node
};

/// Desk-scale trainable network shaped like a cell DAG. Node 0 is a dense
/// stem applied to the batch; every later node sums the affine contributions
/// of its incoming edges. Each edge's linear block is selected by its
/// operation:
///   none          -> zero block (edge contributes nothing at all)
///   skip_connect  -> identity block
///   nor_conv_1x1  -> trainable diagonal block (receptive width 1)
///   nor_conv_3x3  -> trainable tridiagonal block (receptive width 3)
///   avg_pool_3x3  -> fixed width-3 feature-averaging block
/// Every non-none edge also carries a trainable bias row seeded from
/// (edge, operation); without it, edges fed by an all-zero node would be
/// indistinguishable across operations.
class SurrogateNet {
public:
    /// Build from an explicit edge-operation list in canonical edge order
    /// (ops.size() must be m*(m-1)/2 for some node count m >= 2).
    SurrogateNet(const std::vector<Operation>& ops, std::size_t input_width, std::size_t width,
                 std::uint64_t seed);

    /// Build the 4-node net encoded by a genotype.
    static SurrogateNet from_genotype(const Genotype& g, std::size_t input_width,
                                      std::size_t width, std::uint64_t seed);

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t width() const { return width_; }
    std::size_t input_width() const { return input_width_; }

    /// Feature stack [node_0 .. node_{m-1}] on the given batch.
    FeatureStack forward(const Matrix& batch) const;

    /// Gradients mirror the trainable parameters of the net.
    struct Gradients {
        Matrix stem;
        std::vector<Matrix> edge_weight;             // zero off the band
        std::vector<std::vector<double>> edge_bias;  // empty for none edges
    };

    /// Combined loss (representation dissimilarity + mean squared error to
    /// the targets) and its gradient w.r.t. every trainable parameter.
    double loss_and_gradients(const Matrix& batch, const FeatureStack& ref,
                              const Matrix& targets, double beta, Gradients& out) const;

    /// Loss only, via the same forward path.
    double loss(const Matrix& batch, const FeatureStack& ref, const Matrix& targets,
                double beta) const;

    /// w -= step * g for every trainable parameter.
    void apply_step(const Gradients& g, double step);

    /// Pointers to every trainable scalar, in a fixed order matched by
    /// grad_pointers. Exposed for gradient verification.
    std::vector<double*> parameter_pointers();
    static std::vector<double*> grad_pointers(Gradients& g, const SurrogateNet& net);

private:
    struct Edge {
        int src;
        int dst;
        Operation op;
        Matrix weight;             // conv ops only (d x d, banded)
        std::vector<double> bias;  // non-none ops
        int band = -1;             // band halfwidth for conv ops
    };

    std::vector<Matrix> forward_nodes(const Matrix& batch) const;

    std::size_t num_nodes_;
    std::size_t input_width_;
    std::size_t width_;
    Matrix stem_;  // input_width x width
    Matrix pool_;  // width x width feature-averaging block
    std::vector<Edge> edges_;
};

struct TrainResult {
    double initial_score = 0.0;  // representation similarity before training
    double final_score = 0.0;    // and after
    double final_loss = 0.0;
};

/// Full-batch gradient descent on the combined loss for settings.epochs
/// steps. Throws DivergenceError naming the epoch if the loss goes
/// non-finite. epochs == 0 leaves the net untouched.
TrainResult train_single_batch(SurrogateNet& net, const ReferenceModel& ref,
                               const TrainSettings& settings);

/// Deterministic genotype -> representation map: builds the surrogate for
/// (g, seed) and returns its forward stack on the batch. width defaults to
/// the batch width.
FeatureStack synth_forward(const Genotype& g, const Matrix& batch, std::uint64_t seed,
                           std::size_t width = 0);

}  // namespace hwnas
