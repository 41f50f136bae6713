#include "hwnas/surrogate.hpp"

#include <cmath>
#include <stdexcept>

#include "hwnas/errors.hpp"
#include "hwnas/rng.hpp"

namespace hwnas {

namespace {

constexpr std::uint64_t kStemStream = 0x5731;

std::size_t nodes_for_edge_count(std::size_t num_edges) {
    for (std::size_t m = 2; m <= 16; ++m)
        if (m * (m - 1) / 2 == num_edges) return m;
    throw std::invalid_argument("SurrogateNet: edge count " + std::to_string(num_edges) +
                                " does not match any cell node count");
}

int band_halfwidth(Operation op) {
    switch (op) {
        case Operation::nor_conv_1x1: return 0;
        case Operation::nor_conv_3x3: return 1;
        default: return -1;
    }
}

Matrix feature_average_block(std::size_t width) {
    // Column j averages input features j-1..j+1 (clipped at the borders).
    Matrix p(width, width);
    for (std::size_t j = 0; j < width; ++j) {
        const std::size_t lo = j == 0 ? 0 : j - 1;
        const std::size_t hi = j + 1 < width ? j + 1 : width - 1;
        const double w = 1.0 / static_cast<double>(hi - lo + 1);
        for (std::size_t i = lo; i <= hi; ++i) p(i, j) = w;
    }
    return p;
}

double mse(const Matrix& pred, const Matrix& target) {
    check_same_shape(pred, target, "mse");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - target.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

// d/dX of layer_term(R, X). Zero at the degenerate zero-norm convention
// point, matching the value's subgradient there.
Matrix layer_term_grad(const Matrix& r, const Matrix& x) {
    const Matrix cross = matmul_tn(r, x);
    const double u = frobenius_norm_sq(cross);
    const double c = frobenius_norm(matmul_tn(r, r));
    const double v = frobenius_norm(matmul_tn(x, x));
    Matrix grad(x.rows(), x.cols());
    if (c == 0.0 || v == 0.0) return grad;
    // t = u / (c v):  dt = (2 R R^T X)/(c v) - (2 u X X^T X)/(c v^3)
    Matrix rrx = matmul(r, cross);              // R (R^T X)
    Matrix xxx = matmul(x, matmul_tn(x, x));    // X (X^T X)
    axpy(grad, 2.0 / (c * v), rrx);
    axpy(grad, -2.0 * u / (c * v * v * v), xxx);
    return grad;
}

}  // namespace

SurrogateNet::SurrogateNet(const std::vector<Operation>& ops, std::size_t input_width,
                           std::size_t width, std::uint64_t seed)
    : num_nodes_(nodes_for_edge_count(ops.size())),
      input_width_(input_width),
      width_(width),
      pool_(feature_average_block(width)) {
    Rng stem_rng(derive_seed(seed, kStemStream));
    stem_ = Matrix(input_width_, width_);
    const double stem_scale = 1.0 / std::sqrt(static_cast<double>(input_width_));
    for (std::size_t i = 0; i < stem_.size(); ++i) stem_.data()[i] = stem_rng.normal() * stem_scale;

    std::size_t e = 0;
    for (std::size_t dst = 1; dst < num_nodes_; ++dst) {
        for (std::size_t src = 0; src < dst; ++src, ++e) {
            Edge edge;
            edge.src = static_cast<int>(src);
            edge.dst = static_cast<int>(dst);
            edge.op = ops[e];
            if (edge.op != Operation::none) {
                Rng rng(derive_seed(seed, e + 1, static_cast<std::uint64_t>(edge.op)));
                edge.band = band_halfwidth(edge.op);
                if (edge.band >= 0) {
                    edge.weight = Matrix(width_, width_);
                    const double w_scale = 1.0 / std::sqrt(static_cast<double>(2 * edge.band + 1));
                    for (std::size_t i = 0; i < width_; ++i)
                        for (std::size_t j = 0; j < width_; ++j)
                            if (std::llabs(static_cast<long long>(i) - static_cast<long long>(j)) <=
                                edge.band)
                                edge.weight(i, j) = rng.normal() * w_scale;
                }
                edge.bias.resize(width_);
                for (auto& b : edge.bias) b = rng.normal() * 0.5;
            }
            edges_.push_back(std::move(edge));
        }
    }
}

SurrogateNet SurrogateNet::from_genotype(const Genotype& g, std::size_t input_width,
                                         std::size_t width, std::uint64_t seed) {
    std::vector<Operation> ops(g.genes.begin(), g.genes.end());
    return SurrogateNet(ops, input_width, width, seed);
}

std::vector<Matrix> SurrogateNet::forward_nodes(const Matrix& batch) const {
    if (batch.cols() != input_width_)
        throw std::invalid_argument("SurrogateNet: batch width " + std::to_string(batch.cols()) +
                                    " != input width " + std::to_string(input_width_));
    std::vector<Matrix> nodes(num_nodes_);
    nodes[0] = matmul(batch, stem_);
    for (std::size_t j = 1; j < num_nodes_; ++j) nodes[j] = Matrix(batch.rows(), width_);
    for (const Edge& e : edges_) {
        if (e.op == Operation::none) continue;
        Matrix& out = nodes[e.dst];
        const Matrix& in = nodes[e.src];
        switch (e.op) {
            case Operation::skip_connect: axpy(out, 1.0, in); break;
            case Operation::avg_pool_3x3: axpy(out, 1.0, matmul(in, pool_)); break;
            default: axpy(out, 1.0, matmul(in, e.weight)); break;
        }
        for (std::size_t r = 0; r < out.rows(); ++r)
            for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += e.bias[c];
    }
    return nodes;
}

FeatureStack SurrogateNet::forward(const Matrix& batch) const {
    return FeatureStack{forward_nodes(batch)};
}

double SurrogateNet::loss(const Matrix& batch, const FeatureStack& ref, const Matrix& targets,
                          double beta) const {
    FeatureStack stack = forward(batch);
    return combined_loss(stack, ref, mse(stack.layers.back(), targets), beta);
}

double SurrogateNet::loss_and_gradients(const Matrix& batch, const FeatureStack& ref,
                                        const Matrix& targets, double beta,
                                        Gradients& out) const {
    if (ref.depth() != num_nodes_)
        throw std::invalid_argument("SurrogateNet: reference depth mismatch");
    const std::vector<Matrix> nodes = forward_nodes(batch);
    const double n_layers = static_cast<double>(num_nodes_);

    double phi = 0.0;
    for (std::size_t j = 0; j < num_nodes_; ++j) phi += layer_term(ref.layers[j], nodes[j]);
    const double task = mse(nodes.back(), targets);
    const double total = beta * (1.0 - phi / n_layers) + (1.0 - beta) * task;

    // Reverse sweep: node gradients accumulate the similarity term, the
    // task term (last node) and every outgoing edge's backprop.
    std::vector<Matrix> node_grad(num_nodes_);
    for (std::size_t j = num_nodes_; j-- > 0;) {
        Matrix g = layer_term_grad(ref.layers[j], nodes[j]);
        scale(g, -beta / n_layers);
        if (j + 1 == num_nodes_) {
            const double w = (1.0 - beta) * 2.0 / static_cast<double>(targets.size());
            for (std::size_t i = 0; i < g.size(); ++i)
                g.data()[i] += w * (nodes[j].data()[i] - targets.data()[i]);
        }
        for (const Edge& e : edges_) {
            if (e.src != static_cast<int>(j) || e.op == Operation::none) continue;
            const Matrix& down = node_grad[e.dst];
            switch (e.op) {
                case Operation::skip_connect: axpy(g, 1.0, down); break;
                case Operation::avg_pool_3x3: axpy(g, 1.0, matmul_nt(down, pool_)); break;
                default: axpy(g, 1.0, matmul_nt(down, e.weight)); break;
            }
        }
        node_grad[j] = std::move(g);
    }

    out.stem = matmul_tn(batch, node_grad[0]);
    out.edge_weight.assign(edges_.size(), Matrix());
    out.edge_bias.assign(edges_.size(), {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& edge = edges_[e];
        if (edge.op == Operation::none) continue;
        const Matrix& down = node_grad[edge.dst];
        if (edge.band >= 0) {
            Matrix wg = matmul_tn(nodes[edge.src], down);
            for (std::size_t i = 0; i < width_; ++i)
                for (std::size_t j = 0; j < width_; ++j)
                    if (std::llabs(static_cast<long long>(i) - static_cast<long long>(j)) >
                        edge.band)
                        wg(i, j) = 0.0;
            out.edge_weight[e] = std::move(wg);
        }
        std::vector<double> bg(width_, 0.0);
        for (std::size_t r = 0; r < down.rows(); ++r)
            for (std::size_t c = 0; c < width_; ++c) bg[c] += down(r, c);
        out.edge_bias[e] = std::move(bg);
    }
    return total;
}

void SurrogateNet::apply_step(const Gradients& g, double step) {
    axpy(stem_, -step, g.stem);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        if (edges_[e].op == Operation::none) continue;
        if (edges_[e].band >= 0) axpy(edges_[e].weight, -step, g.edge_weight[e]);
        for (std::size_t c = 0; c < width_; ++c) edges_[e].bias[c] -= step * g.edge_bias[e][c];
    }
}

std::vector<double*> SurrogateNet::parameter_pointers() {
    std::vector<double*> ps;
    for (std::size_t i = 0; i < stem_.size(); ++i) ps.push_back(stem_.data() + i);
    for (Edge& e : edges_) {
        if (e.op == Operation::none) continue;
        if (e.band >= 0)
            for (std::size_t i = 0; i < width_; ++i)
                for (std::size_t j = 0; j < width_; ++j)
                    if (std::llabs(static_cast<long long>(i) - static_cast<long long>(j)) <= e.band)
                        ps.push_back(&e.weight(i, j));
        for (auto& b : e.bias) ps.push_back(&b);
    }
    return ps;
}

std::vector<double*> SurrogateNet::grad_pointers(Gradients& g, const SurrogateNet& net) {
    std::vector<double*> ps;
    for (std::size_t i = 0; i < g.stem.size(); ++i) ps.push_back(g.stem.data() + i);
    for (std::size_t e = 0; e < net.edges_.size(); ++e) {
        const Edge& edge = net.edges_[e];
        if (edge.op == Operation::none) continue;
        if (edge.band >= 0)
            for (std::size_t i = 0; i < net.width_; ++i)
                for (std::size_t j = 0; j < net.width_; ++j)
                    if (std::llabs(static_cast<long long>(i) - static_cast<long long>(j)) <=
                        edge.band)
                        ps.push_back(&g.edge_weight[e](i, j));
        for (auto& b : g.edge_bias[e]) ps.push_back(&b);
    }
    return ps;
}

TrainResult train_single_batch(SurrogateNet& net, const ReferenceModel& ref,
                               const TrainSettings& settings) {
    if (settings.beta < 0.0 || settings.beta > 1.0)
        throw std::invalid_argument("train_single_batch: beta must lie in [0, 1]");
    if (settings.epochs < 0)
        throw std::invalid_argument("train_single_batch: epochs must be >= 0");
    if (ref.stack.depth() == 0)
        throw std::invalid_argument("train_single_batch: empty reference stack");
    if (settings.batch.rows() != ref.stack.layers.front().rows())
        throw std::invalid_argument("train_single_batch: batch rows do not match reference rows");

    TrainResult result;
    result.initial_score = rmi_score(ref.stack, net.forward(settings.batch));

    SurrogateNet::Gradients grads;
    double last_loss = 0.0;
    for (int epoch = 0; epoch < settings.epochs; ++epoch) {
        try {
            last_loss = net.loss_and_gradients(settings.batch, ref.stack, settings.targets,
                                               settings.beta, grads);
        } catch (const std::domain_error&) {
            // Overflowed activations surface as non-finite layer inputs.
            last_loss = std::nan("");
        }
        if (!std::isfinite(last_loss))
            throw DivergenceError(static_cast<std::size_t>(epoch),
                                  "training diverged at epoch " + std::to_string(epoch));
        net.apply_step(grads, settings.step_size);
    }

    try {
        FeatureStack final_stack = net.forward(settings.batch);
        result.final_loss =
            settings.epochs == 0
                ? net.loss(settings.batch, ref.stack, settings.targets, settings.beta)
                : last_loss;
        result.final_score = rmi_score(ref.stack, final_stack);
    } catch (const std::domain_error&) {
        result.final_score = std::nan("");
    }
    if (!std::isfinite(result.final_score))
        throw DivergenceError(static_cast<std::size_t>(settings.epochs),
                              "training diverged at epoch " + std::to_string(settings.epochs));
    return result;
}

FeatureStack synth_forward(const Genotype& g, const Matrix& batch, std::uint64_t seed,
                           std::size_t width) {
    if (width == 0) width = batch.cols();
    return SurrogateNet::from_genotype(g, batch.cols(), width, seed).forward(batch);
}

}  // namespace hwnas
