#pragma once

#include <string>
#include <vector>

#include "hwnas/matrix.hpp"

namespace hwnas {

/// Ordered per-layer feature matrices of one network on a fixed batch.
/// All layers share the same row count (the batch size).
struct FeatureStack {
    std::vector<Matrix> layers;

    std::size_t depth() const { return layers.size(); }
};

/// Fixed, precomputed feature stack of the model the search tries to match.
struct ReferenceModel {
    FeatureStack stack;
    std::string descriptor;
};

/// Normalized squared cross-Gram norm of two same-batch feature matrices:
///   ||Xref^T X||_F^2 / (||Xref^T Xref||_F * ||X^T X||_F)
/// Lies in [0, 1] by Cauchy-Schwarz. Returns 0 when either Gram norm is 0,
/// ranking dead layers as maximally dissimilar.
double layer_term(const Matrix& xref, const Matrix& x);

/// Sum of layer_term over aligned layers; in [0, L]. Symmetric in its
/// arguments and invariant under per-layer isotropic scaling and
/// right-multiplication by orthogonal matrices.
double rmi_score(const FeatureStack& ref, const FeatureStack& cand);

/// Training objective mixing representation dissimilarity with the task
/// loss: beta * (1 - rmi/L) + (1 - beta) * task_loss. The similarity enters
/// as a dissimilarity so that minimizing the loss drives the candidate's
/// layers toward the reference.
double combined_loss(const FeatureStack& cand, const FeatureStack& ref, double task_loss,
                     double beta);

}  // namespace hwnas
