#include "hwnas/rmi.hpp"

#include <cmath>
#include <stdexcept>

namespace hwnas {

double layer_term(const Matrix& xref, const Matrix& x) {
    if (xref.rows() != x.rows())
        throw std::invalid_argument("layer_term: row-count mismatch (" +
                                    std::to_string(xref.rows()) + " vs " +
                                    std::to_string(x.rows()) + ")");
    const double cross_sq = frobenius_norm_sq(matmul_tn(xref, x));
    const double ref_gram = frobenius_norm(matmul_tn(xref, xref));
    const double cand_gram = frobenius_norm(matmul_tn(x, x));
    if (!std::isfinite(cross_sq) || !std::isfinite(ref_gram) || !std::isfinite(cand_gram))
        throw std::domain_error("layer_term: non-finite input");
    if (ref_gram == 0.0 || cand_gram == 0.0) return 0.0;
    return cross_sq / (ref_gram * cand_gram);
}

double rmi_score(const FeatureStack& ref, const FeatureStack& cand) {
    if (ref.depth() != cand.depth())
        throw std::invalid_argument("rmi_score: stack-length mismatch (" +
                                    std::to_string(ref.depth()) + " vs " +
                                    std::to_string(cand.depth()) + ")");
    double total = 0.0;
    for (std::size_t i = 0; i < ref.depth(); ++i)
        total += layer_term(ref.layers[i], cand.layers[i]);
    return total;
}

double combined_loss(const FeatureStack& cand, const FeatureStack& ref, double task_loss,
                     double beta) {
    if (beta < 0.0 || beta > 1.0)
        throw std::invalid_argument("combined_loss: beta must lie in [0, 1]");
    const double l = static_cast<double>(ref.depth());
    return beta * (1.0 - rmi_score(ref, cand) / l) + (1.0 - beta) * task_loss;
}

}  // namespace hwnas
