#pragma once

#include <span>
#include <vector>

#include "ssvm/kernel.hpp"
#include "ssvm/types.hpp"

namespace ssvm {

/// Coefficient convention carried by a model. The incremental solver and the
/// batch solver produce unsigned alphas (label factored out of the sum); the
/// semi-online solver produces signed alphas with the label folded in.
enum class CoefConvention { unsigned_alpha, signed_alpha };

/// Trained classifier: kernel, support samples, coefficients, bias.
struct Model {
    KernelSpec kernel;
    std::vector<Sample> support_samples;
    std::vector<double> coefficients;
    double bias = 0.0;
    double C = 1.0;
    CoefConvention convention = CoefConvention::unsigned_alpha;

    /// Converts between conventions (alpha_signed = alpha_unsigned * y).
    Model to_convention(CoefConvention target) const;
};

/// f(x): unsigned convention sum_j a_j y_j K(x_j, x) + bias,
///        signed convention  sum_j a_j K(x_j, x) + bias.
double decision_value(const Model& model, std::span<const double> x);

/// Sign of the decision value; exact zero predicts +1.
int predict(const Model& model, std::span<const double> x);

}  // namespace ssvm
