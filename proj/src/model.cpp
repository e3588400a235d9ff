#include "ssvm/model.hpp"

namespace ssvm {

Model Model::to_convention(CoefConvention target) const {
    if (target == convention) return *this;
    Model out = *this;
    out.convention = target;
    for (std::size_t j = 0; j < out.coefficients.size(); ++j)
        out.coefficients[j] *= out.support_samples[j].label;  // y*y = 1 makes this its own inverse
    return out;
}

double decision_value(const Model& model, std::span<const double> x) {
    if (!model.support_samples.empty() && x.size() != model.support_samples.front().features.size())
        throw ShapeError("probe dimension does not match model feature_dim");
    double f = model.bias;
    for (std::size_t j = 0; j < model.support_samples.size(); ++j) {
        const Sample& s = model.support_samples[j];
        const double k = eval_kernel(model.kernel, s.features, x);
        if (model.convention == CoefConvention::unsigned_alpha)
            f += model.coefficients[j] * s.label * k;
        else
            f += model.coefficients[j] * k;
    }
    return f;
}

int predict(const Model& model, std::span<const double> x) {
    return decision_value(model, x) >= 0.0 ? +1 : -1;
}

}  // namespace ssvm
