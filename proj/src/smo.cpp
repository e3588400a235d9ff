#include "ssvm/smo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ssvm {

namespace {

constexpr double kTiny = 1e-12;

}  // namespace

SmoResult smo_solve(const Dataset& dataset, const SmoConfig& config) {
    if (dataset.empty()) throw ConfigError("smo_solve requires a nonempty dataset");
    if (!(config.C > 0.0)) throw ConfigError("C must be positive");
    if (!(config.tolerance > 0.0)) throw ConfigError("tolerance must be positive");

    const std::size_t n = dataset.size();
    const double C = config.C;
    const auto& samples = dataset.samples();

    SmoResult res;
    res.model.kernel = config.kernel;
    res.model.C = C;
    res.model.convention = CoefConvention::unsigned_alpha;

    bool has_pos = false, has_neg = false;
    for (const Sample& s : samples) (s.label > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
        // degenerate single-class input: all alpha stay 0, bias = majority label
        res.model.bias = has_pos ? +1.0 : -1.0;
        return res;
    }

    // Dense Gram for modest sizes; per-pair evaluation otherwise.
    const bool dense = n <= 5000;
    std::vector<double> gram;
    if (dense) {
        gram.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double k = eval_kernel(config.kernel, samples[i].features, samples[j].features);
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
    }
    auto kij = [&](std::size_t i, std::size_t j) {
        if (dense) return gram[i * n + j];
        return eval_kernel(config.kernel, samples[i].features, samples[j].features);
    };

    std::vector<double> alpha(n, 0.0);
    // G_i = d/dalpha_i of (1/2 a'Qa - e'a), Q_ij = y_i y_j K_ij
    std::vector<double> grad(n, -1.0);

    const long max_iter = static_cast<long>(config.max_passes) * static_cast<long>(n);
    long it = 0;
    double bias = 0.0;

    for (; it < max_iter; ++it) {
        // maximal violating pair over I_up / I_low
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const int y = samples[t].label;
            const double v = -y * grad[t];
            const bool in_up = (y > 0 && alpha[t] < C) || (y < 0 && alpha[t] > 0.0);
            const bool in_low = (y < 0 && alpha[t] < C) || (y > 0 && alpha[t] > 0.0);
            if (in_up && v > m_up) {
                m_up = v;
                i = t;
            }
            if (in_low && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        if (i == n || j == n) break;  // no movable pair
        bias = (m_up + m_low) / 2.0;
        if (m_up - m_low <= config.tolerance) break;

        const int yi = samples[i].label, yj = samples[j].label;
        const double kii = kij(i, i), kjj = kij(j, j), k_ij = kij(i, j);
        double quad = kii + kjj - 2.0 * k_ij;
        if (quad < kTiny) quad = kTiny;
        double t_step = (m_up - m_low) / quad;
        // box clips in the signed step variable
        t_step = std::min(t_step, yi > 0 ? C - alpha[i] : alpha[i]);
        t_step = std::min(t_step, yj > 0 ? alpha[j] : C - alpha[j]);
        if (t_step <= 0.0) break;

        alpha[i] += yi * t_step;
        alpha[j] -= yj * t_step;
        alpha[i] = std::clamp(alpha[i], 0.0, C);
        alpha[j] = std::clamp(alpha[j], 0.0, C);
        for (std::size_t s = 0; s < n; ++s)
            grad[s] += t_step * samples[s].label * (kij(s, i) - kij(s, j));
    }
    res.converged = it < max_iter;
    res.iterations = it;

    double lin = 0.0, quadsum = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        if (alpha[a] == 0.0) continue;
        lin += alpha[a];
        for (std::size_t b = 0; b < n; ++b) {
            if (alpha[b] == 0.0) continue;
            quadsum += alpha[a] * alpha[b] * samples[a].label * samples[b].label * kij(a, b);
        }
    }
    res.dual_objective = lin - 0.5 * quadsum;

    res.model.bias = bias;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            res.model.support_samples.push_back(samples[t]);
            res.model.coefficients.push_back(alpha[t]);
        }
    }
    return res;
}

}  // namespace ssvm
