#pragma once

#include <cmath>
#include <vector>

#include "ssvm/bytes.hpp"
#include "ssvm/isvm.hpp"
#include "ssvm/lasvm.hpp"
#include "ssvm/rng.hpp"
#include "ssvm/types.hpp"

namespace ssvm::testing {

/// Two Gaussian blobs around +-center; strictly PSD RBF Gram with probability
/// one (distinct points).
inline Dataset gaussian_blobs(std::size_t n, std::size_t dim, std::uint64_t seed,
                              double center = 1.0, double sigma = 0.8) {
    Rng rng(derive_seed(seed, 17));
    Dataset out;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = (rng.uniform() < 0.5) ? +1 : -1;
        std::vector<double> f(dim);
        for (auto& v : f) v = label * center + sigma * rng.gauss();
        out.add(Sample(std::move(f), label));
    }
    return out;
}

/// Builds an IsvmTrainer with explicit internals through its serialized form;
/// used to pin down per-operation examples that need a specific state.
inline IsvmTrainer make_isvm_state(double C, const KernelSpec& kernel,
                                   const std::vector<Sample>& samples,
                                   const std::vector<double>& alpha,
                                   const std::vector<double>& g,
                                   const std::vector<Membership>& member, double mu,
                                   const std::vector<int>& border,
                                   const std::vector<double>& inverse) {
    std::vector<std::uint8_t> bytes;
    ByteWriter w(bytes);
    w.f64(C);
    w.str(kernel.to_text());
    w.u64(samples.size());
    for (const Sample& s : samples) {
        w.u32(static_cast<std::uint32_t>(s.features.size()));
        for (double v : s.features) w.f64(v);
        w.u8(s.label > 0 ? 1 : 0);
    }
    w.f64_vec(alpha);
    w.f64_vec(g);
    for (Membership m : member) w.u8(static_cast<std::uint8_t>(m));
    w.f64(mu);
    w.u64(border.size());
    for (int b : border) w.u32(static_cast<std::uint32_t>(b));
    w.f64_vec(inverse);
    std::size_t off = 0;
    return IsvmTrainer::deserialize(bytes.data(), bytes.size(), off);
}

/// Same trick for the semi-online trainer.
inline LasvmTrainer make_lasvm_state(double C, double tau, const KernelSpec& kernel,
                                     const std::vector<Sample>& samples,
                                     const std::vector<double>& alpha,
                                     const std::vector<double>& g, double b, double delta) {
    std::vector<std::uint8_t> bytes;
    ByteWriter w(bytes);
    w.f64(C);
    w.f64(tau);
    w.str(kernel.to_text());
    w.u64(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        w.u32(static_cast<std::uint32_t>(samples[i].features.size()));
        for (double v : samples[i].features) w.f64(v);
        w.u8(samples[i].label > 0 ? 1 : 0);
        w.f64(alpha[i]);
        w.f64(g[i]);
    }
    w.f64(b);
    w.f64(delta);
    std::size_t off = 0;
    return LasvmTrainer::deserialize(bytes.data(), bytes.size(), off);
}

/// Checks every maintained IsvmState invariant; returns an empty string or a
/// description of the first violation.
inline std::string isvm_invariant_violation(const IsvmTrainer& t, double eps = kKktEpsilon) {
    const std::size_t n = t.size();
    double sum_ya = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = t.alpha(static_cast<int>(i));
        const int y = t.sample(static_cast<int>(i)).label;
        sum_ya += y * a;
        if (a < 0.0 || a > t.C()) return "alpha outside [0, C]";
        const double g = t.margin_gradient(static_cast<int>(i));
        switch (t.membership(static_cast<int>(i))) {
            case Membership::support:
                if (std::abs(g) > eps) return "support sample with |g| > eps";
                break;
            case Membership::remainder:
                if (a > 1e-12 * std::max(1.0, t.C())) return "remainder sample with alpha != 0";
                if (g < -eps) return "remainder sample with g < -eps";
                break;
            case Membership::error_bound:
                if (std::abs(a - t.C()) > 1e-12 * std::max(1.0, t.C()))
                    return "error sample with alpha != C";
                if (g > eps) return "error sample with g > eps";
                break;
        }
    }
    if (std::abs(sum_ya) > 1e-8) return "sum y_i alpha_i != 0";

    // bordered inverse identity
    const auto& border = t.border();
    const std::size_t m = border.size();
    if (m > 0) {
        const auto& R = t.inverse_border();
        std::vector<double> M((m + 1) * (m + 1), 0.0);
        for (std::size_t p = 0; p < m; ++p) {
            const Sample& sp = t.sample(border[p]);
            M[0 * (m + 1) + (p + 1)] = sp.label;
            M[(p + 1) * (m + 1) + 0] = sp.label;
            for (std::size_t q = 0; q < m; ++q) {
                const Sample& sq = t.sample(border[q]);
                M[(p + 1) * (m + 1) + (q + 1)] =
                    sp.label * sq.label * eval_kernel(t.kernel(), sp.features, sq.features);
            }
        }
        double err2 = 0.0;
        for (std::size_t r = 0; r <= m; ++r)
            for (std::size_t c = 0; c <= m; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k <= m; ++k)
                    acc += M[r * (m + 1) + k] * R[k * (m + 1) + c];
                const double d = acc - (r == c ? 1.0 : 0.0);
                err2 += d * d;
            }
        if (std::sqrt(err2) > 1e-6) return "bordered inverse identity error > 1e-6";
    }
    return {};
}

/// Checks the maintained LasvmState invariants.
inline std::string lasvm_invariant_violation(const LasvmTrainer& t) {
    const int n = t.support_size();
    double sum_a = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = t.alpha(i);
        const int y = t.support_sample(i).label;
        sum_a += a;
        const double lo = std::min(0.0, t.C() * y);
        const double hi = std::max(0.0, t.C() * y);
        if (a < lo - 1e-12 || a > hi + 1e-12) return "alpha outside its signed box";
    }
    if (std::abs(sum_a) > 1e-8) return "sum alpha != 0";
    for (int i = 0; i < n; ++i) {
        double g = t.support_sample(i).label;
        for (int j = 0; j < n; ++j)
            g -= t.alpha(j) * eval_kernel(t.kernel(), t.support_sample(j).features,
                                          t.support_sample(i).features);
        if (std::abs(g - t.gradient(i)) > 1e-8) return "cached gradient differs from recompute";
    }
    return {};
}

}  // namespace ssvm::testing
