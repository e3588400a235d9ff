#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssvm/kernel.hpp"
#include "ssvm/model.hpp"
#include "ssvm/types.hpp"

namespace ssvm {

/// KKT partition of a stored sample.
enum class Membership : std::uint8_t {
    support = 0,    // 0 < alpha < C, margin gradient ~ 0
    error_bound = 1,  // alpha = C, margin gradient <= 0
    remainder = 2,  // alpha = 0, margin gradient >= 0
};

/// KKT tolerance shared by membership classification and the invariant suite.
inline constexpr double kKktEpsilon = 1e-6;

/// Minimal Schur complement for a sample to enter the bordered system;
/// below it the sample is treated as linearly dependent.
inline constexpr double kKappaMin = 1e-12;

/// Classifies (alpha, g) into S/E/R; any pair outside all three cases means
/// the state is corrupt.
Membership classify_membership(double alpha, double g, double C, double eps = kKktEpsilon);

/// Coefficient/margin sensitivities for a unit increment of a candidate's
/// coefficient. beta runs over {mu} followed by the border order; gamma runs
/// over every stored sample id (zero for border members).
struct Sensitivities {
    bool bias_only = false;       // no support vectors: only mu moves
    std::vector<double> beta;     // [d_mu, d_alpha_s ...]
    std::vector<double> gamma;    // per stored sample, d_g per unit step
    double gamma_candidate = 0.0;
};

/// Outcome of the bookkeeping scan: the largest coefficient increment before
/// a set transition fires, and which transition it is.
struct StepLimit {
    enum class Event : std::uint8_t {
        support_to_remainder,  // a border coefficient reaches 0
        support_to_error,      // a border coefficient reaches C
        margin_reached,        // a non-border sample's g reaches 0
        candidate_joins_support,
        candidate_hits_bound,  // alpha_c reaches C (learn) or 0 (unlearn)
        none,
    };
    double delta = 0.0;
    Event event = Event::none;
    int sample = -1;
};

/// First bordered inverse when the border holds only {mu, k}:
/// [[0, y_k], [y_k, K_kk]]^-1 computed directly.
std::vector<double> initial_inverse(int y_k, double k_kk);

/// Rank-one expansion of the bordered inverse with border column eta_k,
/// diagonal K_kk and sensitivity column beta_k = -Q^-1 eta_k.
/// Requires kappa = K_kk + eta_k . beta_k > kKappaMin.
std::vector<double> expand_inverse(const std::vector<double>& inverse, std::span<const double> eta_k,
                                   double k_kk, std::span<const double> beta_k);

/// Reverse rank-one removal of border position k (1-based within the matrix;
/// position 0 is mu and never leaves). Throws InvariantError when the
/// diagonal pivot is below 1e-12; callers rebuild directly in that case.
std::vector<double> shrink_inverse(const std::vector<double>& inverse, std::size_t k);

/// Exact lossless incremental/decremental SVM. Samples are learned one at a
/// time; every stored sample is kept in its KKT set, and any stored sample
/// can be unlearned, leaving the exact solution over the remainder.
class IsvmTrainer {
public:
    IsvmTrainer(double C, KernelSpec kernel, std::size_t cache_bytes = 256u << 20);

    /// Inserts one sample and restores the KKT partition. Returns the
    /// sample's stable id (its ingestion index).
    int learn(const Sample& sample);

    /// Removes a stored sample; remaining state is the exact solution over
    /// the remaining samples. Later ids shift down by one.
    void unlearn(int id);

    /// Maintained margin gradient g_i = y_i f(x_i) - 1.
    double margin_gradient(int id) const;

    /// Sensitivity system for a stored candidate against the current border.
    Sensitivities sensitivities(int candidate_id) const;

    /// Bookkeeping: the largest candidate increment before any of the four
    /// transition events, with ties broken toward the lowest sample id.
    StepLimit max_increment(int candidate_id, const Sensitivities& sens) const;

    /// Standard dual W(alpha); 0 for the empty state.
    double dual_objective() const;

    Model export_model() const;

    // accessors
    std::size_t size() const { return samples_.size(); }
    double bias() const { return mu_; }
    double C() const { return C_; }
    const KernelSpec& kernel() const { return kernel_; }
    double alpha(int id) const;
    Membership membership(int id) const;
    const Sample& sample(int id) const;
    const std::vector<int>& border() const { return border_; }
    const std::vector<double>& inverse_border() const { return inverse_; }
    const KernelCache& cache() const { return cache_; }

    // checkpoint support: full-state binary snapshot
    void serialize(std::vector<std::uint8_t>& out) const;
    static IsvmTrainer deserialize(const std::uint8_t* data, std::size_t size, std::size_t& offset);

    /// Recomputes the bordered inverse by direct solve (degenerate shrink
    /// pivots and checkpoint recovery).
    void rebuild_inverse();

private:
    void check_id(int id) const;
    double kernel_at(int i, int j) const;
    StepLimit scan_events(int c, int direction, const Sensitivities& sens) const;
    void drive(int c, int direction);
    bool apply_event(int c, int direction, const Sensitivities& sens, const StepLimit& lim);
    bool try_enter_border(int id);
    void leave_border(int id);
    void erase_sample(int id);
    Sensitivities sensitivities_raw(int candidate_id) const;

    double C_;
    KernelSpec kernel_;
    std::vector<Sample> samples_;
    std::vector<double> alpha_;
    std::vector<double> g_;
    std::vector<Membership> member_;
    double mu_ = 0.0;
    std::vector<int> border_;        // sample ids in border order (after mu)
    std::vector<double> inverse_;    // row-major (|border|+1)^2; empty when no border
    std::vector<int> blocked_;       // ids refused border entry since last border change
    mutable KernelCache cache_;
};

}  // namespace ssvm
