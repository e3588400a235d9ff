#include "ssvm/isvm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ssvm/bytes.hpp"

namespace ssvm {

namespace {

constexpr double kTiny = 1e-12;
constexpr double kTieEps = 1e-12;

}  // namespace

Membership classify_membership(double alpha, double g, double C, double eps) {
    const double a_tol = 1e-12 * std::max(1.0, C);
    if (std::abs(alpha) <= a_tol && g >= -eps) return Membership::remainder;
    if (alpha > a_tol && alpha < C - a_tol && std::abs(g) <= eps) return Membership::support;
    if (std::abs(alpha - C) <= a_tol && g <= eps) return Membership::error_bound;
    std::ostringstream os;
    os << "inconsistent (alpha, g) pair: alpha=" << alpha << " g=" << g << " C=" << C;
    throw InvariantError(os.str());
}

std::vector<double> initial_inverse(int y_k, double k_kk) {
    // [[0, y],[y, K]]^-1 = [[-K, y],[y, 0]] since y^2 = 1
    return {-k_kk, static_cast<double>(y_k), static_cast<double>(y_k), 0.0};
}

std::vector<double> expand_inverse(const std::vector<double>& inverse, std::span<const double> eta_k,
                                   double k_kk, std::span<const double> beta_k) {
    const std::size_t m = eta_k.size();
    if (inverse.size() != m * m || beta_k.size() != m)
        throw ShapeError("expand_inverse: size mismatch");
    double kappa = k_kk;
    for (std::size_t i = 0; i < m; ++i) kappa += eta_k[i] * beta_k[i];
    if (kappa <= kKappaMin)
        throw InvariantError("expand_inverse: candidate is linearly dependent (kappa <= kappa_min)");
    std::vector<double> out((m + 1) * (m + 1), 0.0);
    const double inv_kappa = 1.0 / kappa;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c)
            out[r * (m + 1) + c] = inverse[r * m + c] + beta_k[r] * beta_k[c] * inv_kappa;
    for (std::size_t r = 0; r < m; ++r) {
        out[r * (m + 1) + m] = beta_k[r] * inv_kappa;
        out[m * (m + 1) + r] = beta_k[r] * inv_kappa;
    }
    out[m * (m + 1) + m] = inv_kappa;
    return out;
}

std::vector<double> shrink_inverse(const std::vector<double>& inverse, std::size_t k) {
    const std::size_t m = static_cast<std::size_t>(std::lround(std::sqrt(double(inverse.size()))));
    if (m * m != inverse.size() || k >= m || k == 0)
        throw ShapeError("shrink_inverse: bad index");
    const double pivot = inverse[k * m + k];
    if (std::abs(pivot) < 1e-12)
        throw InvariantError("shrink_inverse: pivot below threshold");
    std::vector<double> out((m - 1) * (m - 1));
    for (std::size_t r = 0, ro = 0; r < m; ++r) {
        if (r == k) continue;
        for (std::size_t c = 0, co = 0; c < m; ++c) {
            if (c == k) continue;
            out[ro * (m - 1) + co] = inverse[r * m + c] - inverse[r * m + k] * inverse[k * m + c] / pivot;
            ++co;
        }
        ++ro;
    }
    return out;
}

IsvmTrainer::IsvmTrainer(double C, KernelSpec kernel, std::size_t cache_bytes)
    : C_(C), kernel_(std::move(kernel)), cache_(cache_bytes) {
    if (!(C_ > 0.0)) throw ConfigError("C must be positive");
}

void IsvmTrainer::check_id(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= samples_.size())
        throw NotFoundError("sample id " + std::to_string(id) + " is not stored");
}

double IsvmTrainer::kernel_at(int i, int j) const {
    auto pin = cache_.row(kernel_, samples_, i, samples_.size());
    return pin[static_cast<std::size_t>(j)];
}

double IsvmTrainer::alpha(int id) const {
    check_id(id);
    return alpha_[static_cast<std::size_t>(id)];
}

Membership IsvmTrainer::membership(int id) const {
    check_id(id);
    return member_[static_cast<std::size_t>(id)];
}

const Sample& IsvmTrainer::sample(int id) const {
    check_id(id);
    return samples_[static_cast<std::size_t>(id)];
}

double IsvmTrainer::margin_gradient(int id) const {
    check_id(id);
    return g_[static_cast<std::size_t>(id)];
}

Sensitivities IsvmTrainer::sensitivities(int candidate_id) const {
    check_id(candidate_id);
    return sensitivities_raw(candidate_id);
}

Sensitivities IsvmTrainer::sensitivities_raw(int c) const {
    const std::size_t n = samples_.size();
    const int y_c = samples_[static_cast<std::size_t>(c)].label;
    const std::size_t m = border_.size();

    Sensitivities out;
    out.gamma.assign(n, 0.0);

    if (m == 0) {
        // no support vectors: mu alone moves, one unit of y_c * d_mu per step
        out.bias_only = true;
        out.beta = {static_cast<double>(y_c)};
        for (std::size_t i = 0; i < n; ++i)
            out.gamma[i] = samples_[i].label * y_c;
        out.gamma_candidate = 1.0;
        return out;
    }

    // border column of the candidate: [y_c, y_s y_c K_sc ...]
    std::vector<double> eta(m + 1);
    eta[0] = y_c;
    {
        auto row_c = cache_.row(kernel_, samples_, c, n);
        for (std::size_t p = 0; p < m; ++p) {
            const int s = border_[p];
            eta[p + 1] = samples_[static_cast<std::size_t>(s)].label * y_c *
                         row_c[static_cast<std::size_t>(s)];
        }
    }

    out.beta.assign(m + 1, 0.0);
    for (std::size_t r = 0; r <= m; ++r) {
        double acc = 0.0;
        for (std::size_t col = 0; col <= m; ++col) acc += inverse_[r * (m + 1) + col] * eta[col];
        out.beta[r] = -acc;
    }

    // h_i = d f(x_i) per unit d alpha_c; gamma_i = y_i h_i
    std::vector<double> h(n, out.beta[0]);
    {
        auto row_c = cache_.row(kernel_, samples_, c, n);
        for (std::size_t i = 0; i < n; ++i) h[i] += y_c * row_c[i];
    }
    for (std::size_t p = 0; p < m; ++p) {
        const int s = border_[p];
        const double w = out.beta[p + 1] * samples_[static_cast<std::size_t>(s)].label;
        if (w == 0.0) continue;
        auto row_s = cache_.row(kernel_, samples_, s, n);
        for (std::size_t i = 0; i < n; ++i) h[i] += w * row_s[i];
    }
    for (std::size_t i = 0; i < n; ++i) out.gamma[i] = samples_[i].label * h[i];
    for (int s : border_) out.gamma[static_cast<std::size_t>(s)] = 0.0;
    out.gamma_candidate = out.gamma[static_cast<std::size_t>(c)];
    return out;
}

namespace {

int event_rank(StepLimit::Event e) {
    switch (e) {
        case StepLimit::Event::support_to_remainder: return 0;
        case StepLimit::Event::support_to_error: return 1;
        case StepLimit::Event::margin_reached: return 2;
        case StepLimit::Event::candidate_hits_bound: return 3;
        case StepLimit::Event::candidate_joins_support: return 4;
        case StepLimit::Event::none: return 5;
    }
    return 5;
}

struct EventScan {
    StepLimit best;

    EventScan() {
        best.delta = std::numeric_limits<double>::infinity();
        best.event = StepLimit::Event::none;
        best.sample = std::numeric_limits<int>::max();
    }

    void consider(double delta, StepLimit::Event ev, int sample) {
        delta = std::max(delta, 0.0);
        const bool better = delta < best.delta - kTieEps;
        const bool tie = !better && delta <= best.delta + kTieEps;
        if (better ||
            (tie && (sample < best.sample ||
                     (sample == best.sample && event_rank(ev) < event_rank(best.event))))) {
            best.delta = delta;
            best.event = ev;
            best.sample = sample;
        }
    }
};

}  // namespace

StepLimit IsvmTrainer::scan_events(int c, int direction, const Sensitivities& sens) const {
    EventScan scan;
    const std::size_t ci = static_cast<std::size_t>(c);

    // case 1: a border coefficient reaches a box bound
    if (!sens.bias_only) {
        for (std::size_t p = 0; p < border_.size(); ++p) {
            const int s = border_[p];
            const double move = direction * sens.beta[p + 1];
            if (move > kTiny)
                scan.consider((C_ - alpha_[static_cast<std::size_t>(s)]) / move,
                              StepLimit::Event::support_to_error, s);
            else if (move < -kTiny)
                scan.consider(alpha_[static_cast<std::size_t>(s)] / (-move),
                              StepLimit::Event::support_to_remainder, s);
        }
    }
    // case 2: a non-border sample's gradient reaches the margin
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const int ii = static_cast<int>(i);
        if (ii == c || member_[i] == Membership::support) continue;
        if (std::find(blocked_.begin(), blocked_.end(), ii) != blocked_.end()) continue;
        const double dg = direction * sens.gamma[i];
        if (g_[i] > kTiny && dg < -kTiny)
            scan.consider(-g_[i] / dg, StepLimit::Event::margin_reached, ii);
        else if (g_[i] < -kTiny && dg > kTiny)
            scan.consider(-g_[i] / dg, StepLimit::Event::margin_reached, ii);
        else if (std::abs(g_[i]) <= kTiny) {
            // sitting on the margin; re-enters the border if pushed inward
            if ((member_[i] == Membership::remainder && dg < -kTiny) ||
                (member_[i] == Membership::error_bound && dg > kTiny))
                scan.consider(0.0, StepLimit::Event::margin_reached, ii);
        }
    }
    // cases 3 and 4: the candidate reaches the margin or its box bound
    if (direction > 0) {
        if (!sens.bias_only)
            scan.consider(C_ - alpha_[ci], StepLimit::Event::candidate_hits_bound, c);
        if (std::find(blocked_.begin(), blocked_.end(), c) == blocked_.end()) {
            const double dgc = direction * sens.gamma_candidate;
            if (std::abs(g_[ci]) <= kTiny)
                // parked exactly on the margin by an earlier refused expansion
                scan.consider(0.0, StepLimit::Event::candidate_joins_support, c);
            else if (dgc > kTiny && g_[ci] < 0.0)
                scan.consider(-g_[ci] / dgc, StepLimit::Event::candidate_joins_support, c);
        }
    } else if (!sens.bias_only) {
        scan.consider(alpha_[ci], StepLimit::Event::candidate_hits_bound, c);
    }
    return scan.best;
}

StepLimit IsvmTrainer::max_increment(int c, const Sensitivities& sens) const {
    check_id(c);
    return scan_events(c, +1, sens);
}

int IsvmTrainer::learn(const Sample& s) {
    s.validate();
    if (!samples_.empty() && s.features.size() != samples_.front().features.size())
        throw ShapeError("sample dimension does not match trainer feature_dim");

    const int id = static_cast<int>(samples_.size());
    samples_.push_back(s);
    alpha_.push_back(0.0);
    member_.push_back(Membership::remainder);

    if (samples_.size() == 1) {
        mu_ = s.label;  // first sample: bias alone satisfies its KKT condition
        g_.push_back(0.0);
        return id;
    }

    // fresh gradient of the candidate
    double f = mu_;
    {
        auto row = cache_.row(kernel_, samples_, id, samples_.size());
        for (std::size_t j = 0; j + 1 < samples_.size(); ++j)
            if (alpha_[j] != 0.0) f += alpha_[j] * samples_[j].label * row[j];
    }
    g_.push_back(s.label * f - 1.0);

    if (g_.back() >= -kKktEpsilon) return id;  // KKT already satisfied at entry

    drive(id, +1);

    // sweep transitional border members sitting exactly on a box bound
    std::vector<int> at_zero, at_c;
    for (int b : border_) {
        if (alpha_[static_cast<std::size_t>(b)] == 0.0) at_zero.push_back(b);
        else if (alpha_[static_cast<std::size_t>(b)] == C_) at_c.push_back(b);
    }
    for (int b : at_zero) {
        leave_border(b);
        member_[static_cast<std::size_t>(b)] = Membership::remainder;
    }
    for (int b : at_c) {
        leave_border(b);
        member_[static_cast<std::size_t>(b)] = Membership::error_bound;
    }
    return id;
}

void IsvmTrainer::drive(int c, int direction) {
    const std::size_t ci = static_cast<std::size_t>(c);
    blocked_.clear();
    const double a_tol = 1e-12 * std::max(1.0, C_);
    const long guard = 10 * static_cast<long>(std::max<std::size_t>(samples_.size(), 1));
    long iters = 0;
    while (true) {
        // the candidate can land on its target bound through a tie with
        // another event; the drive is complete at that point
        if (direction < 0 && alpha_[ci] <= a_tol) {
            alpha_[ci] = 0.0;
            return;
        }
        if (direction > 0 && alpha_[ci] >= C_ - a_tol) {
            alpha_[ci] = C_;
            member_[ci] = Membership::error_bound;
            return;
        }
        if (++iters > guard) {
            std::ostringstream os;
            os << "isvm bookkeeping did not converge: candidate=" << c
               << " alpha_c=" << alpha_[ci] << " g_c=" << g_[ci] << " n=" << samples_.size()
               << " |S|=" << border_.size() << " iterations=" << iters;
            throw ConvergenceError(os.str());
        }
        const Sensitivities sens = sensitivities_raw(c);
        const StepLimit lim = scan_events(c, direction, sens);
        if (lim.event == StepLimit::Event::none)
            throw ConvergenceError("isvm bookkeeping found no limiting event (divergent step)");
        if (apply_event(c, direction, sens, lim)) return;
    }
}

bool IsvmTrainer::apply_event(int c, int direction, const Sensitivities& sens,
                              const StepLimit& lim) {
    const std::size_t ci = static_cast<std::size_t>(c);
    const double delta = lim.delta;

    // move coefficients, bias and gradients along the sensitivity direction
    mu_ += direction * sens.beta[0] * delta;
    if (!sens.bias_only) {
        for (std::size_t p = 0; p < border_.size(); ++p) {
            const std::size_t s = static_cast<std::size_t>(border_[p]);
            alpha_[s] = std::clamp(alpha_[s] + direction * sens.beta[p + 1] * delta, 0.0, C_);
        }
        alpha_[ci] = std::clamp(alpha_[ci] + direction * delta, 0.0, C_);
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (static_cast<int>(i) == c || member_[i] == Membership::support) continue;
        g_[i] += direction * sens.gamma[i] * delta;
    }
    g_[ci] += direction * sens.gamma_candidate * delta;

    switch (lim.event) {
        case StepLimit::Event::support_to_remainder: {
            const std::size_t s = static_cast<std::size_t>(lim.sample);
            alpha_[s] = 0.0;
            leave_border(lim.sample);
            member_[s] = Membership::remainder;
            blocked_.clear();
            return false;
        }
        case StepLimit::Event::support_to_error: {
            const std::size_t s = static_cast<std::size_t>(lim.sample);
            alpha_[s] = C_;
            leave_border(lim.sample);
            member_[s] = Membership::error_bound;
            blocked_.clear();
            return false;
        }
        case StepLimit::Event::margin_reached: {
            const std::size_t i = static_cast<std::size_t>(lim.sample);
            g_[i] = 0.0;
            if (try_enter_border(lim.sample)) {
                member_[i] = Membership::support;
                blocked_.clear();
            } else {
                blocked_.push_back(lim.sample);  // linearly dependent; stays put
            }
            return false;
        }
        case StepLimit::Event::candidate_joins_support: {
            g_[ci] = 0.0;
            if (try_enter_border(c)) {
                member_[ci] = Membership::support;
                blocked_.clear();
                return true;
            }
            blocked_.push_back(c);
            return false;
        }
        case StepLimit::Event::candidate_hits_bound: {
            if (direction > 0) {
                alpha_[ci] = C_;
                member_[ci] = Membership::error_bound;
            } else {
                alpha_[ci] = 0.0;
            }
            return true;
        }
        case StepLimit::Event::none: break;
    }
    throw InvariantError("unhandled bookkeeping event");
}

bool IsvmTrainer::try_enter_border(int id) {
    const std::size_t m = border_.size();
    const std::size_t idx = static_cast<std::size_t>(id);
    if (m == 0) {
        inverse_ = initial_inverse(samples_[idx].label, kernel_at(id, id));
        border_ = {id};
        return true;
    }
    std::vector<double> eta(m + 1);
    eta[0] = samples_[idx].label;
    {
        auto row = cache_.row(kernel_, samples_, id, samples_.size());
        for (std::size_t p = 0; p < m; ++p) {
            const int s = border_[p];
            eta[p + 1] = samples_[static_cast<std::size_t>(s)].label * samples_[idx].label *
                         row[static_cast<std::size_t>(s)];
        }
    }
    std::vector<double> beta(m + 1, 0.0);
    for (std::size_t r = 0; r <= m; ++r) {
        double acc = 0.0;
        for (std::size_t col = 0; col <= m; ++col) acc += inverse_[r * (m + 1) + col] * eta[col];
        beta[r] = -acc;
    }
    try {
        inverse_ = expand_inverse(inverse_, eta, kernel_at(id, id), beta);
    } catch (const InvariantError&) {
        return false;
    }
    border_.push_back(id);
    return true;
}

void IsvmTrainer::leave_border(int id) {
    auto it = std::find(border_.begin(), border_.end(), id);
    if (it == border_.end()) throw NotFoundError("sample is not in the border");
    const std::size_t pos = static_cast<std::size_t>(it - border_.begin());
    if (border_.size() == 1) {
        border_.clear();
        inverse_.clear();
        blocked_.clear();
        return;
    }
    try {
        inverse_ = shrink_inverse(inverse_, pos + 1);
        border_.erase(it);
    } catch (const InvariantError&) {
        border_.erase(it);
        rebuild_inverse();  // degenerate pivot: direct solve, rare
    }
    blocked_.clear();
}

void IsvmTrainer::rebuild_inverse() {
    const std::size_t m = border_.size();
    if (m == 0) {
        inverse_.clear();
        return;
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<long>(m) + 1, static_cast<long>(m) + 1);
    for (std::size_t p = 0; p < m; ++p) {
        const int s = border_[p];
        const double y = samples_[static_cast<std::size_t>(s)].label;
        M(0, static_cast<long>(p) + 1) = y;
        M(static_cast<long>(p) + 1, 0) = y;
        for (std::size_t q = 0; q <= p; ++q) {
            const int t = border_[q];
            const double v = y * samples_[static_cast<std::size_t>(t)].label * kernel_at(s, t);
            M(static_cast<long>(p) + 1, static_cast<long>(q) + 1) = v;
            M(static_cast<long>(q) + 1, static_cast<long>(p) + 1) = v;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) throw InvariantError("bordered matrix is singular on rebuild");
    Eigen::MatrixXd R = lu.inverse();
    inverse_.assign((m + 1) * (m + 1), 0.0);
    for (std::size_t r = 0; r <= m; ++r)
        for (std::size_t c = 0; c <= m; ++c)
            inverse_[r * (m + 1) + c] = R(static_cast<long>(r), static_cast<long>(c));
}

void IsvmTrainer::unlearn(int id) {
    check_id(id);
    const std::size_t idx = static_cast<std::size_t>(id);

    if (member_[idx] == Membership::remainder || alpha_[idx] == 0.0) {
        if (std::find(border_.begin(), border_.end(), id) != border_.end()) {
            leave_border(id);
        }
        erase_sample(id);
        return;
    }

    if (member_[idx] == Membership::support) leave_border(id);
    drive(id, -1);
    erase_sample(id);

    std::vector<int> at_zero, at_c;
    for (int b : border_) {
        if (alpha_[static_cast<std::size_t>(b)] == 0.0) at_zero.push_back(b);
        else if (alpha_[static_cast<std::size_t>(b)] == C_) at_c.push_back(b);
    }
    for (int b : at_zero) {
        leave_border(b);
        member_[static_cast<std::size_t>(b)] = Membership::remainder;
    }
    for (int b : at_c) {
        leave_border(b);
        member_[static_cast<std::size_t>(b)] = Membership::error_bound;
    }
}

void IsvmTrainer::erase_sample(int id) {
    const std::size_t idx = static_cast<std::size_t>(id);
    samples_.erase(samples_.begin() + static_cast<long>(idx));
    alpha_.erase(alpha_.begin() + static_cast<long>(idx));
    g_.erase(g_.begin() + static_cast<long>(idx));
    member_.erase(member_.begin() + static_cast<long>(idx));
    for (int& b : border_) {
        if (b == id) throw InvariantError("erasing a border member");
        if (b > id) --b;
    }
    blocked_.clear();
    cache_.invalidate();  // ids shift; rows are recomputed on demand
    if (samples_.empty()) mu_ = 0.0;
}

double IsvmTrainer::dual_objective() const {
    double lin = 0.0, quad = 0.0;
    const std::size_t n = samples_.size();
    for (std::size_t a = 0; a < n; ++a) {
        if (alpha_[a] == 0.0) continue;
        lin += alpha_[a];
        auto row = cache_.row(kernel_, samples_, static_cast<int>(a), n);
        for (std::size_t b = 0; b < n; ++b) {
            if (alpha_[b] == 0.0) continue;
            quad += alpha_[a] * alpha_[b] * samples_[a].label * samples_[b].label * row[b];
        }
    }
    return lin - 0.5 * quad;
}

Model IsvmTrainer::export_model() const {
    Model m;
    m.kernel = kernel_;
    m.C = C_;
    m.bias = mu_;
    m.convention = CoefConvention::unsigned_alpha;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (alpha_[i] > 0.0) {
            m.support_samples.push_back(samples_[i]);
            m.coefficients.push_back(alpha_[i]);
        }
    }
    return m;
}

void IsvmTrainer::serialize(std::vector<std::uint8_t>& out) const {
    ByteWriter w(out);
    w.f64(C_);
    w.str(kernel_.to_text());
    w.u64(samples_.size());
    for (const Sample& s : samples_) {
        w.u32(static_cast<std::uint32_t>(s.features.size()));
        for (double v : s.features) w.f64(v);
        w.u8(s.label > 0 ? 1 : 0);
    }
    w.f64_vec(alpha_);
    w.f64_vec(g_);
    for (Membership m : member_) w.u8(static_cast<std::uint8_t>(m));
    w.f64(mu_);
    w.u64(border_.size());
    for (int b : border_) w.u32(static_cast<std::uint32_t>(b));
    w.f64_vec(inverse_);
}

IsvmTrainer IsvmTrainer::deserialize(const std::uint8_t* data, std::size_t size,
                                     std::size_t& offset) {
    ByteReader r(data, size, offset);
    const double C = r.f64();
    const KernelSpec spec = KernelSpec::parse(r.str());
    IsvmTrainer t(C, spec);
    const std::uint64_t n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint32_t dim = r.u32();
        std::vector<double> f(dim);
        for (auto& v : f) v = r.f64();
        const int label = r.u8() ? +1 : -1;
        t.samples_.emplace_back(std::move(f), label);
    }
    t.alpha_ = r.f64_vec();
    t.g_ = r.f64_vec();
    t.member_.resize(n);
    for (auto& m : t.member_) m = static_cast<Membership>(r.u8());
    t.mu_ = r.f64();
    const std::uint64_t m = r.u64();
    for (std::uint64_t i = 0; i < m; ++i) t.border_.push_back(static_cast<int>(r.u32()));
    t.inverse_ = r.f64_vec();
    if (t.alpha_.size() != n || t.g_.size() != n ||
        t.inverse_.size() != (m ? (m + 1) * (m + 1) : 0))
        throw CorruptionError("isvm payload is inconsistent");
    return t;
}

}  // namespace ssvm
