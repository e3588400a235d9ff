#include "ssvm/lasvm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ssvm/bytes.hpp"
#include "ssvm/data.hpp"

namespace ssvm {

namespace {

constexpr double kCurvatureFloor = 1e-12;
constexpr long kFinishGuard = 1000000;

double a_max(double C, int y) { return std::max(0.0, C * y); }
double a_min(double C, int y) { return std::min(0.0, C * y); }

}  // namespace

void EpochSchedule::validate() const {
    if (epoch_size < 1) throw ConfigError("epoch_size must be >= 1");
    if (epochs_before_finish < 1) throw ConfigError("epochs_before_finish must be >= 1");
}

double direction_step(double g_i, double g_j, double k_ii, double k_jj, double k_ij,
                      double alpha_i, double alpha_j, double C, int y_i, int y_j) {
    const double curvature = k_ii + k_jj - 2.0 * k_ij;
    double lambda = (curvature > kCurvatureFloor)
                        ? (g_i - g_j) / curvature
                        : std::numeric_limits<double>::infinity();
    lambda = std::min(lambda, a_max(C, y_i) - alpha_i);
    lambda = std::min(lambda, alpha_j - a_min(C, y_j));
    return std::max(lambda, 0.0);
}

LasvmTrainer::LasvmTrainer(double C, double tau, KernelSpec kernel)
    : C_(C), tau_(tau), kernel_(std::move(kernel)) {
    if (!(C_ > 0.0)) throw ConfigError("C must be positive");
    if (!(tau_ > 0.0)) throw ConfigError("tau must be positive");
}

double LasvmTrainer::k(int i, int j) const {
    return eval_kernel(kernel_, sv_[static_cast<std::size_t>(i)].sample.features,
                       sv_[static_cast<std::size_t>(j)].sample.features);
}

std::vector<double> LasvmTrainer::row_against_support(const Sample& x) const {
    std::vector<double> row(sv_.size());
    for (std::size_t s = 0; s < sv_.size(); ++s)
        row[s] = eval_kernel(kernel_, x.features, sv_[s].sample.features);
    return row;
}

bool LasvmTrainer::is_tau_violating(int i, int j) const {
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= sv_.size() ||
        static_cast<std::size_t>(j) >= sv_.size())
        throw NotFoundError("support index out of range");
    const Entry& a = sv_[static_cast<std::size_t>(i)];
    const Entry& b = sv_[static_cast<std::size_t>(j)];
    return a.alpha < a_max(C_, a.sample.label) && b.alpha > a_min(C_, b.sample.label) &&
           a.g - b.g > tau_;
}

void LasvmTrainer::pair_step(int i, int j, const std::vector<double>& row_i,
                             const std::vector<double>& row_j) {
    Entry& a = sv_[static_cast<std::size_t>(i)];
    Entry& b = sv_[static_cast<std::size_t>(j)];
    const double lambda =
        direction_step(a.g, b.g, row_i[static_cast<std::size_t>(i)],
                       row_j[static_cast<std::size_t>(j)], row_i[static_cast<std::size_t>(j)],
                       a.alpha, b.alpha, C_, a.sample.label, b.sample.label);
    if (lambda <= 0.0) return;
    a.alpha = std::clamp(a.alpha + lambda, a_min(C_, a.sample.label), a_max(C_, a.sample.label));
    b.alpha = std::clamp(b.alpha - lambda, a_min(C_, b.sample.label), a_max(C_, b.sample.label));
    for (std::size_t s = 0; s < sv_.size(); ++s) sv_[s].g -= lambda * (row_i[s] - row_j[s]);
}

int LasvmTrainer::arg_extreme(bool want_max) const {
    int best = -1;
    double best_g = want_max ? -std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < sv_.size(); ++s) {
        const Entry& e = sv_[s];
        const bool eligible = want_max ? e.alpha < a_max(C_, e.sample.label)
                                       : e.alpha > a_min(C_, e.sample.label);
        if (!eligible) continue;
        if (want_max ? e.g > best_g : e.g < best_g) {
            best_g = e.g;
            best = static_cast<int>(s);
        }
    }
    return best;
}

void LasvmTrainer::process(const Sample& candidate) {
    candidate.validate();
    if (!sv_.empty() && candidate.features.size() != sv_.front().sample.features.size())
        throw ShapeError("sample dimension does not match trainer feature_dim");

    for (const Entry& e : sv_)
        if (e.sample.label == candidate.label && e.sample.features == candidate.features)
            return;  // already in S

    Entry entry;
    entry.sample = candidate;
    entry.alpha = 0.0;
    double gc = candidate.label;
    {
        const std::vector<double> row = row_against_support(candidate);
        for (std::size_t s = 0; s < sv_.size(); ++s) gc -= sv_[s].alpha * row[s];
    }
    entry.g = gc;
    sv_.push_back(std::move(entry));
    const int c = static_cast<int>(sv_.size()) - 1;

    // extreme partner on the opposite side of the candidate's label
    int i, j;
    if (candidate.label > 0) {
        i = c;
        j = arg_extreme(false);
        if (j == c) j = -1;
    } else {
        j = c;
        i = arg_extreme(true);
        if (i == c) i = -1;
    }
    if (i < 0 || j < 0) return;  // no eligible partner (cold start)
    if (!is_tau_violating(i, j)) return;

    const std::vector<double> row_i = row_against_support(sv_[static_cast<std::size_t>(i)].sample);
    const std::vector<double> row_j = row_against_support(sv_[static_cast<std::size_t>(j)].sample);
    pair_step(i, j, row_i, row_j);
}

ReprocessResult LasvmTrainer::reprocess() {
    ReprocessResult res;
    int i = arg_extreme(true);
    int j = arg_extreme(false);
    if (i < 0 || j < 0) return res;  // no eligible pair; delta unchanged
    res.eligible = true;

    if (is_tau_violating(i, j)) {
        const std::vector<double> row_i =
            row_against_support(sv_[static_cast<std::size_t>(i)].sample);
        const std::vector<double> row_j =
            row_against_support(sv_[static_cast<std::size_t>(j)].sample);
        pair_step(i, j, row_i, row_j);
        res.stepped = true;
        i = arg_extreme(true);
        j = arg_extreme(false);
        if (i < 0 || j < 0) return res;
    }

    const double g_i = sv_[static_cast<std::size_t>(i)].g;
    const double g_j = sv_[static_cast<std::size_t>(j)].g;

    // prune zero-coefficient vectors outside the new (i, j) bounds
    std::vector<Entry> kept;
    kept.reserve(sv_.size());
    for (const Entry& e : sv_) {
        const bool prune = e.alpha == 0.0 && ((e.sample.label > 0 && e.g <= g_j) ||
                                              (e.sample.label < 0 && e.g >= g_i));
        if (prune)
            ++res.removed;
        else
            kept.push_back(e);
    }
    sv_ = std::move(kept);

    b_ = (g_i + g_j) / 2.0;
    delta_ = g_i - g_j;
    return res;
}

void LasvmTrainer::finish() { finish(tau_); }

void LasvmTrainer::finish(double tau) {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    // reprocess steps at the requested tolerance for the duration of the call
    const double saved = tau_;
    tau_ = tau;
    long iters = 0;
    try {
        while (delta_ >= tau) {
            if (++iters > kFinishGuard)
                throw ConvergenceError("lasvm finishing step exceeded its iteration guard");
            const ReprocessResult r = reprocess();
            if (!r.eligible) break;  // no pair can move; gap cannot improve
            if (!r.stepped && delta_ >= tau) break;  // extremes are fixed points
        }
    } catch (...) {
        tau_ = saved;
        throw;
    }
    tau_ = saved;
}

TrainLog LasvmTrainer::train_online(const Dataset& stream, const EpochSchedule& schedule) {
    return train_online_from(stream, schedule, 0, {});
}

TrainLog LasvmTrainer::train_online_from(
    const Dataset& stream, const EpochSchedule& schedule, long start_consumed,
    const std::function<bool(long, const TrainLog&)>& after_sample) {
    if (stream.empty()) throw ConfigError("train_online requires a nonempty stream");
    schedule.validate();
    const long n = static_cast<long>(stream.size());
    if (start_consumed < 0 || start_consumed > n)
        throw ConfigError("start_consumed out of range");
    using clock = std::chrono::steady_clock;

    TrainLog log;
    const long epoch_size = schedule.epoch_size;
    long consumed = start_consumed;
    long last_finish = -1;
    int epoch = static_cast<int>(consumed / epoch_size);
    long in_epoch = consumed % epoch_size;
    while (consumed < n) {
        const long begin = static_cast<long>(epoch) * epoch_size;
        const long len = std::min<long>(epoch_size, n - begin);
        const std::vector<int> perm =
            shuffle_epoch(static_cast<std::size_t>(len), epoch, schedule.shuffle_seed);
        for (long p = in_epoch; p < len; ++p) {
            const int idx = static_cast<int>(begin) + perm[static_cast<std::size_t>(p)];
            const auto t0 = clock::now();
            process(stream[static_cast<std::size_t>(idx)]);
            reprocess();
            const double secs = std::chrono::duration<double>(clock::now() - t0).count();
            log.events.push_back({idx, secs, support_size()});
            log.online_seconds += secs;
            ++consumed;
            const bool epoch_done = p + 1 == len;
            if (epoch_done && (epoch + 1) % schedule.epochs_before_finish == 0) {
                const auto tf = clock::now();
                finish();
                log.finish_seconds += std::chrono::duration<double>(clock::now() - tf).count();
                log.finishes.push_back(consumed);
                last_finish = consumed;
            }
            if (after_sample && !after_sample(consumed, log)) return log;
        }
        in_epoch = 0;
        ++epoch;
    }
    if (last_finish != consumed) {  // terminal finish, unless one just ran
        const auto t0 = clock::now();
        finish();
        log.finish_seconds += std::chrono::duration<double>(clock::now() - t0).count();
        log.finishes.push_back(consumed);
    }
    return log;
}

double LasvmTrainer::dual_objective() const {
    double lin = 0.0, quad = 0.0;
    for (std::size_t a = 0; a < sv_.size(); ++a) {
        if (sv_[a].alpha == 0.0) continue;
        lin += sv_[a].sample.label * sv_[a].alpha;
        for (std::size_t b = 0; b < sv_.size(); ++b) {
            if (sv_[b].alpha == 0.0) continue;
            quad += sv_[a].alpha * sv_[b].alpha * k(static_cast<int>(a), static_cast<int>(b));
        }
    }
    return lin - 0.5 * quad;
}

Model LasvmTrainer::export_model() const {
    Model m;
    m.kernel = kernel_;
    m.C = C_;
    m.bias = b_;
    m.convention = CoefConvention::signed_alpha;
    for (const Entry& e : sv_) {
        if (e.alpha != 0.0) {
            m.support_samples.push_back(e.sample);
            m.coefficients.push_back(e.alpha);
        }
    }
    return m;
}

void LasvmTrainer::serialize(std::vector<std::uint8_t>& out) const {
    ByteWriter w(out);
    w.f64(C_);
    w.f64(tau_);
    w.str(kernel_.to_text());
    w.u64(sv_.size());
    for (const Entry& e : sv_) {
        w.u32(static_cast<std::uint32_t>(e.sample.features.size()));
        for (double v : e.sample.features) w.f64(v);
        w.u8(e.sample.label > 0 ? 1 : 0);
        w.f64(e.alpha);
        w.f64(e.g);
    }
    w.f64(b_);
    w.f64(delta_);
}

LasvmTrainer LasvmTrainer::deserialize(const std::uint8_t* data, std::size_t size,
                                       std::size_t& offset) {
    ByteReader r(data, size, offset);
    const double C = r.f64();
    const double tau = r.f64();
    const KernelSpec spec = KernelSpec::parse(r.str());
    LasvmTrainer t(C, tau, spec);
    const std::uint64_t n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        Entry e;
        const std::uint32_t dim = r.u32();
        std::vector<double> f(dim);
        for (auto& v : f) v = r.f64();
        const int label = r.u8() ? +1 : -1;
        e.sample = Sample(std::move(f), label);
        e.alpha = r.f64();
        e.g = r.f64();
        t.sv_.push_back(std::move(e));
    }
    t.b_ = r.f64();
    t.delta_ = r.f64();
    return t;
}

}  // namespace ssvm
