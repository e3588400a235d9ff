#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "ssvm/kernel.hpp"
#include "ssvm/model.hpp"
#include "ssvm/types.hpp"

namespace ssvm {

/// Streaming schedule: samples are consumed in consecutive chunks of
/// epoch_size, each chunk shuffled by (shuffle_seed, epoch index); a
/// finishing step runs after every epochs_before_finish epochs and at
/// end-of-stream.
struct EpochSchedule {
    int epoch_size = 200;
    int epochs_before_finish = 5;
    std::uint64_t shuffle_seed = 0;

    void validate() const;
};

/// Per-sample record of the online phase.
struct TrainEvent {
    int sample_index = 0;
    double seconds = 0.0;  // process + reprocess cost of that sample
    int support_size = 0;
};

/// Event log returned by train_online.
struct TrainLog {
    std::vector<TrainEvent> events;
    std::vector<long> finishes;       // consumed counts at which finish() ran
    double online_seconds = 0.0;      // cumulative process/reprocess time
    double finish_seconds = 0.0;      // cumulative finishing time
};

struct ReprocessResult {
    int removed = 0;     // support vectors pruned
    bool stepped = false;  // a tau-violating step was applied
    bool eligible = false; // both extreme sides had a candidate
};

/// lambda = min((g_i-g_j)/(K_ii+K_jj-2K_ij), max(0,Cy_i)-alpha_i,
///              alpha_j-min(0,Cy_j)); near-zero curvature falls back to the
/// box clips alone.
double direction_step(double g_i, double g_j, double k_ii, double k_jj, double k_ij,
                      double alpha_i, double alpha_j, double C, int y_i, int y_j);

/// Semi-online kernel SVM: PROCESS inserts candidates via tau-violating pair
/// steps, REPROCESS tightens and prunes, finish() drives the witness gap
/// delta below tau.
class LasvmTrainer {
public:
    LasvmTrainer(double C, double tau, KernelSpec kernel);

    /// True iff (i, j) is a tau-violating pair (positions into the support set).
    bool is_tau_violating(int i, int j) const;

    /// Inserts a candidate and applies one pair step against the extreme
    /// partner. Inserting a sample already in S is a no-op.
    void process(const Sample& candidate);

    /// One extreme-pair step, pruning of out-of-bound zero-coefficient
    /// vectors, and recomputation of b and delta.
    ReprocessResult reprocess();

    /// Repeated reprocess until delta < tau (the trainer's own tau).
    void finish();
    void finish(double tau);

    /// Consumes a stream under the schedule; state accumulates across calls.
    TrainLog train_online(const Dataset& stream, const EpochSchedule& schedule);

    /// Resumable variant: starts at `start_consumed` samples already seen and
    /// invokes `after_sample(consumed, log_so_far)` after each sample's
    /// pipeline (including any epoch-boundary finishing step); a false return
    /// stops the walk before the terminal finish. Streaming checkpoints and
    /// learning curves hook in here so every consumer walks the stream
    /// identically.
    TrainLog train_online_from(const Dataset& stream, const EpochSchedule& schedule,
                               long start_consumed,
                               const std::function<bool(long, const TrainLog&)>& after_sample);

    double bias() const { return b_; }
    double delta() const { return delta_; }
    double tau() const { return tau_; }
    double C() const { return C_; }
    const KernelSpec& kernel() const { return kernel_; }
    int support_size() const { return static_cast<int>(sv_.size()); }
    const Sample& support_sample(int i) const { return sv_.at(static_cast<std::size_t>(i)).sample; }
    double alpha(int i) const { return sv_.at(static_cast<std::size_t>(i)).alpha; }
    double gradient(int i) const { return sv_.at(static_cast<std::size_t>(i)).g; }

    double dual_objective() const;
    Model export_model() const;

    void serialize(std::vector<std::uint8_t>& out) const;
    static LasvmTrainer deserialize(const std::uint8_t* data, std::size_t size,
                                    std::size_t& offset);

private:
    struct Entry {
        Sample sample;
        double alpha = 0.0;
        double g = 0.0;
    };

    double k(int i, int j) const;
    std::vector<double> row_against_support(const Sample& x) const;
    void pair_step(int i, int j, const std::vector<double>& row_i, const std::vector<double>& row_j);
    int arg_extreme(bool want_max) const;

    double C_;
    double tau_;
    KernelSpec kernel_;
    std::vector<Entry> sv_;
    double b_ = 0.0;
    double delta_ = std::numeric_limits<double>::infinity();
};

}  // namespace ssvm
