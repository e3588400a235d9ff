#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssvm/data.hpp"
#include "ssvm/lasvm.hpp"
#include "ssvm/model.hpp"

namespace ssvm {

/// Metrics of the benchmark tables. roc_auc is absent for single-class data.
struct MetricsReport {
    double accuracy = 0.0;
    double log_loss = 0.0;
    std::optional<double> roc_auc;
    double f1 = 0.0;
};

/// accuracy, logistic log-loss of the decision value, pairwise ROC-AUC with
/// ties counted 1/2, F1 with +1 as the positive class.
MetricsReport evaluate(const Model& model, const Dataset& dataset);

enum class TrainerKind { isvm, lasvm, smo };

const char* trainer_kind_name(TrainerKind k);
TrainerKind trainer_kind_from_name(const std::string& name);

/// Hyper-parameters of one training run, shared by grid search, learning
/// curves and the CLI.
struct TrainerConfig {
    TrainerKind kind = TrainerKind::isvm;
    double C = 100.0;
    KernelSpec kernel;
    double tau = 0.01;              // lasvm only
    EpochSchedule schedule;         // lasvm only
    double smo_tolerance = 1e-3;    // smo only
    int smo_max_passes = 1000;      // smo only
    std::size_t cache_bytes = 256u << 20;
};

/// Trains one model of the given kind over the dataset stream.
Model train_model(const Dataset& train, const TrainerConfig& config);

/// Candidate axes of the hyper-parameter grid. Enumeration order is C, then
/// kernel kind, then gamma, then tau; the tau axis applies to lasvm only.
struct GridSpec {
    std::vector<double> C_values;
    std::vector<KernelKind> kernel_kinds;
    std::vector<GammaSetting> gamma_values;
    std::vector<double> tau_values;
    int folds = 5;
    int poly_degree = 3;
    double poly_coef0 = 1.0;
    double sigmoid_coef0 = 0.0;
};

struct GridConfig {
    int config_id = 0;
    double C = 0.0;
    KernelSpec kernel;
    std::optional<double> tau;
};

struct GridRow {
    GridConfig config;
    double mean_val_acc = 0.0;
    double std_val_acc = 0.0;
    bool failed = false;
    std::string error;
};

struct GridResult {
    std::vector<GridRow> rows;
    int best_config_id = -1;
};

/// All candidate configurations in deterministic enumeration order.
std::vector<GridConfig> enumerate_grid(const GridSpec& grid, TrainerKind kind);

/// Seeded k-fold cross validation over every grid point. Ties on mean
/// validation accuracy go to the earliest enumerated config. (config, fold)
/// cells may run on `threads` workers; the reduction is order-independent.
GridResult grid_search(const Dataset& dataset, const GridSpec& grid, TrainerKind kind,
                       std::uint64_t seed, int threads = 0);

/// Fold assignment: seeded permutation chopped into contiguous folds.
std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed);

struct CurvePoint {
    int n_samples_seen = 0;
    double cumulative_train_seconds = 0.0;
    double validation_accuracy = 0.0;
    double test_accuracy = 0.0;
    int support_set_size = 0;
};

/// Streams the training set into the trainer and snapshots metrics at each
/// checkpoint count. Training time excludes evaluation time.
std::vector<CurvePoint> learning_curve(const Dataset& train, const Dataset& validation,
                                       const Dataset& test, const std::vector<int>& checkpoints,
                                       const TrainerConfig& config);

std::string metrics_csv(const MetricsReport& r);
std::string curve_csv(const std::vector<CurvePoint>& points);
std::string grid_csv(const GridResult& result);

}  // namespace ssvm
