#include "ssvm/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

#include "ssvm/isvm.hpp"
#include "ssvm/rng.hpp"
#include "ssvm/smo.hpp"

namespace ssvm {

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

MetricsReport evaluate(const Model& model, const Dataset& dataset) {
    if (dataset.empty()) throw ConfigError("evaluate requires a nonempty dataset");
    const std::size_t n = dataset.size();

    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) score[i] = decision_value(model, dataset[i].features);

    MetricsReport rep;
    std::size_t correct = 0, tp = 0, fp = 0, fn = 0, n_pos = 0, n_neg = 0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = dataset[i].label;
        const int pred = score[i] >= 0.0 ? +1 : -1;
        if (pred == y) ++correct;
        if (pred > 0 && y > 0) ++tp;
        if (pred > 0 && y < 0) ++fp;
        if (pred < 0 && y > 0) ++fn;
        (y > 0 ? n_pos : n_neg)++;

        double p = 1.0 / (1.0 + std::exp(-score[i]));
        p = std::clamp(p, 1e-15, 1.0 - 1e-15);
        loss -= (y > 0) ? std::log(p) : std::log(1.0 - p);
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    rep.log_loss = loss / static_cast<double>(n);
    const double prec = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double rec = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    rep.f1 = (prec + rec > 0.0) ? 2.0 * prec * rec / (prec + rec) : 0.0;

    if (n_pos > 0 && n_neg > 0) {
        // rank-sum AUC with average ranks over score ties
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
        double rank_sum_pos = 0.0;
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && score[order[j + 1]] == score[order[i]]) ++j;
            const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
            for (std::size_t k = i; k <= j; ++k)
                if (dataset[order[k]].label > 0) rank_sum_pos += avg_rank;
            i = j + 1;
        }
        const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
        rep.roc_auc = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
    }
    return rep;
}

const char* trainer_kind_name(TrainerKind k) {
    switch (k) {
        case TrainerKind::isvm: return "isvm";
        case TrainerKind::lasvm: return "lasvm";
        case TrainerKind::smo: return "smo";
    }
    return "?";
}

TrainerKind trainer_kind_from_name(const std::string& name) {
    if (name == "isvm") return TrainerKind::isvm;
    if (name == "lasvm") return TrainerKind::lasvm;
    if (name == "smo" || name == "offline") return TrainerKind::smo;
    throw ParseError("unknown trainer kind: " + name);
}

Model train_model(const Dataset& train, const TrainerConfig& config) {
    switch (config.kind) {
        case TrainerKind::isvm: {
            IsvmTrainer t(config.C, config.kernel, config.cache_bytes);
            for (const Sample& s : train.samples()) t.learn(s);
            return t.export_model();
        }
        case TrainerKind::lasvm: {
            LasvmTrainer t(config.C, config.tau, config.kernel);
            t.train_online(train, config.schedule);
            return t.export_model();
        }
        case TrainerKind::smo: {
            SmoConfig sc{config.C, config.kernel, config.smo_tolerance, config.smo_max_passes};
            SmoResult r = smo_solve(train, sc);
            if (!r.converged)
                throw ConvergenceError("smo did not converge within max_passes");
            return r.model;
        }
    }
    throw ConfigError("unhandled trainer kind");
}

std::vector<GridConfig> enumerate_grid(const GridSpec& grid, TrainerKind kind) {
    if (grid.C_values.empty() || grid.kernel_kinds.empty() || grid.gamma_values.empty())
        throw ConfigError("grid axes must be nonempty");
    if (kind == TrainerKind::lasvm && grid.tau_values.empty())
        throw ConfigError("lasvm grid requires tau values");
    std::vector<GridConfig> out;
    int id = 0;
    for (double C : grid.C_values) {
        for (KernelKind kk : grid.kernel_kinds) {
            for (const GammaSetting& gamma : grid.gamma_values) {
                KernelSpec spec;
                spec.kind = kk;
                spec.gamma = gamma;
                if (kk == KernelKind::polynomial) {
                    spec.degree = grid.poly_degree;
                    spec.coef0 = grid.poly_coef0;
                } else if (kk == KernelKind::sigmoid) {
                    spec.coef0 = grid.sigmoid_coef0;
                }
                if (kind == TrainerKind::lasvm) {
                    for (double tau : grid.tau_values)
                        out.push_back({id++, C, spec, tau});
                } else {
                    out.push_back({id++, C, spec, std::nullopt});  // tau axis not applicable
                }
            }
        }
    }
    return out;
}

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (n < static_cast<std::size_t>(folds)) throw ConfigError("dataset smaller than fold count");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0xf01d));
    rng.shuffle(perm);
    std::vector<int> assign(n, 0);
    const std::size_t base = n / static_cast<std::size_t>(folds);
    const std::size_t rem = n % static_cast<std::size_t>(folds);
    std::size_t pos = 0;
    for (int f = 0; f < folds; ++f) {
        const std::size_t len = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);
        for (std::size_t k = 0; k < len; ++k)
            assign[static_cast<std::size_t>(perm[pos + k])] = f;
        pos += len;
    }
    return assign;
}

GridResult grid_search(const Dataset& dataset, const GridSpec& grid, TrainerKind kind,
                       std::uint64_t seed, int threads) {
    const std::vector<GridConfig> configs = enumerate_grid(grid, kind);
    const std::vector<int> assign = fold_assignment(dataset.size(), grid.folds, seed);
    const int folds = grid.folds;

    struct Cell {
        double acc = 0.0;
        bool failed = false;
        std::string error;
    };
    std::vector<Cell> cells(configs.size() * static_cast<std::size_t>(folds));

    // precompute fold index lists once
    std::vector<std::vector<int>> train_idx(static_cast<std::size_t>(folds)),
        val_idx(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (int f = 0; f < folds; ++f) {
            if (assign[i] == f)
                val_idx[static_cast<std::size_t>(f)].push_back(static_cast<int>(i));
            else
                train_idx[static_cast<std::size_t>(f)].push_back(static_cast<int>(i));
        }
    }

    auto run_cell = [&](std::size_t cell) {
        const std::size_t ci = cell / static_cast<std::size_t>(folds);
        const int f = static_cast<int>(cell % static_cast<std::size_t>(folds));
        const GridConfig& gc = configs[ci];
        try {
            TrainerConfig tc;
            tc.kind = kind;
            tc.C = gc.C;
            tc.kernel = gc.kernel;
            if (gc.tau) tc.tau = *gc.tau;
            tc.schedule.shuffle_seed =
                derive_seed(seed, static_cast<std::uint64_t>(gc.config_id) *
                                      static_cast<std::uint64_t>(folds) +
                                      static_cast<std::uint64_t>(f));
            const Dataset tr = dataset.subset(train_idx[static_cast<std::size_t>(f)]);
            const Dataset va = dataset.subset(val_idx[static_cast<std::size_t>(f)]);
            const Model m = train_model(tr, tc);
            cells[cell].acc = evaluate(m, va).accuracy;
        } catch (const std::exception& e) {
            cells[cell].failed = true;
            cells[cell].error = e.what();
        }
    };

    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
    if (workers == 1) {
        for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (std::size_t c = next.fetch_add(1); c < cells.size(); c = next.fetch_add(1))
                    run_cell(c);
            });
        for (auto& t : pool) t.join();
    }

    GridResult res;
    res.rows.reserve(configs.size());
    double best_acc = -1.0;
    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        GridRow row;
        row.config = configs[ci];
        double sum = 0.0, sum2 = 0.0;
        for (int f = 0; f < folds; ++f) {
            const Cell& cell = cells[ci * static_cast<std::size_t>(folds) +
                                     static_cast<std::size_t>(f)];
            if (cell.failed) {
                row.failed = true;
                if (row.error.empty()) row.error = cell.error;
            }
            sum += cell.acc;
            sum2 += cell.acc * cell.acc;
        }
        if (!row.failed) {
            const double mean = sum / folds;
            row.mean_val_acc = mean;
            row.std_val_acc = std::sqrt(std::max(0.0, sum2 / folds - mean * mean));
            if (mean > best_acc) {  // strict: ties keep the earliest config
                best_acc = mean;
                res.best_config_id = row.config.config_id;
            }
        }
        res.rows.push_back(std::move(row));
    }
    if (res.best_config_id < 0) throw ConvergenceError("every grid configuration failed");
    return res;
}

std::vector<CurvePoint> learning_curve(const Dataset& train, const Dataset& validation,
                                       const Dataset& test, const std::vector<int>& checkpoints,
                                       const TrainerConfig& config) {
    if (train.empty()) throw ConfigError("learning_curve requires a nonempty training set");
    if (checkpoints.empty()) throw ConfigError("learning_curve requires checkpoints");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || static_cast<std::size_t>(checkpoints[i]) > train.size())
            throw ConfigError("checkpoint outside the training-set size");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw ConfigError("checkpoints must be strictly increasing");
    }
    using clock = std::chrono::steady_clock;
    std::vector<CurvePoint> out;

    auto snapshot = [&](const Model& m, int seen, double secs) {
        CurvePoint p;
        p.n_samples_seen = seen;
        p.cumulative_train_seconds = secs;
        p.validation_accuracy = validation.empty() ? 0.0 : evaluate(m, validation).accuracy;
        p.test_accuracy = test.empty() ? 0.0 : evaluate(m, test).accuracy;
        p.support_set_size = static_cast<int>(m.support_samples.size());
        out.push_back(p);
    };

    switch (config.kind) {
        case TrainerKind::isvm: {
            IsvmTrainer t(config.C, config.kernel, config.cache_bytes);
            double secs = 0.0;
            std::size_t next = 0;
            for (std::size_t i = 0; i < train.size() && next < checkpoints.size(); ++i) {
                const auto t0 = clock::now();
                t.learn(train[i]);
                secs += std::chrono::duration<double>(clock::now() - t0).count();
                if (static_cast<int>(i) + 1 == checkpoints[next]) {
                    snapshot(t.export_model(), checkpoints[next], secs);
                    ++next;
                }
            }
            break;
        }
        case TrainerKind::lasvm: {
            LasvmTrainer t(config.C, config.tau, config.kernel);
            std::size_t next = 0;
            t.train_online_from(train, config.schedule, 0,
                                [&](long consumed, const TrainLog& log) {
                                    if (next < checkpoints.size() &&
                                        consumed == checkpoints[next]) {
                                        snapshot(t.export_model(), static_cast<int>(consumed),
                                                 log.online_seconds + log.finish_seconds);
                                        ++next;
                                    }
                                    return true;
                                });
            break;
        }
        case TrainerKind::smo: {
            // batch baseline: refit on each prefix; time accumulates across fits
            double secs = 0.0;
            for (int cp : checkpoints) {
                std::vector<int> idx(static_cast<std::size_t>(cp));
                std::iota(idx.begin(), idx.end(), 0);
                const Dataset prefix = train.subset(idx);
                SmoConfig sc{config.C, config.kernel, config.smo_tolerance, config.smo_max_passes};
                const auto t0 = clock::now();
                const SmoResult r = smo_solve(prefix, sc);
                secs += std::chrono::duration<double>(clock::now() - t0).count();
                snapshot(r.model, cp, secs);
            }
            break;
        }
    }
    return out;
}

std::string metrics_csv(const MetricsReport& r) {
    std::ostringstream os;
    os << "accuracy,log_loss,roc_auc,f1\n";
    os << fmt(r.accuracy) << ',' << fmt(r.log_loss) << ','
       << (r.roc_auc ? fmt(*r.roc_auc) : "nan") << ',' << fmt(r.f1) << '\n';
    return os.str();
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
    std::ostringstream os;
    os << "n_samples,seconds,val_acc,test_acc,sv_count\n";
    for (const CurvePoint& p : points)
        os << p.n_samples_seen << ',' << fmt(p.cumulative_train_seconds) << ','
           << fmt(p.validation_accuracy) << ',' << fmt(p.test_accuracy) << ','
           << p.support_set_size << '\n';
    return os.str();
}

std::string grid_csv(const GridResult& result) {
    std::ostringstream os;
    os << "config_id,C,kernel,gamma,tau,mean_val_acc,std_val_acc\n";
    for (const GridRow& row : result.rows) {
        os << row.config.config_id << ',' << fmt(row.config.C) << ','
           << kernel_kind_name(row.config.kernel.kind) << ','
           << (row.config.kernel.gamma.is_auto ? std::string("auto")
                                               : fmt(row.config.kernel.gamma.value))
           << ',' << (row.config.tau ? fmt(*row.config.tau) : std::string()) << ',';
        if (row.failed)
            os << "nan,nan";
        else
            os << fmt(row.mean_val_acc) << ',' << fmt(row.std_val_acc);
        os << '\n';
    }
    return os.str();
}

}  // namespace ssvm
