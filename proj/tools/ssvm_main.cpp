#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "ssvm/checkpoint.hpp"
#include "ssvm/data.hpp"
#include "ssvm/eval.hpp"
#include "ssvm/isvm.hpp"
#include "ssvm/lasvm.hpp"
#include "ssvm/smo.hpp"

using namespace ssvm;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDiagnostic = 4;

struct CommonTrainFlags {
    std::string algo = "isvm";
    double C = 100.0;
    std::string kernel_text = "rbf?gamma=auto";
    double tau = 0.01;
    int epoch_size = 200;
    int finish_every = 5;
    std::uint64_t seed = 0;
    double smo_tolerance = 1e-3;
    int smo_max_passes = 1000;
    double cache_mb = 256.0;
    bool remap01 = false;

    void attach(CLI::App* cmd, bool with_algo = true) {
        if (with_algo)
            cmd->add_option("--algo", algo, "trainer: isvm, lasvm or smo")
                ->check(CLI::IsMember({"isvm", "lasvm", "smo"}));
        cmd->add_option("--C", C, "box constraint C");
        cmd->add_option("--kernel", kernel_text,
                        "kernel spec, e.g. rbf?gamma=auto or poly?gamma=1&degree=3&coef0=1");
        cmd->add_option("--tau", tau, "lasvm pair-violation tolerance");
        cmd->add_option("--epoch-size", epoch_size, "lasvm samples per epoch");
        cmd->add_option("--finish-every", finish_every, "lasvm epochs between finishing steps");
        cmd->add_option("--seed", seed, "seed for every randomized choice");
        cmd->add_option("--tolerance", smo_tolerance, "smo KKT stopping tolerance");
        cmd->add_option("--max-passes", smo_max_passes, "smo iteration budget multiplier");
        cmd->add_option("--cache-mb", cache_mb, "kernel cache budget (MiB)");
        cmd->add_flag("--remap01", remap01, "accept 0/1 labels and remap to -1/+1");
    }

    TrainerConfig config() const {
        TrainerConfig cfg;
        cfg.kind = trainer_kind_from_name(algo);
        cfg.C = C;
        cfg.kernel = KernelSpec::parse(kernel_text);
        cfg.tau = tau;
        cfg.schedule = {epoch_size, finish_every, seed};
        cfg.smo_tolerance = smo_tolerance;
        cfg.smo_max_passes = smo_max_passes;
        cfg.cache_bytes = static_cast<std::size_t>(cache_mb * 1024.0 * 1024.0);
        return cfg;
    }
};

void write_metrics(const Model& model, const Dataset& eval_data, const std::string& path) {
    const MetricsReport rep = evaluate(model, eval_data);
    if (path.empty()) {
        std::cout << metrics_csv(rep);
    } else {
        atomic_write(path, metrics_csv(rep));
    }
}

/// Shared streaming loop for `stream` and `resume`.
struct StreamOptions {
    std::string checkpoint_path;
    long checkpoint_every = 0;  // 0: only on stop/end
    long stop_after = 0;        // 0: run to end of stream
};

template <typename Trainer>
void checkpoint_now(const Trainer& trainer, StreamMeta meta, std::uint64_t consumed,
                    const std::string& path) {
    if (path.empty()) return;
    meta.consumed = consumed;
    save_checkpoint(trainer, meta, path);
}

/// Returns the number of samples consumed in total.
std::uint64_t run_stream(std::variant<IsvmTrainer, LasvmTrainer>& trainer, const Dataset& stream,
                         StreamMeta meta, const StreamOptions& opts) {
    std::uint64_t consumed = meta.consumed;
    const std::uint64_t n = stream.size();
    if (consumed > n) throw ConfigError("checkpoint is ahead of the supplied stream");

    if (std::holds_alternative<IsvmTrainer>(trainer)) {
        IsvmTrainer& t = std::get<IsvmTrainer>(trainer);
        while (consumed < n) {
            if (opts.stop_after > 0 &&
                consumed >= static_cast<std::uint64_t>(opts.stop_after))
                break;
            t.learn(stream[consumed]);
            ++consumed;
            const bool stop = opts.stop_after > 0 &&
                              consumed >= static_cast<std::uint64_t>(opts.stop_after);
            if ((opts.checkpoint_every > 0 &&
                 consumed % static_cast<std::uint64_t>(opts.checkpoint_every) == 0) ||
                stop)
                checkpoint_now(t, meta, consumed, opts.checkpoint_path);
            if (stop) return consumed;
        }
        checkpoint_now(t, meta, consumed, opts.checkpoint_path);
        return consumed;
    }

    LasvmTrainer& t = std::get<LasvmTrainer>(trainer);
    const EpochSchedule sched{static_cast<int>(meta.epoch_size),
                              static_cast<int>(meta.epochs_before_finish), meta.seed};
    bool stopped = false;
    t.train_online_from(stream, sched, static_cast<long>(consumed),
                        [&](long done, const TrainLog&) {
                            consumed = static_cast<std::uint64_t>(done);
                            const bool stop =
                                opts.stop_after > 0 && done >= opts.stop_after;
                            if ((opts.checkpoint_every > 0 &&
                                 done % opts.checkpoint_every == 0) ||
                                stop)
                                checkpoint_now(t, meta, consumed, opts.checkpoint_path);
                            stopped = stop;
                            return !stop;
                        });
    if (!stopped) {
        consumed = n;
        checkpoint_now(t, meta, consumed, opts.checkpoint_path);
    }
    return consumed;
}

Model export_from(const std::variant<IsvmTrainer, LasvmTrainer>& trainer) {
    if (std::holds_alternative<IsvmTrainer>(trainer))
        return std::get<IsvmTrainer>(trainer).export_model();
    return std::get<LasvmTrainer>(trainer).export_model();
}

GridSpec parse_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open grid file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad grid file: ") + e.what());
    }
    GridSpec grid;
    try {
        grid.C_values = j.at("C").get<std::vector<double>>();
        for (const auto& k : j.at("kernel"))
            grid.kernel_kinds.push_back(kernel_kind_from_name(k.get<std::string>()));
        for (const auto& g : j.at("gamma")) {
            if (g.is_string() && g.get<std::string>() == "auto")
                grid.gamma_values.push_back(GammaSetting::automatic());
            else
                grid.gamma_values.push_back(GammaSetting::of(g.get<double>()));
        }
        if (j.contains("tau")) grid.tau_values = j.at("tau").get<std::vector<double>>();
        if (j.contains("folds")) grid.folds = j.at("folds").get<int>();
        if (j.contains("poly_degree")) grid.poly_degree = j.at("poly_degree").get<int>();
        if (j.contains("poly_coef0")) grid.poly_coef0 = j.at("poly_coef0").get<double>();
        if (j.contains("sigmoid_coef0"))
            grid.sigmoid_coef0 = j.at("sigmoid_coef0").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad grid file: ") + e.what());
    }
    return grid;
}

int run(int argc, char** argv) {
    CLI::App app{"ssvm: streaming kernel-SVM training, evaluation and benchmarking"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic pipe-scan dataset");
    PipeScanConfig pipe;
    std::string synth_out;
    synth->add_option("--n", pipe.n_samples, "number of samples")->required();
    synth->add_option("--beams", pipe.beams_per_revolution, "beams per revolution");
    synth->add_option("--radius", pipe.nominal_radius, "nominal pipe radius");
    synth->add_option("--noise", pipe.noise_sigma, "gaussian noise sigma");
    synth->add_option("--defect-rate", pipe.defect_rate, "fraction of defected samples");
    synth->add_option("--depth-min", pipe.defect_depth_min, "minimum defect depth");
    synth->add_option("--depth-max", pipe.defect_depth_max, "maximum defect depth");
    synth->add_option("--width-min", pipe.defect_width_min, "minimum defect width (beams)");
    synth->add_option("--width-max", pipe.defect_width_max, "maximum defect width (beams)");
    synth->add_option("--seed", pipe.seed, "generator seed");
    synth->add_option("--out", synth_out, "output sparse-text file")->required();

    // ---- train ----
    auto* train = app.add_subcommand("train", "train one model over a dataset");
    CommonTrainFlags train_flags;
    std::string train_data, train_eval_data, train_model_out, train_metrics_out;
    train_flags.attach(train);
    train->add_option("--data", train_data, "training dataset")->required();
    train->add_option("--eval-data", train_eval_data,
                      "dataset for the metrics CSV (default: the training data)");
    train->add_option("--out-model", train_model_out, "model file to write");
    train->add_option("--metrics-csv", train_metrics_out,
                      "metrics CSV path (default: stdout)");

    // ---- stream ----
    auto* stream = app.add_subcommand("stream", "online consumption with checkpointing");
    CommonTrainFlags stream_flags;
    std::string stream_data, stream_eval_data, stream_model_out, stream_metrics_out;
    StreamOptions stream_opts;
    stream_flags.attach(stream);
    stream->add_option("--data", stream_data, "training stream")->required();
    stream->add_option("--eval-data", stream_eval_data, "dataset for the metrics CSV");
    stream->add_option("--checkpoint", stream_opts.checkpoint_path, "checkpoint file");
    stream->add_option("--checkpoint-every", stream_opts.checkpoint_every,
                       "checkpoint cadence in samples (0: only at the end)");
    stream->add_option("--stop-after", stream_opts.stop_after,
                       "stop after this many samples (simulated interruption)");
    stream->add_option("--out-model", stream_model_out, "model file to write");
    stream->add_option("--metrics-csv", stream_metrics_out, "metrics CSV path");

    // ---- resume ----
    auto* resume = app.add_subcommand("resume", "continue a checkpointed stream");
    std::string resume_from, resume_data, resume_eval_data, resume_model_out,
        resume_metrics_out;
    StreamOptions resume_opts;
    bool resume_remap01 = false;
    resume->add_option("--from", resume_from, "checkpoint file")->required();
    resume->add_option("--data", resume_data, "the original training stream")->required();
    resume->add_option("--eval-data", resume_eval_data, "dataset for the metrics CSV");
    resume->add_option("--checkpoint", resume_opts.checkpoint_path,
                       "checkpoint file for further checkpoints (default: --from)");
    resume->add_option("--checkpoint-every", resume_opts.checkpoint_every,
                       "checkpoint cadence in samples");
    resume->add_option("--stop-after", resume_opts.stop_after, "stop again after N samples");
    resume->add_option("--out-model", resume_model_out, "model file to write");
    resume->add_option("--metrics-csv", resume_metrics_out, "metrics CSV path");
    resume->add_flag("--remap01", resume_remap01, "accept 0/1 labels");

    // ---- evaluate ----
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a model file on a dataset");
    std::string eval_model, eval_data_path, eval_metrics_out;
    bool eval_remap01 = false;
    eval_cmd->add_option("--model", eval_model, "model file")->required();
    eval_cmd->add_option("--data", eval_data_path, "dataset")->required();
    eval_cmd->add_option("--metrics-csv", eval_metrics_out, "metrics CSV path");
    eval_cmd->add_flag("--remap01", eval_remap01, "accept 0/1 labels");

    // ---- gridsearch ----
    auto* gridsearch = app.add_subcommand("gridsearch", "k-fold cross-validated grid search");
    std::string grid_file, grid_data, grid_out, grid_algo = "lasvm";
    std::uint64_t grid_seed = 0;
    int grid_threads = 0;
    bool grid_remap01 = false;
    gridsearch->add_option("--grid", grid_file, "grid config file (JSON)")->required();
    gridsearch->add_option("--data", grid_data, "dataset")->required();
    gridsearch->add_option("--algo", grid_algo, "trainer kind")
        ->check(CLI::IsMember({"isvm", "lasvm", "smo"}));
    gridsearch->add_option("--seed", grid_seed, "fold-assignment seed");
    gridsearch->add_option("--threads", grid_threads, "worker threads (0: hardware)");
    gridsearch->add_option("--out", grid_out, "result CSV path (default: stdout)");
    gridsearch->add_flag("--remap01", grid_remap01, "accept 0/1 labels");

    // ---- curve ----
    auto* curve = app.add_subcommand("curve", "learning-curve capture");
    CommonTrainFlags curve_flags;
    std::string curve_data, curve_out, curve_checkpoints;
    double curve_train_frac = 0.3, curve_val_frac = 0.2;
    curve_flags.attach(curve);
    curve->add_option("--data", curve_data, "dataset to split and stream")->required();
    curve->add_option("--checkpoints", curve_checkpoints, "comma-separated sample counts")
        ->required();
    curve->add_option("--train-frac", curve_train_frac, "training fraction of the split");
    curve->add_option("--val-frac", curve_val_frac, "validation fraction of the train pool");
    curve->add_option("--out", curve_out, "curve CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (synth->parsed()) {
        const Dataset d = generate_pipe_scan(pipe);
        save_sparse_text(d, synth_out);
        std::cerr << "wrote " << d.size() << " samples (" << d.feature_dim()
                  << " beams) to " << synth_out << "\n";
        return 0;
    }

    if (train->parsed()) {
        const Dataset data = load_dataset(train_data, train_flags.remap01);
        const TrainerConfig cfg = train_flags.config();
        const auto t0 = std::chrono::steady_clock::now();
        Model model;
        if (cfg.kind == TrainerKind::smo) {
            const SmoResult r =
                smo_solve(data, {cfg.C, cfg.kernel, cfg.smo_tolerance, cfg.smo_max_passes});
            model = r.model;
            if (!r.converged) {
                std::cerr << "smo did not converge within max_passes; model is best-effort\n";
                if (!train_model_out.empty()) save_model(model, train_model_out);
                return kExitDiagnostic;
            }
        } else {
            model = train_model(data, cfg);
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << "trained " << data.size() << " samples in " << secs << " s\n";
        if (!train_model_out.empty()) save_model(model, train_model_out);
        const Dataset eval_data = train_eval_data.empty()
                                      ? data
                                      : load_dataset(train_eval_data, train_flags.remap01);
        write_metrics(model, eval_data, train_metrics_out);
        return 0;
    }

    if (stream->parsed()) {
        const TrainerConfig cfg = stream_flags.config();
        if (cfg.kind == TrainerKind::smo)
            throw ConfigError("stream supports isvm and lasvm only");
        const Dataset data = load_dataset(stream_data, stream_flags.remap01);
        StreamMeta meta{cfg.kind, 0, stream_flags.seed,
                        static_cast<std::uint32_t>(stream_flags.epoch_size),
                        static_cast<std::uint32_t>(stream_flags.finish_every)};
        std::variant<IsvmTrainer, LasvmTrainer> trainer =
            cfg.kind == TrainerKind::lasvm
                ? std::variant<IsvmTrainer, LasvmTrainer>(
                      LasvmTrainer(cfg.C, cfg.tau, cfg.kernel))
                : std::variant<IsvmTrainer, LasvmTrainer>(
                      IsvmTrainer(cfg.C, cfg.kernel, cfg.cache_bytes));
        const std::uint64_t consumed = run_stream(trainer, data, meta, stream_opts);
        std::cerr << "consumed " << consumed << " of " << data.size() << " samples\n";
        const Model model = export_from(trainer);
        if (!stream_model_out.empty()) save_model(model, stream_model_out);
        if (!stream_metrics_out.empty() || consumed == data.size()) {
            const Dataset eval_data =
                stream_eval_data.empty() ? data
                                         : load_dataset(stream_eval_data, stream_flags.remap01);
            write_metrics(model, eval_data, stream_metrics_out);
        }
        return 0;
    }

    if (resume->parsed()) {
        LoadedCheckpoint lc = load_checkpoint(resume_from);
        for (const std::string& w : lc.warnings) std::cerr << "warning: " << w << "\n";
        const Dataset data = load_dataset(resume_data, resume_remap01);
        if (resume_opts.checkpoint_path.empty())
            resume_opts.checkpoint_path = resume_from;  // keep checkpointing in place
        const std::uint64_t consumed = run_stream(lc.trainer, data, lc.meta, resume_opts);
        std::cerr << "resumed at " << lc.meta.consumed << ", consumed " << consumed << " of "
                  << data.size() << " samples\n";
        const Model model = export_from(lc.trainer);
        if (!resume_model_out.empty()) save_model(model, resume_model_out);
        if (!resume_metrics_out.empty() || consumed == data.size()) {
            const Dataset eval_data =
                resume_eval_data.empty() ? data : load_dataset(resume_eval_data, resume_remap01);
            write_metrics(model, eval_data, resume_metrics_out);
        }
        return 0;
    }

    if (eval_cmd->parsed()) {
        const Model model = load_model(eval_model);
        const Dataset data = load_dataset(eval_data_path, eval_remap01);
        write_metrics(model, data, eval_metrics_out);
        return 0;
    }

    if (gridsearch->parsed()) {
        const Dataset data = load_dataset(grid_data, grid_remap01);
        const GridSpec grid = parse_grid_file(grid_file);
        const TrainerKind kind = trainer_kind_from_name(grid_algo);
        const GridResult result = grid_search(data, grid, kind, grid_seed, grid_threads);
        for (const GridRow& row : result.rows)
            if (row.failed)
                std::cerr << "config " << row.config.config_id << " failed: " << row.error
                          << "\n";
        if (grid_out.empty())
            std::cout << grid_csv(result);
        else
            atomic_write(grid_out, grid_csv(result));
        const GridRow& best = result.rows[static_cast<std::size_t>(result.best_config_id)];
        std::cerr << "best config " << best.config.config_id << ": C=" << best.config.C
                  << " kernel=" << best.config.kernel.to_text()
                  << (best.config.tau ? " tau=" + std::to_string(*best.config.tau) : "")
                  << " mean_val_acc=" << best.mean_val_acc << "\n";
        return 0;
    }

    if (curve->parsed()) {
        const Dataset data = load_dataset(curve_data, curve_flags.remap01);
        const Splits splits = split(data, {curve_train_frac, curve_val_frac, curve_flags.seed});
        std::vector<int> checkpoints;
        std::stringstream ss(curve_checkpoints);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) checkpoints.push_back(std::stoi(item));
        const auto points = learning_curve(splits.train, splits.validation, splits.test,
                                           checkpoints, curve_flags.config());
        if (curve_out.empty())
            std::cout << curve_csv(points);
        else
            atomic_write(curve_out, curve_csv(points));
        return 0;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiagnostic;
    } catch (const InvariantError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiagnostic;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
