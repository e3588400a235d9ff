#include "ssvm/data.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "ssvm/rng.hpp"

namespace ssvm {

namespace {

int parse_label(const std::string& tok, bool remap01, const std::string& where) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw ParseError(where + ": bad label '" + tok + "'");
    if (v == 1.0) return +1;
    if (v == -1.0) return -1;
    if (remap01 && v == 0.0) return -1;
    throw ParseError(where + ": label must be +1/-1" + (remap01 ? " (or 0/1)" : "") + ", got '" +
                     tok + "'");
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

Dataset load_sparse_text(const std::filesystem::path& path, bool remap01) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    struct Raw {
        int label;
        std::vector<std::pair<int, double>> entries;
    };
    std::vector<Raw> raws;
    std::size_t max_index = 0;

    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (blank(line)) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        std::istringstream is(line);
        std::string tok;
        if (!(is >> tok)) continue;
        Raw raw;
        raw.label = parse_label(tok, remap01, where);
        std::set<int> seen;
        while (is >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw ParseError(where + ": expected index:value, got '" + tok + "'");
            char* end = nullptr;
            long idx = std::strtol(tok.c_str(), &end, 10);
            if (end != tok.c_str() + colon || idx < 1)
                throw ParseError(where + ": bad feature index in '" + tok + "'");
            const std::string vs = tok.substr(colon + 1);
            double val = std::strtod(vs.c_str(), &end);
            if (end == vs.c_str() || *end != '\0')
                throw ParseError(where + ": bad feature value in '" + tok + "'");
            if (!seen.insert(static_cast<int>(idx)).second)
                throw ParseError(where + ": duplicate feature index " + std::to_string(idx));
            raw.entries.emplace_back(static_cast<int>(idx), val);
            max_index = std::max(max_index, static_cast<std::size_t>(idx));
        }
        if (raw.entries.empty())
            throw ParseError(where + ": sample has no features");
        raws.push_back(std::move(raw));
    }
    if (raws.empty()) throw ParseError("empty dataset: " + path.string());

    Dataset out;
    for (auto& raw : raws) {
        std::vector<double> f(max_index, 0.0);
        for (auto& [idx, val] : raw.entries) f[static_cast<std::size_t>(idx) - 1] = val;
        out.add(Sample(std::move(f), raw.label));
    }
    return out;
}

Dataset load_dense_csv(const std::filesystem::path& path, bool remap01) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Dataset out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (blank(line)) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        std::istringstream is(line);
        std::string cell;
        if (!std::getline(is, cell, ',')) continue;
        int label = parse_label(cell, remap01, where);
        std::vector<double> f;
        while (std::getline(is, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw ParseError(where + ": bad value '" + cell + "'");
            f.push_back(v);
        }
        if (f.empty()) throw ParseError(where + ": sample has no features");
        try {
            out.add(Sample(std::move(f), label));
        } catch (const ShapeError&) {
            throw ParseError(where + ": row width differs from previous rows");
        }
    }
    if (out.empty()) throw ParseError("empty dataset: " + path.string());
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, bool remap01) {
    if (path.extension() == ".csv") return load_dense_csv(path, remap01);
    return load_sparse_text(path, remap01);
}

void save_sparse_text(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    char buf[64];
    for (const Sample& s : dataset.samples()) {
        out << (s.label > 0 ? "+1" : "-1");
        for (std::size_t j = 0; j < s.features.size(); ++j) {
            if (s.features[j] == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%.17g", s.features[j]);
            out << ' ' << (j + 1) << ':' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

Splits split(const Dataset& dataset, const SplitSpec& spec) {
    const std::size_t n = dataset.size();
    if (n < 10) throw ConfigError("split requires at least 10 samples");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ConfigError("train_fraction must be in (0,1)");
    if (spec.validation_fraction < 0.0 || spec.validation_fraction >= 1.0)
        throw ConfigError("validation_fraction must be in [0,1)");

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(spec.seed, 0));
    rng.shuffle(perm);

    const std::size_t pool = static_cast<std::size_t>(spec.train_fraction * static_cast<double>(n));
    const std::size_t nval =
        static_cast<std::size_t>(spec.validation_fraction * static_cast<double>(pool));
    const std::size_t ntrain = pool - nval;
    const std::size_t ntest = n - pool;
    if (ntrain == 0 || ntest == 0 || (spec.validation_fraction > 0.0 && nval == 0))
        throw ConfigError("split produces an empty partition");

    Splits out;
    out.train = dataset.subset({perm.begin(), perm.begin() + static_cast<long>(ntrain)});
    out.validation = dataset.subset({perm.begin() + static_cast<long>(ntrain),
                                     perm.begin() + static_cast<long>(pool)});
    out.test = dataset.subset({perm.begin() + static_cast<long>(pool), perm.end()});
    return out;
}

std::vector<int> shuffle_epoch(std::size_t n, int epoch_index, std::uint64_t seed) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0x5eed0000ull + static_cast<std::uint64_t>(epoch_index)));
    rng.shuffle(perm);
    return perm;
}

void PipeScanConfig::validate() const {
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (beams_per_revolution < 1) throw ConfigError("beams_per_revolution must be >= 1");
    if (!(nominal_radius > 0.0)) throw ConfigError("nominal_radius must be positive");
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be nonnegative");
    if (defect_rate < 0.0 || defect_rate > 1.0) throw ConfigError("defect_rate must be in [0,1]");
    if (!(defect_depth_min > 0.0) || defect_depth_max < defect_depth_min ||
        defect_depth_max >= nominal_radius)
        throw ConfigError("defect depth range must lie within (0, nominal_radius)");
    if (defect_width_min < 1 || defect_width_max < defect_width_min ||
        defect_width_max > beams_per_revolution)
        throw ConfigError("defect width range must lie within [1, beams_per_revolution]");
}

Dataset generate_pipe_scan(const PipeScanConfig& config) {
    config.validate();
    Rng rng(derive_seed(config.seed, 1));
    Dataset out;
    const int beams = config.beams_per_revolution;
    for (int s = 0; s < config.n_samples; ++s) {
        std::vector<double> dist(static_cast<std::size_t>(beams));
        for (int b = 0; b < beams; ++b)
            dist[static_cast<std::size_t>(b)] =
                config.nominal_radius + config.noise_sigma * rng.gauss();
        const bool defect = rng.uniform() < config.defect_rate;
        if (defect) {
            const int width = config.defect_width_min +
                              static_cast<int>(rng.below(static_cast<std::uint64_t>(
                                  config.defect_width_max - config.defect_width_min + 1)));
            const double depth =
                config.defect_depth_min +
                rng.uniform() * (config.defect_depth_max - config.defect_depth_min);
            const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(beams)));
            const double sign = rng.uniform() < 0.5 ? +1.0 : -1.0;  // dent vs bulge
            for (int k = 0; k < width; ++k)
                dist[static_cast<std::size_t>((start + k) % beams)] += sign * depth;
        }
        out.add(Sample(std::move(dist), defect ? -1 : +1));
    }
    return out;
}

}  // namespace ssvm
