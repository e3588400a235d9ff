#include "ssvm/kernel.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace ssvm {

const char* kernel_kind_name(KernelKind k) {
    switch (k) {
        case KernelKind::rbf: return "rbf";
        case KernelKind::polynomial: return "poly";
        case KernelKind::sigmoid: return "sigmoid";
        case KernelKind::chi_square: return "chi2";
    }
    return "?";
}

KernelKind kernel_kind_from_name(const std::string& name) {
    if (name == "rbf") return KernelKind::rbf;
    if (name == "poly" || name == "polynomial") return KernelKind::polynomial;
    if (name == "sigmoid") return KernelKind::sigmoid;
    if (name == "chi2" || name == "chi_square") return KernelKind::chi_square;
    throw ParseError("unknown kernel kind: " + name);
}

double resolve_gamma(GammaSetting setting, std::size_t feature_dim) {
    if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
    if (setting.is_auto) return 1.0 / static_cast<double>(feature_dim);
    if (!(setting.value > 0.0)) throw ConfigError("gamma must be positive");
    return setting.value;
}

namespace {

double parse_number(const std::string& s, const std::string& what) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError("bad " + what + " value: " + s);
    return v;
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

KernelSpec KernelSpec::parse(const std::string& text) {
    KernelSpec spec;
    auto q = text.find('?');
    spec.kind = kernel_kind_from_name(text.substr(0, q));
    if (q == std::string::npos) return spec;
    std::string params = text.substr(q + 1);
    std::istringstream is(params);
    std::string item;
    while (std::getline(is, item, '&')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("kernel parameter missing '=': " + item);
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        if (key == "gamma") {
            spec.gamma = (val == "auto") ? GammaSetting::automatic()
                                         : GammaSetting::of(parse_number(val, "gamma"));
        } else if (key == "degree") {
            double d = parse_number(val, "degree");
            if (d < 1 || d != std::floor(d)) throw ParseError("degree must be a positive integer");
            spec.degree = static_cast<int>(d);
        } else if (key == "coef0") {
            spec.coef0 = parse_number(val, "coef0");
        } else {
            throw ParseError("unknown kernel parameter: " + key);
        }
    }
    if (!spec.gamma.is_auto && !(spec.gamma.value > 0.0))
        throw ConfigError("gamma must be positive");
    return spec;
}

std::string KernelSpec::to_text() const {
    std::string out = kernel_kind_name(kind);
    out += "?gamma=";
    out += gamma.is_auto ? "auto" : format_number(gamma.value);
    if (kind == KernelKind::polynomial) {
        out += "&degree=" + std::to_string(degree);
        out += "&coef0=" + format_number(coef0);
    } else if (kind == KernelKind::sigmoid) {
        out += "&coef0=" + format_number(coef0);
    }
    return out;
}

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("kernel arguments differ in dimension");
    if (x.empty()) throw ShapeError("kernel arguments must be non-empty");
    const double gamma = resolve_gamma(spec.gamma, x.size());
    switch (spec.kind) {
        case KernelKind::rbf: {
            double d2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - y[i];
                d2 += d * d;
            }
            return std::exp(-gamma * d2);
        }
        case KernelKind::polynomial: {
            if (spec.degree < 1) throw ConfigError("polynomial degree must be >= 1");
            double dot = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
            return std::pow(gamma * dot + spec.coef0, spec.degree);
        }
        case KernelKind::sigmoid: {
            double dot = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
            return std::tanh(gamma * dot + spec.coef0);
        }
        case KernelKind::chi_square: {
            double acc = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (x[i] < 0.0 || y[i] < 0.0)
                    throw DomainError("chi-square kernel requires nonnegative features");
                const double s = x[i] + y[i];
                if (s == 0.0) continue;  // 0/0 term counts as 0
                const double d = x[i] - y[i];
                acc += d * d / s;
            }
            return std::exp(-gamma * acc);
        }
    }
    throw ConfigError("unhandled kernel kind");
}

std::vector<double> kernel_row(const KernelSpec& spec, std::span<const double> x,
                               const std::vector<Sample>& set, KernelCache* cache, int x_index) {
    if (cache && x_index >= 0) {
        auto pin = cache->row(spec, set, x_index, set.size());
        return std::vector<double>(pin.values().begin(), pin.values().end());
    }
    std::vector<double> out;
    out.reserve(set.size());
    for (const Sample& s : set) out.push_back(eval_kernel(spec, x, s.features));
    return out;
}

KernelCache::Pin KernelCache::row(const KernelSpec& spec, const std::vector<Sample>& samples,
                                  int i, std::size_t count) {
    if (i < 0 || static_cast<std::size_t>(i) >= samples.size())
        throw NotFoundError("kernel cache row index out of range");
    if (count > samples.size()) throw NotFoundError("kernel cache row length out of range");

    auto it = rows_.find(i);
    if (it == rows_.end()) {
        ++misses_;
        lru_.push_front(i);
        it = rows_.emplace(i, Row{{}, lru_.begin(), 0}).first;
    } else {
        if (it->second.values.size() >= count)
            ++hits_;
        else
            ++misses_;
        lru_.erase(it->second.lru_it);
        lru_.push_front(i);
        it->second.lru_it = lru_.begin();
    }

    Row& r = it->second;
    if (r.values.size() < count) {
        const std::size_t old = r.values.size();
        r.values.reserve(count);
        const auto& xi = samples[static_cast<std::size_t>(i)].features;
        for (std::size_t j = old; j < count; ++j)
            r.values.push_back(eval_kernel(spec, xi, samples[j].features));
        bytes_ += (count - old) * sizeof(double);
    }
    ++r.pins;
    evict_to_fit();
    return Pin(this, i, &r.values);
}

void KernelCache::unpin(int key) {
    auto it = rows_.find(key);
    if (it == rows_.end()) return;
    if (it->second.pins > 0) --it->second.pins;
    evict_to_fit();
}

void KernelCache::evict_to_fit() {
    while (bytes_ > capacity_ && !lru_.empty()) {
        // scan from least recently used, skipping pinned rows
        auto lit = lru_.end();
        bool evicted = false;
        while (lit != lru_.begin()) {
            --lit;
            auto rit = rows_.find(*lit);
            if (rit->second.pins == 0) {
                bytes_ -= rit->second.values.size() * sizeof(double);
                rows_.erase(rit);
                lru_.erase(lit);
                evicted = true;
                break;
            }
        }
        if (!evicted) break;  // everything pinned; rebalanced on unpin
    }
}

void KernelCache::invalidate() {
    rows_.clear();
    lru_.clear();
    bytes_ = 0;
}

}  // namespace ssvm
