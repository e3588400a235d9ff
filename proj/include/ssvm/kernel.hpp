#pragma once

#include <cstdint>
#include <list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssvm/types.hpp"

namespace ssvm {

enum class KernelKind { rbf, polynomial, sigmoid, chi_square };

const char* kernel_kind_name(KernelKind k);
KernelKind kernel_kind_from_name(const std::string& name);

/// gamma is either "auto" (resolved to 1/feature_dim) or an explicit value.
struct GammaSetting {
    bool is_auto = true;
    double value = 0.0;

    static GammaSetting automatic() { return {}; }
    static GammaSetting of(double v) { return {false, v}; }
    bool operator==(const GammaSetting&) const = default;
};

/// Kernel kind plus parameters. Text form used by the CLI and config files:
///   rbf?gamma=auto
///   poly?gamma=1&degree=3&coef0=1
///   sigmoid?gamma=0.01&coef0=0
///   chi2?gamma=0.1
struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    GammaSetting gamma;
    int degree = 3;      // polynomial only
    double coef0 = 0.0;  // polynomial, sigmoid

    static KernelSpec parse(const std::string& text);
    std::string to_text() const;
    bool operator==(const KernelSpec&) const = default;
};

/// Resolves a gamma setting against the feature dimension.
/// auto -> 1/feature_dim; explicit values must be positive.
double resolve_gamma(GammaSetting setting, std::size_t feature_dim);

/// Evaluates the kernel on a pair of equal-dimension vectors.
double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Byte-budgeted LRU cache of kernel rows keyed by stable sample index.
/// A row holds K(x_i, x_j) for j in [0, filled). Values are memoized calls of
/// eval_kernel, so cached and fresh evaluations are bit-identical; correctness
/// never depends on cache contents.
class KernelCache {
public:
    explicit KernelCache(std::size_t capacity_bytes) : capacity_(capacity_bytes) {}

    /// RAII view of a row. At most pins the row for its lifetime; rows with
    /// live pins are never evicted.
    class Pin {
    public:
        Pin(KernelCache* c, int key, const std::vector<double>* v) : cache_(c), key_(key), v_(v) {}
        Pin(const Pin&) = delete;
        Pin& operator=(const Pin&) = delete;
        Pin(Pin&& o) noexcept : cache_(o.cache_), key_(o.key_), v_(o.v_) { o.cache_ = nullptr; }
        ~Pin() {
            if (cache_) cache_->unpin(key_);
        }
        double operator[](std::size_t j) const { return (*v_)[j]; }
        std::size_t size() const { return v_->size(); }
        std::span<const double> values() const { return {v_->data(), v_->size()}; }

    private:
        KernelCache* cache_;
        int key_;
        const std::vector<double>* v_;
    };

    /// Row of sample `i` against samples[0..count). Extends an existing row
    /// if it is shorter than `count`.
    Pin row(const KernelSpec& spec, const std::vector<Sample>& samples, int i, std::size_t count);

    void invalidate();
    std::uint64_t hits() const { return hits_; }
    std::uint64_t misses() const { return misses_; }
    std::size_t bytes() const { return bytes_; }
    std::size_t capacity() const { return capacity_; }

private:
    friend class Pin;
    struct Row {
        std::vector<double> values;
        std::list<int>::iterator lru_it;
        int pins = 0;
    };

    void unpin(int key);
    void evict_to_fit();

    std::size_t capacity_;
    std::size_t bytes_ = 0;
    std::unordered_map<int, Row> rows_;
    std::list<int> lru_;  // front = most recently used
    std::uint64_t hits_ = 0;
    std::uint64_t misses_ = 0;
};

/// Row of kernel values of `x` against a sample set. When `cache` is given
/// and `x_index` >= 0 names x's stable index, the cache is consulted first.
std::vector<double> kernel_row(const KernelSpec& spec, std::span<const double> x,
                               const std::vector<Sample>& set, KernelCache* cache = nullptr,
                               int x_index = -1);

}  // namespace ssvm
