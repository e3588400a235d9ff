#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ssvm/error.hpp"

namespace ssvm {

/// A labelled feature vector; the unit of streaming. Labels are strictly +-1.
struct Sample {
    std::vector<double> features;
    int label = +1;

    Sample() = default;
    Sample(std::vector<double> f, int y) : features(std::move(f)), label(y) { validate(); }

    void validate() const {
        if (label != +1 && label != -1) throw ConfigError("sample label must be +1 or -1");
        if (features.empty()) throw ConfigError("sample features must be non-empty");
        for (double v : features)
            if (!std::isfinite(v)) throw ConfigError("sample features must be finite");
    }
};

/// Ordered collection of samples sharing one feature dimension. Order is
/// meaningful: it is the streaming order, and indices are stable.
class Dataset {
public:
    Dataset() = default;

    void add(Sample s) {
        s.validate();
        if (samples_.empty()) {
            feature_dim_ = s.features.size();
        } else if (s.features.size() != feature_dim_) {
            throw ShapeError("sample dimension does not match dataset feature_dim");
        }
        samples_.push_back(std::move(s));
    }

    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    const std::vector<Sample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::size_t feature_dim() const { return feature_dim_; }

    /// New dataset containing the given indices, in the given order.
    Dataset subset(const std::vector<int>& indices) const {
        Dataset out;
        for (int i : indices) {
            if (i < 0 || static_cast<std::size_t>(i) >= samples_.size())
                throw NotFoundError("subset index out of range");
            out.add(samples_[static_cast<std::size_t>(i)]);
        }
        return out;
    }

private:
    std::vector<Sample> samples_;
    std::size_t feature_dim_ = 0;
};

}  // namespace ssvm
