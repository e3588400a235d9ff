#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ssvm/types.hpp"

namespace ssvm {

/// Parses the sparse text interchange format, one sample per line:
///   <label> <index>:<value> ...
/// with 1-based, strictly ascending-free (but duplicate-free) indices.
/// Labels must be +-1; with remap01, 0/1 are remapped to -1/+1.
Dataset load_sparse_text(const std::filesystem::path& path, bool remap01 = false);

/// Dense CSV: label,f1,f2,...
Dataset load_dense_csv(const std::filesystem::path& path, bool remap01 = false);

/// Dispatch by extension: .csv -> dense, anything else -> sparse text.
Dataset load_dataset(const std::filesystem::path& path, bool remap01 = false);

void save_sparse_text(const Dataset& dataset, const std::filesystem::path& path);

struct SplitSpec {
    double train_fraction = 0.3;       // paper protocol: 3:7 train:test
    double validation_fraction = 0.2;  // carved from the training pool
    std::uint64_t seed = 0;
};

struct Splits {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Deterministic seeded split. The training pool gets
/// floor(train_fraction * n) samples, validation gets
/// floor(validation_fraction * pool) carved from the pool, rest is test.
Splits split(const Dataset& dataset, const SplitSpec& spec);

/// Deterministic permutation of [0, n) as a pure function of (seed, epoch).
std::vector<int> shuffle_epoch(std::size_t n, int epoch_index, std::uint64_t seed);

/// Synthetic pipe-scan generator: each sample is one revolution of beam
/// distances around the pipe wall; defected samples carry a contiguous arc
/// pushed inward or outward. Stands in for the unavailable LiDAR capture.
struct PipeScanConfig {
    int n_samples = 1000;
    int beams_per_revolution = 180;
    double nominal_radius = 4.0;
    double noise_sigma = 0.4;
    double defect_rate = 0.3;
    double defect_depth_min = 1.0;
    double defect_depth_max = 2.0;
    int defect_width_min = 5;
    int defect_width_max = 25;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Label is -1 iff a defect was injected; fully determined by the config.
Dataset generate_pipe_scan(const PipeScanConfig& config);

}  // namespace ssvm
