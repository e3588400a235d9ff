#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ssvm/eval.hpp"
#include "ssvm/isvm.hpp"
#include "ssvm/lasvm.hpp"

namespace ssvm {

/// Stream-level metadata needed to resume a run bit-exactly.
struct StreamMeta {
    TrainerKind kind = TrainerKind::isvm;
    std::uint64_t consumed = 0;  // samples already taken from the stream
    std::uint64_t seed = 0;
    std::uint32_t epoch_size = 200;        // lasvm schedule
    std::uint32_t epochs_before_finish = 5;
};

/// Binary layout: magic "SSVM", u32 version, meta, trainer payload, trailing
/// CRC-32 over everything before it. Canonical field order; identical state
/// always serializes to identical bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const IsvmTrainer& trainer, const StreamMeta& meta,
                     const std::filesystem::path& path);
void save_checkpoint(const LasvmTrainer& trainer, const StreamMeta& meta,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
    StreamMeta meta;
    std::variant<IsvmTrainer, LasvmTrainer> trainer;
    std::vector<std::string> warnings;  // e.g. bordered inverse rebuilt on load
};

/// Verifies version and checksum, restores the trainer, and re-verifies the
/// stored bordered inverse against its defining matrix (rebuilding it with a
/// warning if the identity check fails).
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Model file I/O (JSON).
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// Writes via a temp file in the same directory, then renames.
void atomic_write(const std::filesystem::path& path, const std::string& contents);
void atomic_write(const std::filesystem::path& path, const std::vector<std::uint8_t>& contents);

}  // namespace ssvm
