#include "ssvm/checkpoint.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ssvm/bytes.hpp"

namespace ssvm {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'V', 'M'};

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

void write_meta(ByteWriter& w, const StreamMeta& meta) {
    w.u8(static_cast<std::uint8_t>(meta.kind));
    w.u64(meta.consumed);
    w.u64(meta.seed);
    w.u32(meta.epoch_size);
    w.u32(meta.epochs_before_finish);
}

StreamMeta read_meta(ByteReader& r) {
    StreamMeta meta;
    meta.kind = static_cast<TrainerKind>(r.u8());
    meta.consumed = r.u64();
    meta.seed = r.u64();
    meta.epoch_size = r.u32();
    meta.epochs_before_finish = r.u32();
    return meta;
}

std::vector<std::uint8_t> frame(const StreamMeta& meta,
                                const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    ByteWriter w(out);
    w.u32(kCheckpointVersion);
    write_meta(w, meta);
    out.insert(out.end(), payload.begin(), payload.end());
    w.u32(crc32(out.data(), out.size()));
    return out;
}

/// Frobenius distance of (bordered matrix) x (stored inverse) from identity.
double inverse_identity_error(const IsvmTrainer& t) {
    const std::vector<int>& border = t.border();
    const std::size_t m = border.size();
    if (m == 0) return 0.0;
    const std::vector<double>& R = t.inverse_border();
    std::vector<double> M((m + 1) * (m + 1), 0.0);
    for (std::size_t p = 0; p < m; ++p) {
        const Sample& sp = t.sample(border[p]);
        M[0 * (m + 1) + (p + 1)] = sp.label;
        M[(p + 1) * (m + 1) + 0] = sp.label;
        for (std::size_t q = 0; q < m; ++q) {
            const Sample& sq = t.sample(border[q]);
            M[(p + 1) * (m + 1) + (q + 1)] =
                sp.label * sq.label * eval_kernel(t.kernel(), sp.features, sq.features);
        }
    }
    double err2 = 0.0;
    for (std::size_t r = 0; r <= m; ++r)
        for (std::size_t c = 0; c <= m; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k <= m; ++k) acc += M[r * (m + 1) + k] * R[k * (m + 1) + c];
            const double d = acc - (r == c ? 1.0 : 0.0);
            err2 += d * d;
        }
    return std::sqrt(err2);
}

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
    static const std::array<std::uint32_t, 256> table = make_crc_table();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < size; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void atomic_write(const std::filesystem::path& path, const std::vector<std::uint8_t>& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(contents.data()),
                  static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
    atomic_write(path, std::vector<std::uint8_t>(contents.begin(), contents.end()));
}

void save_checkpoint(const IsvmTrainer& trainer, const StreamMeta& meta,
                     const std::filesystem::path& path) {
    std::vector<std::uint8_t> payload;
    trainer.serialize(payload);
    StreamMeta m = meta;
    m.kind = TrainerKind::isvm;
    atomic_write(path, frame(m, payload));
}

void save_checkpoint(const LasvmTrainer& trainer, const StreamMeta& meta,
                     const std::filesystem::path& path) {
    std::vector<std::uint8_t> payload;
    trainer.serialize(payload);
    StreamMeta m = meta;
    m.kind = TrainerKind::lasvm;
    atomic_write(path, frame(m, payload));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || !std::equal(kMagic, kMagic + 4, bytes.begin()))
        throw CorruptionError("not a checkpoint file: " + path.string());

    const std::size_t body = bytes.size() - 4;
    // checksum sits in the last 4 bytes
    std::uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
    if (crc32(bytes.data(), body) != stored)
        throw CorruptionError("checkpoint checksum mismatch: " + path.string());

    std::size_t off = 4;
    ByteReader r(bytes.data(), body, off);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw VersionError("unsupported checkpoint version " + std::to_string(version));

    LoadedCheckpoint out{read_meta(r), IsvmTrainer(1.0, KernelSpec{}), {}};
    if (out.meta.kind == TrainerKind::isvm) {
        IsvmTrainer t = IsvmTrainer::deserialize(bytes.data(), body, off);
        const double err = inverse_identity_error(t);
        if (!(err <= 1e-6)) {
            // stored inverse does not match its defining matrix: rebuild it
            out.warnings.push_back("checkpoint inverse failed identity check (err=" +
                                   std::to_string(err) + "); rebuilding");
            t.rebuild_inverse();
        }
        out.trainer = std::move(t);
    } else if (out.meta.kind == TrainerKind::lasvm) {
        out.trainer = LasvmTrainer::deserialize(bytes.data(), body, off);
    } else {
        throw CorruptionError("checkpoint carries an unknown trainer kind");
    }
    return out;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "ssvm-model";
    j["version"] = 1;
    j["kernel"] = model.kernel.to_text();
    j["C"] = model.C;
    j["bias"] = model.bias;
    j["convention"] =
        model.convention == CoefConvention::unsigned_alpha ? "unsigned" : "signed";
    nlohmann::json support = nlohmann::json::array();
    for (std::size_t i = 0; i < model.support_samples.size(); ++i) {
        nlohmann::json s;
        s["label"] = model.support_samples[i].label;
        s["features"] = model.support_samples[i].features;
        s["coef"] = model.coefficients[i];
        support.push_back(std::move(s));
    }
    j["support"] = std::move(support);
    atomic_write(path, j.dump(2) + "\n");
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad model file " + path.string() + ": " + e.what());
    }
    try {
        if (j.at("format") != "ssvm-model") throw ParseError("not a model file");
        Model m;
        m.kernel = KernelSpec::parse(j.at("kernel").get<std::string>());
        m.C = j.at("C").get<double>();
        m.bias = j.at("bias").get<double>();
        m.convention = j.at("convention").get<std::string>() == "signed"
                           ? CoefConvention::signed_alpha
                           : CoefConvention::unsigned_alpha;
        for (const auto& s : j.at("support")) {
            m.support_samples.emplace_back(s.at("features").get<std::vector<double>>(),
                                           s.at("label").get<int>());
            m.coefficients.push_back(s.at("coef").get<double>());
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad model file " + path.string() + ": " + e.what());
    }
}

}  // namespace ssvm
