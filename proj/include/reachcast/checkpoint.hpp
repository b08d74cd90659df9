#ifndef REACHCAST_CHECKPOINT_HPP
#define REACHCAST_CHECKPOINT_HPP

#include <cstring>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "reachcast/io.hpp"
#include "reachcast/model.hpp"
#include "reachcast/training.hpp"

namespace reachcast {

/**
 * Single-file binary container: 8-byte magic, little-endian u64 JSON header
 * length, the JSON header, a float64 little-endian tensor blob (per-tensor
 * name/shape/offset in the header), and a trailing CRC-32 over everything
 * before it. Self-describing and portable; a truncated or bit-flipped file
 * fails the checksum before anything is interpreted.
 */
inline constexpr char kContainerMagic[8] = {'R', 'C', 'H', 'S', 'U', 'R', 'R', '1'};
inline constexpr std::uint32_t kFormatVersion = 1;

/// Everything needed to reproduce inference (and the training provenance).
struct Checkpoint {
    std::uint32_t format_version = kFormatVersion;
    std::string reach_id;
    ModelConfig model_cfg;
    ChannelMask mask;
    NormStats stats;
    TrainConfig train_cfg;
    ModelParams<double> params;
};

namespace detail {

inline void append_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t read_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

inline std::string container_serialize(nlohmann::json header,
                                       const std::vector<std::pair<std::string, const Tensor<double>*>>& tensors) {
    nlohmann::json tlist = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& [name, t] : tensors) {
        tlist.push_back({{"name", name},
                         {"shape", t->shape()},
                         {"offset", offset},
                         {"dtype", "f64le"}});
        offset += t->size() * sizeof(double);
    }
    header["tensors"] = tlist;
    header["blob_bytes"] = offset;

    const std::string hj = header.dump();
    std::string out;
    out.reserve(16 + hj.size() + offset + 4);
    out.append(kContainerMagic, 8);
    append_u64le(out, hj.size());
    out += hj;
    for (const auto& [name, t] : tensors)
        out.append(reinterpret_cast<const char*>(t->data()), t->size() * sizeof(double));
    const std::uint32_t crc = crc32(out.data(), out.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((crc >> (8 * i)) & 0xFF));
    return out;
}

struct ParsedContainer {
    nlohmann::json header;
    std::map<std::string, Tensor<double>> tensors;
};

inline ParsedContainer container_parse(const std::string& bytes, const std::string& what) {
    if (bytes.size() < 20 || std::memcmp(bytes.data(), kContainerMagic, 8) != 0)
        throw ParseError(what + ": not a reachcast container");
    const std::uint32_t stored = [&] {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(
                     static_cast<unsigned char>(bytes[bytes.size() - 4 + i]))
                 << (8 * i);
        return v;
    }();
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
        throw ParseError(what + ": checksum mismatch (corrupt or truncated file)");

    const std::uint64_t hlen =
        read_u64le(reinterpret_cast<const unsigned char*>(bytes.data()) + 8);
    if (16 + hlen + 4 > bytes.size()) throw ParseError(what + ": header length out of range");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(16, hlen));
    } catch (const std::exception& e) {
        throw ParseError(what + ": bad JSON header: " + e.what());
    }
    if (header.value("format_version", 0u) != kFormatVersion)
        throw ConfigError(what + ": unsupported format version " +
                          std::to_string(header.value("format_version", 0u)));

    ParsedContainer pc;
    const std::size_t blob_start = 16 + hlen;
    const std::size_t blob_bytes = header.at("blob_bytes").get<std::size_t>();
    if (blob_start + blob_bytes + 4 != bytes.size())
        throw ParseError(what + ": blob size mismatch");
    for (const auto& te : header.at("tensors")) {
        const std::string name = te.at("name").get<std::string>();
        const auto shape = te.at("shape").get<std::vector<std::size_t>>();
        const std::size_t off = te.at("offset").get<std::size_t>();
        Tensor<double> t(shape);
        if (off + t.size() * sizeof(double) > blob_bytes)
            throw ParseError(what + ": tensor '" + name + "' overruns the blob");
        std::memcpy(t.data(), bytes.data() + blob_start + off, t.size() * sizeof(double));
        pc.tensors.emplace(name, std::move(t));
    }
    pc.header = std::move(header);
    return pc;
}

} // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    nlohmann::json h;
    h["format_version"] = kFormatVersion;
    h["kind"] = "checkpoint";
    h["reach_id"] = ckpt.reach_id;
    h["model"] = {{"hidden", ckpt.model_cfg.hidden},
                  {"max_modes", ckpt.model_cfg.max_modes},
                  {"seq_len", ckpt.model_cfg.seq_len},
                  {"fno_blocks", ckpt.model_cfg.fno_blocks}};
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < kNumChannels; ++i)
        if (ckpt.mask.keep[i]) kept.push_back(channel_layout()[i]);
    h["channels"] = kept;
    h["dropped_channels"] = ckpt.mask.dropped_names();
    h["norm_stats"] = {{"mean", ckpt.stats.mean}, {"std", ckpt.stats.stddev}};
    h["train"] = {{"epochs", ckpt.train_cfg.epochs},
                  {"lr", ckpt.train_cfg.lr},
                  {"batch_size", ckpt.train_cfg.batch_size},
                  {"lambda_smooth", ckpt.train_cfg.lambda_smooth},
                  {"val_fraction", ckpt.train_cfg.val_fraction},
                  {"seed", ckpt.train_cfg.seed},
                  {"beta1", ckpt.train_cfg.beta1},
                  {"beta2", ckpt.train_cfg.beta2},
                  {"eps", ckpt.train_cfg.eps},
                  {"weight_decay", ckpt.train_cfg.weight_decay}};

    std::vector<std::pair<std::string, const Tensor<double>*>> tensors;
    ckpt.params.for_each_named([&](const std::string& name, const Tensor<double>& t) {
        tensors.emplace_back(name, &t);
    });
    atomic_write_file(path, detail::container_serialize(std::move(h), tensors));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    auto pc = detail::container_parse(read_file(path), "checkpoint " + path.string());
    if (pc.header.value("kind", "") != "checkpoint")
        throw ConfigError("not a checkpoint container: " + path.string());

    Checkpoint c;
    c.reach_id = pc.header.value("reach_id", "");
    const auto& m = pc.header.at("model");
    c.model_cfg.hidden = m.at("hidden").get<std::size_t>();
    c.model_cfg.max_modes = m.at("max_modes").get<std::size_t>();
    c.model_cfg.seq_len = m.at("seq_len").get<std::size_t>();
    c.model_cfg.fno_blocks = m.at("fno_blocks").get<std::size_t>();
    c.mask = ChannelMask::dropping(
        pc.header.at("dropped_channels").get<std::vector<std::string>>());
    const auto& ns = pc.header.at("norm_stats");
    const auto mean = ns.at("mean").get<std::vector<double>>();
    const auto sdev = ns.at("std").get<std::vector<double>>();
    if (mean.size() != kNumChannels || sdev.size() != kNumChannels)
        throw ParseError("checkpoint: norm stats must have 8 channels");
    std::copy(mean.begin(), mean.end(), c.stats.mean.begin());
    std::copy(sdev.begin(), sdev.end(), c.stats.stddev.begin());
    c.stats.fitted = true;
    const auto& tr = pc.header.at("train");
    c.train_cfg.epochs = tr.at("epochs").get<int>();
    c.train_cfg.lr = tr.at("lr").get<double>();
    c.train_cfg.batch_size = tr.at("batch_size").get<int>();
    c.train_cfg.lambda_smooth = tr.at("lambda_smooth").get<double>();
    c.train_cfg.val_fraction = tr.at("val_fraction").get<double>();
    c.train_cfg.seed = tr.at("seed").get<std::uint64_t>();
    c.train_cfg.beta1 = tr.at("beta1").get<double>();
    c.train_cfg.beta2 = tr.at("beta2").get<double>();
    c.train_cfg.eps = tr.at("eps").get<double>();
    c.train_cfg.weight_decay = tr.at("weight_decay").get<double>();

    // rebuild parameters by name; every expected tensor must be present
    auto take = [&](const std::string& name) -> Tensor<double> {
        auto it = pc.tensors.find(name);
        if (it == pc.tensors.end())
            throw ParseError("checkpoint: missing tensor '" + name + "'");
        return std::move(it->second);
    };
    c.params.enc_w = take("encoder.w");
    c.params.enc_b = take("encoder.b");
    c.params.gru.w = take("gru.w");
    c.params.gru.u = take("gru.u");
    c.params.gru.b = take("gru.b");
    c.params.fno.resize(c.model_cfg.fno_blocks);
    for (std::size_t i = 0; i < c.model_cfg.fno_blocks; ++i) {
        const std::string p = "fno" + std::to_string(i);
        c.params.fno[i].wk = take(p + ".wk");
        c.params.fno[i].skip_w = take(p + ".skip_w");
        c.params.fno[i].skip_b = take(p + ".skip_b");
    }
    c.params.dec_w = take("decoder.w");
    c.params.dec_b = take("decoder.b");

    if (c.params.encoder_inputs() != c.mask.kept_count() + 1)
        throw ConfigError("checkpoint: encoder width inconsistent with channel mask");
    return c;
}

/// StateField in the same binary container (kind "state").
inline void save_state_binary(const std::filesystem::path& path, const StateField& sf) {
    nlohmann::json h;
    h["format_version"] = kFormatVersion;
    h["kind"] = "state";
    h["reach_id"] = sf.reach_id;
    h["dt"] = sf.dt;
    std::vector<std::pair<std::string, const Tensor<double>*>> tensors = {{"h", &sf.h},
                                                                          {"q", &sf.q}};
    atomic_write_file(path, detail::container_serialize(std::move(h), tensors));
}

inline StateField load_state_binary(const std::filesystem::path& path) {
    auto pc = detail::container_parse(read_file(path), "state " + path.string());
    if (pc.header.value("kind", "") != "state")
        throw ConfigError("not a state container: " + path.string());
    StateField sf;
    sf.reach_id = pc.header.value("reach_id", "");
    sf.dt = pc.header.value("dt", kSecondsPerHour);
    sf.h = std::move(pc.tensors.at("h"));
    sf.q = std::move(pc.tensors.at("q"));
    if (sf.h.rank() != 2 || !sf.h.same_shape(sf.q))
        throw ParseError("state container: h/q must be matching [T, N] tensors");
    return sf;
}

/// TrainReport as JSON lines, one record per epoch.
inline std::string train_report_to_jsonl(const TrainReport& report) {
    std::string out;
    for (const auto& e : report.epochs) {
        nlohmann::json j{{"epoch", e.epoch},
                         {"train_loss", e.train_loss},
                         {"seconds", e.seconds}};
        if (std::isfinite(e.val_loss)) j["val_loss"] = e.val_loss;
        if (report.best_epoch == e.epoch) j["best"] = true;
        out += j.dump() + "\n";
    }
    return out;
}

} // namespace reachcast

#endif // REACHCAST_CHECKPOINT_HPP
