#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include <reachcast/checkpoint.hpp>
#include <reachcast/synthetic.hpp>

using namespace reachcast;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("reachcast-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

Checkpoint make_checkpoint(std::uint64_t seed = 11) {
    Checkpoint c;
    c.reach_id = "synthetic-11";
    c.model_cfg.hidden = 12;
    c.model_cfg.max_modes = 5;
    c.model_cfg.seq_len = 12;
    c.mask = ChannelMask::dropping({"n_man"});
    for (std::size_t i = 0; i < kNumChannels; ++i) {
        c.stats.mean[i] = 0.1 * double(i) - 0.3;
        c.stats.stddev[i] = 1.0 + 0.25 * double(i);
    }
    c.stats.fitted = true;
    c.train_cfg.seed = seed;
    c.train_cfg.epochs = 17;
    c.train_cfg.lr = 3.5e-4;
    c.params = init_model_params<double>(c.model_cfg, c.mask.kept_count(), 5, Rng(seed));
    return c;
}

} // namespace

TEST_CASE("checkpoint round trip is bit-exact on every field") {
    TempDir tmp;
    const auto path = tmp.path / "model.ckpt";
    Checkpoint c = make_checkpoint();
    save_checkpoint(path, c);
    Checkpoint r = load_checkpoint(path);

    CHECK(r.reach_id == c.reach_id);
    CHECK(r.model_cfg.hidden == c.model_cfg.hidden);
    CHECK(r.model_cfg.max_modes == c.model_cfg.max_modes);
    CHECK(r.model_cfg.seq_len == c.model_cfg.seq_len);
    CHECK(r.mask == c.mask);
    CHECK(r.train_cfg.epochs == c.train_cfg.epochs);
    CHECK(r.train_cfg.lr == c.train_cfg.lr);
    CHECK(r.train_cfg.seed == c.train_cfg.seed);
    for (std::size_t i = 0; i < kNumChannels; ++i) {
        CHECK(r.stats.mean[i] == c.stats.mean[i]);
        CHECK(r.stats.stddev[i] == c.stats.stddev[i]);
    }
    auto a = std::as_const(c.params).tensors();
    auto b = std::as_const(r.params).tensors();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i]->shape() == b[i]->shape());
        for (std::size_t j = 0; j < a[i]->size(); ++j) CHECK((*a[i])[j] == (*b[i])[j]);
    }
}

TEST_CASE("truncated checkpoint fails the checksum, nothing partial loads") {
    TempDir tmp;
    const auto path = tmp.path / "model.ckpt";
    save_checkpoint(path, make_checkpoint());
    auto bytes = read_file(path);
    atomic_write_file(path, bytes.substr(0, bytes.size() - 257));
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
}

TEST_CASE("bit flip anywhere fails the checksum") {
    TempDir tmp;
    const auto path = tmp.path / "model.ckpt";
    save_checkpoint(path, make_checkpoint());
    auto bytes = read_file(path);
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
    atomic_write_file(path, bytes);
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
}

TEST_CASE("wrong magic and wrong version are rejected") {
    TempDir tmp;
    const auto path = tmp.path / "model.ckpt";
    atomic_write_file(path, "definitely not a container");
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);

    // rewrite with a bumped version and a fixed-up checksum
    save_checkpoint(path, make_checkpoint());
    auto bytes = read_file(path);
    const auto pos = bytes.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    bytes.replace(pos, 18, "\"format_version\":9");
    bytes.resize(bytes.size() - 4);
    const std::uint32_t crc = crc32(bytes.data(), bytes.size());
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((crc >> (8 * i)) & 0xFF));
    atomic_write_file(path, bytes);
    CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
}

TEST_CASE("checkpoint records the ablation mask") {
    TempDir tmp;
    const auto path = tmp.path / "model.ckpt";
    Checkpoint c = make_checkpoint();
    save_checkpoint(path, c);
    Checkpoint r = load_checkpoint(path);
    CHECK(r.mask.dropped_names() == std::vector<std::string>{"n_man"});
    // loading enforces encoder-width/mask consistency
    CHECK(r.params.encoder_inputs() == r.mask.kept_count() + 1);
}

TEST_CASE("state binary container round trip") {
    TempDir tmp;
    Rng rng(3);
    StateField sf;
    sf.reach_id = "r9";
    sf.resize(20, 6);
    for (std::size_t i = 0; i < sf.h.size(); ++i) {
        sf.h[i] = rng.uniform(-3, 12);
        sf.q[i] = rng.uniform(0, 800);
    }
    const auto path = tmp.path / "truth.bin";
    save_state_binary(path, sf);
    StateField r = load_state_binary(path);
    CHECK(r.reach_id == "r9");
    CHECK(max_abs_diff(r.h, sf.h) == 0.0);
    CHECK(max_abs_diff(r.q, sf.q) == 0.0);

    // corrupting one byte breaks the load
    auto bytes = read_file(path);
    bytes[40] = static_cast<char>(bytes[40] + 1);
    atomic_write_file(path, bytes);
    CHECK_THROWS_AS(load_state_binary(path), ParseError);
}

TEST_CASE("atomic writes leave no partial files behind") {
    TempDir tmp;
    const auto path = tmp.path / "out.txt";
    atomic_write_file(path, "first");
    atomic_write_file(path, "second");
    CHECK(read_file(path) == "second");
    std::size_t entries = 0;
    for (auto const& e : fs::directory_iterator(tmp.path)) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1); // no stray temp files
}

TEST_CASE("train report serializes one JSON record per epoch") {
    TrainReport rep;
    rep.best_epoch = 2;
    for (int e = 1; e <= 3; ++e) {
        EpochStats s;
        s.epoch = e;
        s.train_loss = 0.5 / e;
        s.val_loss = 0.6 / e;
        s.seconds = 0.1;
        rep.epochs.push_back(s);
    }
    const std::string jsonl = train_report_to_jsonl(rep);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 3);
    auto first = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
    CHECK(first["epoch"] == 1);
    CHECK(first["train_loss"] == 0.5);
    CHECK(jsonl.find("\"best\":true") != std::string::npos);
}
