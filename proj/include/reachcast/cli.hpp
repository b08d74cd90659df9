#ifndef REACHCAST_CLI_HPP
#define REACHCAST_CLI_HPP

#include <Eigen/Core>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "reachcast/ablation.hpp"
#include "reachcast/bench.hpp"
#include "reachcast/checkpoint.hpp"
#include "reachcast/metrics.hpp"
#include "reachcast/pipeline.hpp"

namespace reachcast::cli {

namespace fs = std::filesystem;

namespace detail {

inline std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline StateField load_state_any(const fs::path& path) {
    require_exists(path, "state file");
    if (path.extension() == ".bin") return load_state_binary(path);
    return state_from_csv(read_file(path));
}

inline void save_state_any(const fs::path& path, const StateField& sf) {
    if (path.extension() == ".bin") save_state_binary(path, sf);
    else atomic_write_file(path, state_to_csv(sf));
}

inline nlohmann::json variable_json(const VariableMetrics& v) {
    nlohmann::json j{{"rmse", v.rmse},
                     {"mae", v.mae},
                     {"abs_err_median", v.abs_err_median},
                     {"abs_err_mean", v.abs_err_mean},
                     {"abs_err_p90", v.abs_err_p90}};
    if (v.nse) j["nse"] = *v.nse;
    return j;
}

inline nlohmann::json report_json(const MetricsReport& rep) {
    nlohmann::json j;
    j["reach_id"] = rep.reach_id;
    j["steps_evaluated"] = rep.steps_evaluated;
    j["sections"] = rep.sections;
    j["warmup_skipped"] = rep.warmup_skipped;
    j["stage"] = variable_json(rep.stage);
    j["discharge"] = variable_json(rep.discharge);
    j["stage_ft"] = {{"abs_err_median", rep.stage_abs_err_median_ft},
                     {"abs_err_mean", rep.stage_abs_err_mean_ft},
                     {"abs_err_p90", rep.stage_abs_err_p90_ft}};
    if (auto m = median_stage_nse(rep)) j["median_xs_stage_nse"] = *m;
    return j;
}

/// Oracle-route ground truth when no truth files are supplied.
inline StateField truth_for(const Reach& reach, const ForcingSeries& fs,
                            const std::optional<fs::path>& truth_path) {
    if (truth_path) return load_state_any(*truth_path);
    return route_reach(reach, fs);
}

} // namespace detail

struct GenDataArgs {
    std::string out_dir;
    SyntheticSpec spec;             // seed 7, N=40, 2000 h standard defaults
    std::size_t train_years = 2;
    double holdout_factor = 1.3;
    bool binary = false;
};

inline void run_gen_data(const GenDataArgs& a) {
    DatasetSpec dspec{a.spec, a.train_years, a.holdout_factor};
    Dataset ds = build_dataset(dspec);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    atomic_write_file(dir / "geometry.txt", serialize_geometry(ds.reach));

    nlohmann::json manifest;
    manifest["reach_id"] = ds.reach.id;
    manifest["seed"] = a.spec.seed;
    manifest["n_xs"] = ds.reach.size();
    manifest["hours"] = a.spec.duration_hours;
    manifest["train_years"] = a.train_years;
    manifest["holdout_peak_factor"] = a.holdout_factor;
    manifest["geometry"] = "geometry.txt";

    auto write_series = [&](const std::string& stem, const TrainSeries& sr) {
        atomic_write_file(dir / (stem + ".forcings.csv"), serialize_forcings(sr.forcings));
        detail::save_state_any(dir / (stem + (a.binary ? ".truth.bin" : ".truth.csv")),
                               sr.truth);
        return nlohmann::json{{"forcings", stem + ".forcings.csv"},
                              {"truth", stem + (a.binary ? ".truth.bin" : ".truth.csv")}};
    };
    nlohmann::json years = nlohmann::json::array();
    for (std::size_t y = 0; y < ds.train.size(); ++y)
        years.push_back(write_series("train_" + std::to_string(y), ds.train[y]));
    manifest["train"] = years;
    manifest["holdout"] = write_series("holdout", ds.holdout);
    atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote dataset for reach " << ds.reach.id << " to " << dir.string() << "\n";
}

struct TrainArgs {
    std::string geometry;
    std::vector<std::string> forcings;
    std::vector<std::string> truth; // optional, else oracle-routed
    std::string out;
    ModelConfig model;
    TrainConfig train;
    std::vector<std::string> drop_channels;
};

inline void run_train(const TrainArgs& a) {
    require_exists(a.geometry, "geometry file");
    if (a.forcings.empty()) throw ConfigError("train: at least one --forcings file required");
    if (!a.truth.empty() && a.truth.size() != a.forcings.size())
        throw ConfigError("train: --truth must list one file per forcings file");

    TrainData data;
    data.reach = parse_geometry(read_file(a.geometry));
    data.static4 = static_features(data.reach);
    for (std::size_t i = 0; i < a.forcings.size(); ++i) {
        require_exists(a.forcings[i], "forcings file");
        TrainSeries sr;
        sr.forcings = parse_forcings(read_file(a.forcings[i]));
        sr.truth = detail::truth_for(
            data.reach, sr.forcings,
            a.truth.empty() ? std::nullopt : std::optional<fs::path>(a.truth[i]));
        if (sr.truth.sections() != data.reach.size())
            throw ConfigError("train: truth section count does not match the geometry");
        data.series.push_back(std::move(sr));
    }

    const ChannelMask mask = ChannelMask::dropping(a.drop_channels);
    TrainResult r = train_reach(data, a.model, mask, a.train);

    Checkpoint ckpt;
    ckpt.reach_id = data.reach.id;
    ckpt.model_cfg = a.model;
    ckpt.mask = mask;
    ckpt.stats = r.stats;
    ckpt.train_cfg = a.train;
    ckpt.params = std::move(r.params);
    save_checkpoint(a.out, ckpt);
    atomic_write_file(a.out + ".train.jsonl", train_report_to_jsonl(r.report));

    const auto& last = r.report.epochs.back();
    std::cout << "trained " << data.reach.id << ": " << r.report.epochs.size()
              << " epochs, final train loss " << last.train_loss;
    if (std::isfinite(last.val_loss))
        std::cout << ", best val loss "
                  << r.report.epochs[static_cast<std::size_t>(
                                         std::max(r.report.best_epoch - 1, 0))]
                         .val_loss
                  << " (epoch " << r.report.best_epoch << ")";
    std::cout << "\ncheckpoint: " << a.out << "\n";
}

struct RolloutArgs {
    std::string checkpoint;
    std::string geometry;
    std::string forcings;
    std::string truth; // warmup source
    std::string out;
    std::size_t horizon = 0; // 0 = everything after warmup
    bool float32 = false;
};

inline void run_rollout(const RolloutArgs& a) {
    require_exists(a.checkpoint, "checkpoint");
    require_exists(a.geometry, "geometry file");
    require_exists(a.forcings, "forcings file");
    Checkpoint ckpt = load_checkpoint(a.checkpoint);
    Reach reach = parse_geometry(read_file(a.geometry));
    if (!ckpt.reach_id.empty() && ckpt.reach_id != reach.id)
        throw ConfigError("rollout: checkpoint was trained on reach '" + ckpt.reach_id +
                          "', geometry is '" + reach.id + "'");
    Tensor<double> static4 = static_features(reach);
    ForcingSeries forcings = parse_forcings(read_file(a.forcings));
    StateField truth = detail::truth_for(reach, forcings,
                                         a.truth.empty()
                                             ? std::nullopt
                                             : std::optional<fs::path>(a.truth));
    const std::size_t seq_len = ckpt.model_cfg.seq_len;
    const std::size_t horizon =
        a.horizon ? a.horizon : forcings.length() - seq_len;

    StateField warm = warmup_rows(truth, seq_len);
    RolloutResult res;
    if (a.float32) {
        const auto params32 = ckpt.params.cast<float>();
        res = rollout(params32, ckpt.model_cfg, ckpt.mask, ckpt.stats, reach, static4,
                      forcings, warm, horizon);
    } else {
        res = rollout(ckpt.params, ckpt.model_cfg, ckpt.mask, ckpt.stats, reach, static4,
                      forcings, warm, horizon);
    }
    detail::save_state_any(a.out, res.pred);
    std::cout << "rolled out " << horizon << " steps (" << seq_len << " warmup rows)";
    if (res.first_oob_step)
        std::cout << "; WARNING: stage left physical bounds at step " << *res.first_oob_step;
    std::cout << "\nprediction: " << a.out << "\n";
}

struct EvaluateArgs {
    std::string pred;
    std::string truth;
    std::string out_dir;
    std::size_t warmup = 12;
};

inline void run_evaluate(const EvaluateArgs& a) {
    StateField pred = detail::load_state_any(a.pred);
    StateField truth = detail::load_state_any(a.truth);
    if (truth.steps() > pred.steps()) truth = truth_window(truth, pred.steps());
    MetricsReport rep = evaluate_reach(pred, truth, a.warmup);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    atomic_write_file(dir / "report.json", detail::report_json(rep).dump(2) + "\n");
    atomic_write_file(dir / "per_xs_nse.csv", per_xs_nse_csv(rep));
    atomic_write_file(dir / "stage_error_distribution.csv",
                      stage_error_distribution_csv(pred, truth, a.warmup));
    std::cout << detail::report_json(rep).dump(2) << "\n";
}

struct AblateArgs {
    std::string protocol = "features"; // features | data-volume
    std::string out_dir;
    std::uint64_t seed = 7;
    std::size_t n_xs = 24;
    std::size_t hours = 1500;
    int epochs = 30;
    double lr = 2e-4;
    int batch_size = 16;
    std::size_t horizon = 240;
    std::vector<std::string> drop_channels = {"z_bank", "n_man"};
};

inline void run_ablate(const AblateArgs& a) {
    DatasetSpec dspec;
    dspec.base.seed = a.seed;
    dspec.base.n_xs = a.n_xs;
    dspec.base.duration_hours = a.hours;
    // wide roughness spread makes the static channels load-bearing
    dspec.base.manning_lo = 0.025;
    dspec.base.manning_hi = 0.06;
    Dataset ds = build_dataset(dspec);

    AblationConfig cfg;
    cfg.train.epochs = a.epochs;
    cfg.train.lr = a.lr;
    cfg.train.batch_size = a.batch_size;
    cfg.train.seed = a.seed;
    cfg.rollout_horizon = a.horizon;

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    nlohmann::json out;
    if (a.protocol == "features") {
        auto res = ablate_features(ds, a.drop_channels, cfg);
        out["protocol"] = "features";
        out["dropped_channels"] = res.dropped;
        out["full"] = detail::report_json(res.full);
        out["ablated"] = detail::report_json(res.ablated);
        out["stage_rmse_ratio"] = res.ablated.stage.rmse / res.full.stage.rmse;
    } else if (a.protocol == "data-volume") {
        auto arms = default_data_volume_arms(ds);
        const std::size_t gauge = ds.reach.size() / 2;
        auto res = ablate_data_volume(ds, arms, cfg, gauge);
        out["protocol"] = "data-volume";
        out["gauge_xs"] = gauge;
        for (const auto& r : res) {
            nlohmann::json arm = detail::report_json(r.report);
            arm["peak_stage_error_m"] = r.peak_stage_error;
            out["arms"][r.name] = arm;
        }
    } else {
        throw ConfigError("ablate: unknown protocol '" + a.protocol + "'");
    }
    atomic_write_file(dir / ("ablation_" + a.protocol + ".json"), out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
}

struct BenchArgs {
    std::string out_dir;
    std::size_t reaches = 5;
    std::size_t horizon = 1000;
    std::uint64_t seed = 7;
    std::size_t n_xs = 40;
    std::size_t hours = 1200;
    int prep_epochs = 2;
    bool float32 = false;
};

inline void run_bench(const BenchArgs& a) {
    if (a.reaches < 1) throw ConfigError("bench: need at least one reach");
    std::vector<BenchEntry> entries;
    for (std::size_t i = 0; i < a.reaches; ++i) {
        SyntheticSpec spec;
        spec.seed = a.seed + i;
        spec.n_xs = a.n_xs;
        spec.duration_hours = a.hours;
        DatasetSpec dspec{spec, 1, 1.0};
        Dataset ds = build_dataset(dspec);

        TrainConfig tc;
        tc.epochs = a.prep_epochs;
        tc.seed = a.seed + i;
        ModelConfig mc;
        TrainResult r = train_reach(ds.train_data(), mc, ChannelMask::full(), tc);

        BenchEntry e;
        e.reach = ds.reach;
        e.static4 = ds.static4;
        e.forcings = ds.holdout.forcings;
        e.params = std::move(r.params);
        e.model_cfg = mc;
        e.mask = ChannelMask::full();
        e.stats = r.stats;
        entries.push_back(std::move(e));
    }
    const std::size_t horizon =
        std::min<std::size_t>(a.horizon, a.hours - entries[0].model_cfg.seq_len);
    BenchTable table = run_benchmark(entries, horizon, {}, a.float32);
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    atomic_write_file(dir / "bench.csv", bench_table_csv(table));
    atomic_write_file(dir / "bench.txt", bench_table_text(table));
    std::cout << bench_table_text(table);
}

/// Entry point: subcommand dispatch with the documented exit-code contract
/// (0 success, 1 validation/usage error, 2 runtime failure).
inline int run(int argc, const char* const* argv) {
    Eigen::setNbThreads(thread_cap());

    CLI::App app{"river-reach surrogate pipeline: data generation, training, "
                 "autoregressive rollout, evaluation, ablations, benchmark"};
    app.require_subcommand(1);

    GenDataArgs gd;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic reach dataset");
    gen->add_option("--out", gd.out_dir, "output directory")->required();
    gen->add_option("--seed", gd.spec.seed, "generator seed");
    gen->add_option("--n-xs", gd.spec.n_xs, "cross-section count");
    gen->add_option("--hours", gd.spec.duration_hours, "hours per year");
    gen->add_option("--events", gd.spec.event_count, "flood pulses per year");
    gen->add_option("--length-m", gd.spec.length_m, "reach length [m]");
    gen->add_option("--slope", gd.spec.slope, "mean bed slope");
    gen->add_option("--base-width", gd.spec.base_width_m, "channel width [m]");
    gen->add_option("--manning-min", gd.spec.manning_lo, "roughness range start");
    gen->add_option("--manning-max", gd.spec.manning_hi, "roughness range end");
    gen->add_option("--peak-min", gd.spec.peak_lo_m3s, "pulse crest range start [m^3/s]");
    gen->add_option("--peak-max", gd.spec.peak_hi_m3s, "pulse crest range end [m^3/s]");
    gen->add_option("--train-years", gd.train_years, "training years");
    gen->add_option("--holdout-factor", gd.holdout_factor, "holdout peak scaling");
    gen->add_flag("--binary", gd.binary, "write truth as binary containers");

    TrainArgs ta;
    std::string ta_forcings, ta_truth, ta_drop;
    auto* tr = app.add_subcommand("train", "train a surrogate on one reach");
    tr->add_option("--geometry", ta.geometry, "geometry file")->required();
    tr->add_option("--forcings", ta_forcings, "comma-separated forcing CSVs")->required();
    tr->add_option("--truth", ta_truth,
                   "comma-separated truth files (omit to route with the oracle)");
    tr->add_option("--out", ta.out, "checkpoint output path")->required();
    tr->add_option("--seed", ta.train.seed, "training seed");
    tr->add_option("--epochs", ta.train.epochs, "epochs");
    tr->add_option("--lr", ta.train.lr, "learning rate");
    tr->add_option("--batch-size", ta.train.batch_size, "mini-batch size");
    tr->add_option("--lambda-smooth", ta.train.lambda_smooth, "smoothness penalty weight");
    tr->add_option("--val-fraction", ta.train.val_fraction, "validation fraction");
    tr->add_option("--drop-channels", ta_drop, "comma-separated channels to ablate");
    tr->add_option("--hidden", ta.model.hidden, "hidden width");
    tr->add_option("--max-modes", ta.model.max_modes, "Fourier mode cap");

    RolloutArgs ra;
    auto* ro = app.add_subcommand("rollout", "autoregressive closed-loop forecast");
    ro->add_option("--checkpoint", ra.checkpoint, "trained checkpoint")->required();
    ro->add_option("--geometry", ra.geometry, "geometry file")->required();
    ro->add_option("--forcings", ra.forcings, "forcing CSV")->required();
    ro->add_option("--truth", ra.truth, "truth file for the warm start (omit to route)");
    ro->add_option("--out", ra.out, "prediction output (.csv or .bin)")->required();
    ro->add_option("--horizon", ra.horizon, "steps to predict (default: rest of forcings)");
    ro->add_flag("--float32", ra.float32, "float32 fast inference mode");

    EvaluateArgs ea;
    auto* ev = app.add_subcommand("evaluate", "metric suite on prediction vs truth");
    ev->add_option("--pred", ea.pred, "predicted state (.csv or .bin)")->required();
    ev->add_option("--truth", ea.truth, "truth state (.csv or .bin)")->required();
    ev->add_option("--out", ea.out_dir, "report output directory")->required();
    ev->add_option("--warmup", ea.warmup, "warmup rows to exclude");

    AblateArgs aa;
    std::string aa_drop;
    auto* ab = app.add_subcommand("ablate", "feature / data-volume ablation protocols");
    ab->add_option("--protocol", aa.protocol, "features | data-volume");
    ab->add_option("--out", aa.out_dir, "output directory")->required();
    ab->add_option("--seed", aa.seed, "protocol seed");
    ab->add_option("--n-xs", aa.n_xs, "cross-section count");
    ab->add_option("--hours", aa.hours, "hours per year");
    ab->add_option("--epochs", aa.epochs, "epochs per arm");
    ab->add_option("--lr", aa.lr, "learning rate");
    ab->add_option("--batch-size", aa.batch_size, "mini-batch size");
    ab->add_option("--horizon", aa.horizon, "rollout horizon");
    ab->add_option("--drop-channels", aa_drop, "channels for the feature protocol");

    BenchArgs ba;
    auto* be = app.add_subcommand("bench", "wall-clock oracle vs surrogate");
    be->add_option("--out", ba.out_dir, "output directory")->required();
    be->add_option("--reaches", ba.reaches, "number of synthetic reaches");
    be->add_option("--horizon", ba.horizon, "forecast steps");
    be->add_option("--seed", ba.seed, "seed");
    be->add_option("--n-xs", ba.n_xs, "cross-section count");
    be->add_option("--hours", ba.hours, "forcing hours");
    be->add_option("--epochs", ba.prep_epochs, "training epochs for model prep");
    be->add_flag("--float32", ba.float32, "float32 fast inference mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) run_gen_data(gd);
        if (tr->parsed()) {
            ta.forcings = detail::split_csv_list(ta_forcings);
            ta.truth = detail::split_csv_list(ta_truth);
            ta.drop_channels = detail::split_csv_list(ta_drop);
            run_train(ta);
        }
        if (ro->parsed()) run_rollout(ra);
        if (ev->parsed()) run_evaluate(ea);
        if (ab->parsed()) {
            if (!aa_drop.empty()) aa.drop_channels = detail::split_csv_list(aa_drop);
            run_ablate(aa);
        }
        if (be->parsed()) run_bench(ba);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace reachcast::cli

#endif // REACHCAST_CLI_HPP
