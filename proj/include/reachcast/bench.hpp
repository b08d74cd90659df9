#ifndef REACHCAST_BENCH_HPP
#define REACHCAST_BENCH_HPP

#include <chrono>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "reachcast/pipeline.hpp"
#include "reachcast/rollout.hpp"

namespace reachcast {

/// One reach ready to benchmark: geometry, forcings and a trained model.
struct BenchEntry {
    Reach reach;
    Tensor<double> static4;
    ForcingSeries forcings;
    ModelParams<double> params;
    ModelConfig model_cfg;
    ChannelMask mask;
    NormStats stats;
};

struct BenchRow {
    std::string reach_id;
    std::size_t steps = 0;
    double oracle_seconds = 0.0;
    double surrogate_seconds = 0.0;
};

struct BenchTable {
    std::vector<BenchRow> rows;
    double oracle_total = 0.0;
    double surrogate_total = 0.0;
    double speedup = 0.0; // oracle_total / surrogate_total, whatever it is
    bool float32 = false;
};

/**
 * Wall-clock comparison of the routing oracle against the surrogate rollout
 * over the same horizon on the same machine in the same run. The ratio is
 * reported, not asserted: this oracle is a far cheaper scheme than a full
 * unsteady solver, so no particular speedup is expected at desk scale.
 */
inline BenchTable run_benchmark(const std::vector<BenchEntry>& entries, std::size_t horizon,
                                const OracleConfig& oracle_cfg = {}, bool float32 = false) {
    using clock = std::chrono::steady_clock;
    BenchTable table;
    table.float32 = float32;
    for (const auto& e : entries) {
        const std::size_t seq_len = e.model_cfg.seq_len;
        if (e.forcings.length() < seq_len + horizon)
            throw ConfigError("benchmark: forcings shorter than warmup + horizon");

        BenchRow row;
        row.reach_id = e.reach.id;
        row.steps = horizon;

        const auto t0 = clock::now();
        StateField truth = route_reach(e.reach, e.forcings, oracle_cfg);
        const auto t1 = clock::now();
        row.oracle_seconds = std::chrono::duration<double>(t1 - t0).count();

        StateField warm = warmup_rows(truth, seq_len);
        const auto t2 = clock::now();
        if (float32) {
            const auto params32 = e.params.template cast<float>();
            rollout(params32, e.model_cfg, e.mask, e.stats, e.reach, e.static4, e.forcings,
                    warm, horizon);
        } else {
            rollout(e.params, e.model_cfg, e.mask, e.stats, e.reach, e.static4, e.forcings,
                    warm, horizon);
        }
        const auto t3 = clock::now();
        row.surrogate_seconds = std::chrono::duration<double>(t3 - t2).count();

        table.oracle_total += row.oracle_seconds;
        table.surrogate_total += row.surrogate_seconds;
        table.rows.push_back(std::move(row));
    }
    table.speedup = table.surrogate_total > 0.0 ? table.oracle_total / table.surrogate_total
                                                : 0.0;
    return table;
}

inline std::string bench_table_csv(const BenchTable& t) {
    std::ostringstream out;
    out.precision(6);
    out << "reach_id,steps,oracle_seconds,surrogate_seconds,ratio\n";
    for (const auto& r : t.rows)
        out << r.reach_id << "," << r.steps << "," << r.oracle_seconds << ","
            << r.surrogate_seconds << ","
            << (r.surrogate_seconds > 0 ? r.oracle_seconds / r.surrogate_seconds : 0.0)
            << "\n";
    out << "TOTAL," << (t.rows.empty() ? 0 : t.rows[0].steps) << "," << t.oracle_total << ","
        << t.surrogate_total << "," << t.speedup << "\n";
    return out.str();
}

inline std::string bench_table_text(const BenchTable& t) {
    std::ostringstream out;
    out << std::left << std::setw(22) << "reach" << std::right << std::setw(8) << "steps"
        << std::setw(14) << "oracle [s]" << std::setw(16) << "surrogate [s]" << std::setw(10)
        << "ratio" << "\n";
    out << std::string(70, '-') << "\n";
    out << std::fixed << std::setprecision(3);
    for (const auto& r : t.rows)
        out << std::left << std::setw(22) << r.reach_id << std::right << std::setw(8)
            << r.steps << std::setw(14) << r.oracle_seconds << std::setw(16)
            << r.surrogate_seconds << std::setw(10)
            << (r.surrogate_seconds > 0 ? r.oracle_seconds / r.surrogate_seconds : 0.0)
            << "\n";
    out << std::string(70, '-') << "\n";
    out << std::left << std::setw(22) << "TOTAL" << std::right << std::setw(8) << ""
        << std::setw(14) << t.oracle_total << std::setw(16) << t.surrogate_total
        << std::setw(10) << t.speedup << "\n";
    if (t.float32) out << "(surrogate in float32 fast mode)\n";
    return out.str();
}

} // namespace reachcast

#endif // REACHCAST_BENCH_HPP
