#pragma once

// Benchmark evaluation: runs the chained method (both chains plus the
// per-case best-of selection) and a flat end-to-end baseline policy over the
// stratified test set, with identical per-case environment seeds so the
// comparison is paired. Every outcome row is backed by a stored execution
// trace; reports are recomputed from the stored rows, never from live state.

#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "davenport/ddpg.hpp"
#include "davenport/env.hpp"
#include "davenport/executor.hpp"
#include "davenport/testset.hpp"
#include "davenport/text_io.hpp"

namespace davenport::bench {

inline constexpr const char* kMethods[4] = {"multi-zxz", "multi-zyz", "multi-best", "baseline"};

struct CaseOutcome {
    int case_id = 0;
    std::string method;       // one of kMethods
    int required_rotations = 1;
    bool parallel_comparable = false;
    bool success = false;
    double final_distance = 0.0;
    int env_steps = 0;
    std::string chain_used;   // chain name, or "-" for the baseline
};

struct BucketStats {
    long episodes = 0;
    long successes = 0;
    double distance_sum = 0.0;
    long steps_sum = 0;

    double rate() const { return episodes ? double(successes) / episodes : 0.0; }
    double mean_distance() const { return episodes ? distance_sum / episodes : 0.0; }
    double mean_steps() const { return episodes ? double(steps_sum) / episodes : 0.0; }
};

/// Aggregated per-bucket results. Buckets are (rotations 1..3) x comparability
/// group: "parallel" restricts to parallel-comparable cases, "xyz" covers all.
struct EvalReport {
    // key: (group, rotations, method)
    std::map<std::string, BucketStats> stats;

    static std::string key(const std::string& group, int rotations, const std::string& method) {
        return group + "-" + std::to_string(rotations) + "/" + method;
    }

    const BucketStats& at(const std::string& group, int rotations,
                          const std::string& method) const {
        const auto it = stats.find(key(group, rotations, method));
        if (it == stats.end()) {
            throw std::runtime_error("missing report bucket: " + key(group, rotations, method));
        }
        return it->second;
    }
};

struct EvalOptions {
    env::EnvConfig env_config;
    exec::ExecConfig exec_config;
    std::uint64_t seed = 0;     // per-case env seeds derive from this
    int baseline_steps = 300;   // exact budget for the flat policy
};

/// Baseline episode: the flat policy conditioned directly on the 3D goal for
/// exactly `baseline_steps` env steps; success judged on the final pose.
inline CaseOutcome run_baseline_case(env::CubeRotationEnv& e, const rl::PolicyParams& baseline,
                                     const TestCase& c, const EvalOptions& opt,
                                     std::uint64_t seed) {
    auto obs = e.reset_to(c.initial, env::GoalSpec{c.goal}, seed);
    for (int t = 0; t < opt.baseline_steps; ++t) {
        obs = e.step(rl::act(baseline, obs, c.goal)).observation;
    }
    CaseOutcome out;
    out.case_id = c.id;
    out.method = "baseline";
    out.required_rotations = c.required_rotations;
    out.parallel_comparable = c.parallel_comparable;
    out.final_distance = quat_distance(obs.orientation, c.goal);
    out.success = out.final_distance < opt.exec_config.tolerance;
    out.env_steps = opt.baseline_steps;
    out.chain_used = "-";
    return out;
}

inline CaseOutcome outcome_from_trace(const TestCase& c, const std::string& method,
                                      const exec::ExecTrace& t) {
    CaseOutcome out;
    out.case_id = c.id;
    out.method = method;
    out.required_rotations = c.required_rotations;
    out.parallel_comparable = c.parallel_comparable;
    out.success = t.success;
    out.final_distance = t.final_distance;
    out.env_steps = t.total_env_steps;
    out.chain_used = t.chain_used.name();
    return out;
}

/// Evaluates the chained method and the baseline over the whole test set.
/// Per-case seeds are shared across methods (paired comparison); the env gets
/// an episode horizon long enough for the 3 x per_step_budget contract.
inline std::vector<CaseOutcome> evaluate(const TestSet& set,
                                         const exec::ControllerSet& controllers,
                                         const rl::PolicyParams* baseline,
                                         const EvalOptions& opt) {
    validate_testset(set);
    opt.exec_config.validate();
    env::EnvConfig env_cfg = opt.env_config;
    env_cfg.episode_length =
        std::max(3 * opt.exec_config.per_step_budget, opt.baseline_steps);
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, env_cfg);

    std::vector<CaseOutcome> outcomes;
    outcomes.reserve(set.cases.size() * 4);
    for (const auto& c : set.cases) {
        const std::uint64_t case_seed = derive_seed(opt.seed, 0xca5e0000ull + c.id);
        const auto zxz = exec::execute(e, controllers, c.initial, c.goal, opt.exec_config,
                                       case_seed, Chain::zxz());
        const auto zyz = exec::execute(e, controllers, c.initial, c.goal, opt.exec_config,
                                       case_seed, Chain::zyz());
        const exec::ExecTrace& best =
            zxz.success ? zxz
                        : (zyz.success ? zyz
                                       : (zyz.final_distance < zxz.final_distance ? zyz : zxz));
        outcomes.push_back(outcome_from_trace(c, "multi-zxz", zxz));
        outcomes.push_back(outcome_from_trace(c, "multi-zyz", zyz));
        outcomes.push_back(outcome_from_trace(c, "multi-best", best));
        if (baseline) {
            outcomes.push_back(run_baseline_case(e, *baseline, c, opt, case_seed));
        }
    }
    return outcomes;
}

/// Outcome rows as CSV (one stored trace per reported result).
inline void write_outcomes(std::ostream& out, const std::vector<CaseOutcome>& outcomes) {
    out << "case_id,method,required_rotations,parallel_comparable,success,final_distance,"
           "env_steps,chain_used\n";
    for (const auto& o : outcomes) {
        out << o.case_id << ',' << o.method << ',' << o.required_rotations << ','
            << (o.parallel_comparable ? 1 : 0) << ',' << (o.success ? 1 : 0) << ','
            << io::fmt(o.final_distance) << ',' << o.env_steps << ',' << o.chain_used << '\n';
    }
}

inline std::vector<CaseOutcome> read_outcomes(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("case_id,method,", 0) != 0) {
        throw std::runtime_error("outcome file load error: bad header");
    }
    std::vector<CaseOutcome> outcomes;
    while (std::getline(in, line)) {
        if (io::trim(line).empty()) continue;
        const auto parts = io::split(line, ',');
        if (parts.size() != 8) {
            throw std::runtime_error("outcome file load error: malformed row");
        }
        CaseOutcome o;
        o.case_id = std::stoi(parts[0]);
        o.method = parts[1];
        o.required_rotations = std::stoi(parts[2]);
        o.parallel_comparable = parts[3] == "1";
        o.success = parts[4] == "1";
        o.final_distance = io::parse_double(parts[5]);
        o.env_steps = std::stoi(parts[6]);
        o.chain_used = parts[7];
        outcomes.push_back(o);
    }
    return outcomes;
}

/// Recomputes the per-bucket report from stored outcome rows.
inline EvalReport aggregate(const std::vector<CaseOutcome>& outcomes) {
    EvalReport report;
    auto add = [&report](const std::string& group, const CaseOutcome& o) {
        auto& s = report.stats[EvalReport::key(group, o.required_rotations, o.method)];
        ++s.episodes;
        s.successes += o.success ? 1 : 0;
        s.distance_sum += o.final_distance;
        s.steps_sum += o.env_steps;
    };
    for (const auto& o : outcomes) {
        add("xyz", o);
        if (o.parallel_comparable) add("parallel", o);
    }
    return report;
}

/// Fixed-column CSV: bucket, method, episodes, successes, rate,
/// mean_distance, mean_steps.
inline void write_report_csv(std::ostream& out, const EvalReport& report) {
    out << "bucket,method,episodes,successes,rate,mean_distance,mean_steps\n";
    for (const char* group : {"parallel", "xyz"}) {
        for (int r = 1; r <= 3; ++r) {
            for (const char* method : kMethods) {
                const auto it = report.stats.find(EvalReport::key(group, r, method));
                if (it == report.stats.end()) continue;
                const auto& s = it->second;
                out << group << '-' << r << ',' << method << ',' << s.episodes << ','
                    << s.successes << ',' << io::fmt(s.rate()) << ','
                    << io::fmt(s.mean_distance()) << ',' << io::fmt(s.mean_steps()) << '\n';
            }
        }
    }
}

/// Reference success rates from the original dexterous-hand study (flat
/// percentages, shown for orientation only; the surrogate environment is not
/// expected to reproduce them).
inline void write_reference_annex(std::ostream& out) {
    out << "reference annex: original shadow-hand study, 10M-step training budget\n"
        << "  rotations  multi-step | parallel-trained    multi-step | xyz-trained\n"
        << "  1          97.5%      | 69%                 96.16%     | 57.5%\n"
        << "  2          88.4%      | 63.4%               82.21%     | 47.25%\n"
        << "  3          66.05%     | 47.15%              51.68%     | 43.85%\n"
        << "  note: the prose summary of the splitting ablation reports an increase\n"
        << "  from 67.05% to 82.21% on 2-rotation goals; the tabulated 2-rotation\n"
        << "  value is 82.21% (xyz) / 88.4% (parallel), and a 66.05% entry appears\n"
        << "  only in the 3-rotation row. The tabulated values are treated as\n"
        << "  authoritative here.\n";
}

/// Aligned text table over both comparability groups.
inline void render_report_table(std::ostream& out, const EvalReport& report) {
    auto pct = [](double r) {
        std::ostringstream ss;
        ss << std::fixed << std::setprecision(2) << 100.0 * r << '%';
        return ss.str();
    };
    for (const char* group : {"parallel", "xyz"}) {
        out << "comparability group: " << group << "\n";
        out << "  rotations";
        for (const char* method : kMethods) {
            out << std::setw(12) << method;
        }
        out << "\n";
        for (int r = 1; r <= 3; ++r) {
            out << "  " << std::setw(9) << r;
            for (const char* method : kMethods) {
                const auto it = report.stats.find(EvalReport::key(group, r, method));
                out << std::setw(12) << (it == report.stats.end() ? "-" : pct(it->second.rate()));
            }
            out << "\n";
        }
    }
    write_reference_annex(out);
}

}  // namespace davenport::bench
