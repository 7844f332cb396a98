#pragma once

// Command-line front end. Subcommands:
//
//   decompose    print the chain triple (and optionally the plan) for a
//                quaternion pair
//   gen-testset  generate the stratified evaluation set
//   train        train one task policy, writing a checkpoint and a curve
//   eval         run the chained method and baseline over a test set
//   report       re-render a stored outcome file as csv or a table
//
// Exit codes: 0 success, 2 usage error, 1 any other failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "davenport/checkpoint.hpp"
#include "davenport/control.hpp"
#include "davenport/evaluate.hpp"
#include "davenport/executor.hpp"
#include "davenport/presets.hpp"
#include "davenport/testset.hpp"
#include "davenport/train.hpp"

namespace davenport::cli {

namespace detail {

inline UnitQuaternion quat_from_values(const std::vector<double>& v, const char* what) {
    if (v.size() != 4) {
        throw CLI::ValidationError(std::string(what) + " expects four components: w x y z");
    }
    return UnitQuaternion::from_components(v[0], v[1], v[2], v[3]);
}

inline env::EnvConfig env_config_from_flag(const std::string& path) {
    if (path.empty()) return bench::default_env_config();
    auto f = io::open_input(path);
    return env::load_env_config(f);
}

inline std::string triple_text(const DavenportTriple& t) {
    return "(" + io::fmt(t.alpha) + ", " + io::fmt(t.beta) + ", " + io::fmt(t.gamma) + ")";
}

/// Parses "z=path,x=path,y=path" into a loaded policy set.
inline exec::PolicySet load_policy_set(const std::string& spec) {
    exec::PolicySet set;
    for (const auto& part : io::split(spec, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos || eq != 1) {
            throw std::runtime_error("--policies expects axis=path pairs, e.g. z=z.ckpt");
        }
        const Axis axis = axis_from_name(part[0]);
        auto ck = rl::load_checkpoint(part.substr(eq + 1));
        set.policies.emplace(axis, std::move(ck.params));
    }
    set.validate();
    return set;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Chained-rotation control benchmark"};
    app.require_subcommand(1);

    // decompose
    auto* dec = app.add_subcommand("decompose", "Decompose a rotation onto a chain");
    std::vector<double> dec_initial{1, 0, 0, 0}, dec_goal{1, 0, 0, 0};
    std::string dec_chain = "z-x-z";
    bool dec_split = false, dec_plan = false;
    dec->add_option("--initial", dec_initial, "initial orientation (w x y z)")->expected(4);
    dec->add_option("--goal", dec_goal, "goal orientation (w x y z)")->expected(4);
    dec->add_option("--chain", dec_chain, "axis chain, e.g. z-x-z or z-y-z");
    dec->add_flag("--split", dec_split, "apply the large-rotation splitting heuristic");
    dec->add_flag("--plan", dec_plan, "print the subgoal plan as well");

    // gen-testset
    auto* gen = app.add_subcommand("gen-testset", "Generate the stratified test set");
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--seed", gen_seed, "generation seed")->required();
    gen->add_option("--out", gen_out, "output path")->required();

    // train
    auto* tr = app.add_subcommand("train", "Train a policy for one task");
    std::string tr_task, tr_preset = "desk", tr_config, tr_env_config, tr_out, tr_curve;
    std::optional<std::uint64_t> tr_seed;
    bool tr_quiet = false;
    tr->add_option("--task", tr_task,
                   "rotate-z|rotate-x|rotate-y|rotate-parallel|rotate-xyz")
        ->required();
    tr->add_option("--preset", tr_preset, "paper|desk|desk-smoke (default desk)");
    tr->add_option("--config", tr_config, "training config file (overrides the preset)");
    tr->add_option("--env-config", tr_env_config, "environment config file");
    tr->add_option("--seed", tr_seed, "training seed (overrides config)");
    tr->add_option("--out", tr_out, "checkpoint output path")->required();
    tr->add_option("--curve", tr_curve, "learning-curve csv path (default <out>.curve.csv)");
    tr->add_flag("--quiet", tr_quiet, "suppress per-cycle progress lines");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate policies over a test set");
    std::string ev_testset, ev_policies, ev_baseline, ev_out, ev_report, ev_env_config;
    std::string ev_chain = "best-of-both";
    std::uint64_t ev_seed = 0;
    int ev_budget = 100;
    bool ev_no_split = false, ev_replan = false;
    ev->add_option("--testset", ev_testset, "test-set file")->required();
    ev->add_option("--policies", ev_policies, "axis=checkpoint pairs, e.g. z=a.ckpt,x=b.ckpt")
        ->required();
    ev->add_option("--baseline", ev_baseline, "end-to-end baseline checkpoint");
    ev->add_option("--out", ev_out, "outcome rows (csv) output path")->required();
    ev->add_option("--report", ev_report, "aggregated report csv path");
    ev->add_option("--env-config", ev_env_config, "environment config file");
    ev->add_option("--chain", ev_chain, "zxz|zyz|best-of-both");
    ev->add_option("--budget", ev_budget, "env steps per chain rotation (default 100)");
    ev->add_option("--seed", ev_seed, "evaluation seed");
    ev->add_flag("--no-split", ev_no_split, "disable the large-rotation splitting heuristic");
    ev->add_flag("--replan", ev_replan, "rebase subgoals on achieved poses (diagnostic)");

    // report
    auto* rep = app.add_subcommand("report", "Render a stored outcome file");
    std::string rep_in, rep_format = "table", rep_out;
    rep->add_option("--in", rep_in, "outcome rows csv")->required();
    rep->add_option("--format", rep_format, "csv|table");
    rep->add_option("--out", rep_out, "write to file instead of stdout");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (dec->parsed()) {
            const auto initial = detail::quat_from_values(dec_initial, "--initial");
            const auto goal = detail::quat_from_values(dec_goal, "--goal");
            const Chain chain = Chain::parse(dec_chain);
            const auto relative = goal * initial.inverse();
            const auto triple = decompose(relative, chain);
            out << "chain " << chain.name() << ": " << detail::triple_text(triple) << "\n";
            if (dec_plan) {
                const auto p = plan(initial, goal, chain, dec_split);
                for (std::size_t i = 0; i < p.steps.size(); ++i) {
                    const auto& s = p.steps[i];
                    out << "step " << i + 1 << ": axis " << axis_name(s.axis) << " angle "
                        << io::fmt(s.angle) << " subgoal (" << io::fmt(s.subgoal.w()) << ", "
                        << io::fmt(s.subgoal.x()) << ", " << io::fmt(s.subgoal.y()) << ", "
                        << io::fmt(s.subgoal.z()) << ")\n";
                }
            }
            return 0;
        }

        if (gen->parsed()) {
            const auto set = bench::gen_testset(gen_seed);
            auto f = io::open_output(gen_out);
            bench::save_testset(f, set);
            out << "wrote " << set.cases.size() << " cases to " << gen_out << "\n";
            return 0;
        }

        if (tr->parsed()) {
            const auto task = env::task_from_name(tr_task);
            rl::TrainConfig cfg;
            if (!tr_config.empty()) {
                auto f = io::open_input(tr_config);
                cfg = rl::load_train_config(f);
            } else {
                cfg = bench::preset_by_name(tr_preset, task);
            }
            if (tr_seed) cfg.seed = *tr_seed;
            const auto env_cfg = detail::env_config_from_flag(tr_env_config);
            const auto result = rl::train(task, env_cfg, cfg, tr_quiet ? nullptr : &out);
            rl::save_checkpoint(tr_out, tr_task, result.params, cfg);
            const std::string curve_path = tr_curve.empty() ? tr_out + ".curve.csv" : tr_curve;
            auto cf = io::open_output(curve_path);
            rl::write_learning_curve(cf, result.curve);
            out << "trained " << tr_task << " for " << result.env_steps_used
                << " env steps; final success "
                << (result.curve.empty() ? 0.0 : result.curve.back().success_rate) << "\n"
                << "checkpoint: " << tr_out << "\ncurve: " << curve_path << "\n";
            return 0;
        }

        if (ev->parsed()) {
            auto tf = io::open_input(ev_testset);
            const auto set = bench::load_testset(tf);
            const auto policies = detail::load_policy_set(ev_policies);
            std::optional<rl::Checkpoint> baseline;
            if (!ev_baseline.empty()) baseline = rl::load_checkpoint(ev_baseline);

            bench::EvalOptions opt;
            opt.env_config = detail::env_config_from_flag(ev_env_config);
            opt.exec_config.chain = exec::chain_mode_from_name(ev_chain);
            opt.exec_config.split_large = !ev_no_split;
            opt.exec_config.per_step_budget = ev_budget;
            opt.exec_config.replan_from_achieved = ev_replan;
            opt.seed = ev_seed;

            const auto controllers = policies.controllers();
            const auto outcomes = bench::evaluate(
                set, controllers, baseline ? &baseline->params : nullptr, opt);
            auto of = io::open_output(ev_out);
            bench::write_outcomes(of, outcomes);
            const auto report = bench::aggregate(outcomes);
            if (!ev_report.empty()) {
                auto rf = io::open_output(ev_report);
                bench::write_report_csv(rf, report);
            }
            bench::render_report_table(out, report);
            return 0;
        }

        if (rep->parsed()) {
            auto f = io::open_input(rep_in);
            const auto outcomes = bench::read_outcomes(f);
            const auto report = bench::aggregate(outcomes);
            std::ostream* sink = &out;
            std::ofstream file;
            if (!rep_out.empty()) {
                file.open(rep_out);
                if (!file) throw std::runtime_error("cannot open for writing: " + rep_out);
                sink = &file;
            }
            if (rep_format == "csv") {
                bench::write_report_csv(*sink, report);
            } else if (rep_format == "table") {
                bench::render_report_table(*sink, report);
            } else {
                err << "usage error: --format must be csv or table\n";
                return 2;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "usage error: no subcommand\n";
    return 2;
}

}  // namespace davenport::cli
