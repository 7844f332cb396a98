#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "davenport/control.hpp"
#include "davenport/evaluate.hpp"
#include "davenport/testset.hpp"

using namespace davenport;
using namespace davenport::bench;

namespace {

exec::ControllerSet pd_set(double kp = 4.0, double kd = 2.0) {
    exec::ControllerSet set;
    const auto ctl = control::make_pd_controller(kp, kd);
    set.set(Axis::X, ctl);
    set.set(Axis::Y, ctl);
    set.set(Axis::Z, ctl);
    return set;
}

}  // namespace

TEST_CASE("test set matches the required stratification") {
    const TestSet set = gen_testset(7);
    CHECK(set.cases.size() == 6600);
    int parallel[4] = {0, 0, 0, 0};
    int total[4] = {0, 0, 0, 0};
    for (const auto& c : set.cases) {
        ++total[c.required_rotations];
        if (c.parallel_comparable) ++parallel[c.required_rotations];
        // Flat initial poses: a face normal on world +-z.
        const auto R = c.initial.to_matrix();
        double best = 0;
        for (int i = 0; i < 3; ++i) best = std::max(best, std::abs(R[2][i]));
        CHECK(best >= std::cos(1e-9));
    }
    CHECK(total[1] == 600);
    CHECK(total[2] == 2000);
    CHECK(total[3] == 4000);
    CHECK(parallel[1] == 200);
    CHECK(parallel[2] == 1000);
    CHECK(parallel[3] == 2000);

    // Parallel-comparable cases have quantized middle angles on both chains.
    for (const auto& c : set.cases) {
        if (!c.parallel_comparable) continue;
        const auto rel = c.goal * c.initial.inverse();
        const double beta = decompose(rel, Chain::zxz()).beta;
        bool quantized = false;
        for (double q : {0.0, kPi / 2, kPi}) quantized |= std::abs(beta - q) < 1e-9;
        CHECK(quantized);
    }
}

TEST_CASE("test set serialization is deterministic and validated") {
    const TestSet a = gen_testset(7);
    const TestSet b = gen_testset(7);
    std::stringstream sa, sb;
    save_testset(sa, a);
    save_testset(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(gen_testset(8).cases[0].goal.w() != a.cases[0].goal.w());

    std::stringstream in(sa.str());
    const TestSet loaded = load_testset(in);
    CHECK(loaded.seed == 7);
    CHECK(loaded.cases.size() == 6600);
    CHECK(loaded.cases[123].goal == a.cases[123].goal);

    // Corrupting a case breaks load-time validation.
    TestSet broken = a;
    broken.cases[5].required_rotations = 3;
    std::stringstream sbad;
    save_testset(sbad, broken);
    CHECK_THROWS_AS(load_testset(sbad), std::runtime_error);

    std::stringstream junk("not a testset\n");
    CHECK_THROWS_AS(load_testset(junk), std::runtime_error);
}

TEST_CASE("oracle controllers in a quiet environment solve every bucket") {
    const TestSet set = gen_testset(11);
    EvalOptions opt;
    opt.env_config.control_noise = 0.0;
    opt.env_config.tilt_drift = 0.0;
    opt.seed = 3;
    const auto outcomes = evaluate(set, pd_set(), nullptr, opt);
    CHECK(outcomes.size() == 6600 * 3);  // no baseline rows
    const auto report = aggregate(outcomes);
    for (const char* group : {"parallel", "xyz"}) {
        for (int r = 1; r <= 3; ++r) {
            CHECK(report.at(group, r, "multi-best").rate() == 1.0);
        }
    }
    // Budget contract: no chain attempt exceeds three rotation budgets.
    for (const auto& o : outcomes) {
        CHECK(o.env_steps <= 3 * opt.exec_config.per_step_budget);
    }
    // Episode counts mirror the stratification.
    CHECK(report.at("xyz", 3, "multi-best").episodes == 4000);
    CHECK(report.at("parallel", 1, "multi-zxz").episodes == 200);
}

TEST_CASE("random actions alone almost never solve 3-rotation cases") {
    const TestSet set = gen_testset(13);
    env::EnvConfig cfg;
    cfg.episode_length = 300;
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, cfg);
    Rng arng(17);
    long n = 0, ok = 0;
    for (const auto& c : set.cases) {
        if (c.required_rotations != 3) continue;
        auto obs = e.reset_to(c.initial, env::GoalSpec{c.goal}, 9000 + c.id);
        env::StepResult r;
        for (int t = 0; t < 300; ++t) {
            r = e.step({arng.uniform(-1, 1), arng.uniform(-1, 1), arng.uniform(-1, 1)});
        }
        ++n;
        ok += r.info.is_success ? 1 : 0;
    }
    CHECK(n == 4000);
    CHECK(double(ok) / double(n) <= 0.05);
}

TEST_CASE("outcome rows round trip and reports recompute identically") {
    const TestSet set = gen_testset(19);
    TestSet small;
    small.seed = set.seed;
    // A slice is enough for the serialization contract (skip validation by
    // writing rows directly).
    EvalOptions opt;
    opt.env_config.control_noise = 0.0;
    opt.env_config.tilt_drift = 0.0;
    opt.seed = 5;
    const auto outcomes = evaluate(set, pd_set(1.0, 0.5), nullptr, opt);

    std::stringstream s1;
    write_outcomes(s1, outcomes);
    std::stringstream s1_copy(s1.str());
    const auto reread = read_outcomes(s1_copy);
    REQUIRE(reread.size() == outcomes.size());

    std::stringstream r1, r2, t1, t2;
    write_report_csv(r1, aggregate(outcomes));
    write_report_csv(r2, aggregate(reread));
    CHECK(r1.str() == r2.str());
    render_report_table(t1, aggregate(outcomes));
    render_report_table(t2, aggregate(reread));
    CHECK(t1.str() == t2.str());

    // The rendered report carries the reference annex and its caveat.
    CHECK(t1.str().find("97.5%") != std::string::npos);
    CHECK(t1.str().find("82.21%") != std::string::npos);
    CHECK(t1.str().find("67.05%") != std::string::npos);
    CHECK(t1.str().find("comparability group: parallel") != std::string::npos);

    std::stringstream junk("nope\n");
    CHECK_THROWS_AS(read_outcomes(junk), std::runtime_error);
}

TEST_CASE("evaluation is deterministic given the seed") {
    TestSet small = gen_testset(23);
    small.cases.resize(0);
    // Rebuild a reduced but stratification-complete set is costly; instead
    // compare two full evaluations on the same set and seed.
    const TestSet set = gen_testset(23);
    EvalOptions opt;
    opt.seed = 77;
    const auto a = evaluate(set, pd_set(), nullptr, opt);
    const auto b = evaluate(set, pd_set(), nullptr, opt);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].success == b[i].success);
        CHECK(a[i].final_distance == b[i].final_distance);
        CHECK(a[i].env_steps == b[i].env_steps);
    }
}
