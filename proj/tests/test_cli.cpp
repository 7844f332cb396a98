#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "davenport/cli.hpp"

using davenport::cli::run_cli;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const fs::path kTmp = fs::path("cli_test_tmp");

struct TmpDir {
    TmpDir() {
        fs::remove_all(kTmp);
        fs::create_directories(kTmp);
    }
} tmp_dir_guard;

}  // namespace

TEST_CASE("decompose prints the identity triple") {
    for (const char* chain : {"z-x-z", "z-y-z", "x-y-x"}) {
        const auto r = cli({"decompose", "--chain", chain});
        CHECK(r.code == 0);
        CHECK(r.out.find("(0, 0, 0)") != std::string::npos);
    }
    const auto r = cli({"decompose", "--goal", "0.87758256189037276", "0", "0",
                        "0.47942553860420301", "--plan", "--split"});
    CHECK(r.code == 0);
    CHECK(r.out.find("chain z-x-z: (1") != std::string::npos);  // ~1.0 rad about z
    CHECK(r.out.find("step 1: axis z") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"decompose", "--bogus-flag"}).code == 2);
    CHECK(cli({"gen-testset"}).code == 2);  // missing required flags
    CHECK(cli({}).code == 2);
    const auto help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("decompose") != std::string::npos);
}

TEST_CASE("gen-testset is deterministic per seed and validated on load") {
    const auto a = kTmp / "ts_a.txt";
    const auto b = kTmp / "ts_b.txt";
    CHECK(cli({"gen-testset", "--seed", "7", "--out", a.string()}).code == 0);
    CHECK(cli({"gen-testset", "--seed", "7", "--out", b.string()}).code == 0);
    CHECK(slurp(a) == slurp(b));
    const auto c = kTmp / "ts_c.txt";
    CHECK(cli({"gen-testset", "--seed", "8", "--out", c.string()}).code == 0);
    CHECK(slurp(a) != slurp(c));
}

TEST_CASE("full pipeline: train all policies, eval, report") {
    const auto ts = kTmp / "testset.txt";
    REQUIRE(cli({"gen-testset", "--seed", "5", "--out", ts.string()}).code == 0);

    // desk-smoke trainings (tiny budgets; policies are weak but usable).
    for (const char* task : {"rotate-z", "rotate-x", "rotate-y", "rotate-xyz"}) {
        const auto ckpt = kTmp / (std::string(task) + ".ckpt");
        const auto r = cli({"train", "--task", task, "--preset", "desk-smoke", "--seed", "3",
                            "--out", ckpt.string(), "--quiet"});
        CHECK(r.code == 0);
        CHECK(fs::exists(ckpt));
        CHECK(fs::exists(kTmp / (std::string(task) + ".ckpt.curve.csv")));
        const auto ck = davenport::rl::load_checkpoint(ckpt.string());
        CHECK(ck.task == task);
    }

    const std::string policies = "z=" + (kTmp / "rotate-z.ckpt").string() +
                                 ",x=" + (kTmp / "rotate-x.ckpt").string() +
                                 ",y=" + (kTmp / "rotate-y.ckpt").string();
    const auto outcomes = kTmp / "outcomes.csv";
    const auto report = kTmp / "report.csv";
    const auto ev = cli({"eval", "--testset", ts.string(), "--policies", policies, "--baseline",
                         (kTmp / "rotate-xyz.ckpt").string(), "--out", outcomes.string(),
                         "--report", report.string(), "--seed", "11"});
    CHECK(ev.code == 0);
    CHECK(ev.out.find("comparability group: parallel") != std::string::npos);
    CHECK(fs::exists(outcomes));
    CHECK(fs::exists(report));
    const auto report_text = slurp(report);
    CHECK(report_text.rfind("bucket,method,episodes,successes,rate,mean_distance,mean_steps",
                            0) == 0);
    CHECK(report_text.find("xyz-3,baseline,4000,") != std::string::npos);

    // report re-renders the stored rows identically to the eval-time table.
    const auto rep = cli({"report", "--in", outcomes.string(), "--format", "table"});
    CHECK(rep.code == 0);
    CHECK(rep.out == ev.out);
    const auto rep_csv = cli({"report", "--in", outcomes.string(), "--format", "csv"});
    CHECK(rep_csv.code == 0);
    CHECK(rep_csv.out == report_text);
    CHECK(cli({"report", "--in", outcomes.string(), "--format", "yaml"}).code == 2);

    // load errors surface as exit 1 with a diagnostic.
    const auto bad = cli({"eval", "--testset", outcomes.string(), "--policies", policies,
                          "--out", (kTmp / "x.csv").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("error:") != std::string::npos);
}

TEST_CASE("train accepts a config file and seed override") {
    const auto cfg_path = kTmp / "train.cfg";
    {
        std::ofstream f(cfg_path);
        davenport::rl::TrainConfig cfg;
        cfg.total_timesteps = 2000;
        cfg.cycle_episodes = 10;
        cfg.updates_per_cycle = 4;
        cfg.batch_size = 32;
        cfg.hidden_sizes = {8};
        cfg.eval_episodes = 5;
        davenport::rl::save_train_config(f, cfg);
    }
    const auto ckpt = kTmp / "filecfg.ckpt";
    const auto r = cli({"train", "--task", "rotate-z", "--config", cfg_path.string(), "--seed",
                        "9", "--out", ckpt.string(), "--quiet"});
    CHECK(r.code == 0);
    const auto ck = davenport::rl::load_checkpoint(ckpt.string());
    CHECK(ck.config.seed == 9);
    CHECK(ck.config.total_timesteps == 2000);
    CHECK(ck.config.hidden_sizes == std::vector<int>{8});
}
