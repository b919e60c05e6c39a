#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "fleetplan/instance.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = 0;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(FLEETPLAN_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Workdir {
    fs::path root;
    Workdir() {
        root = fs::temp_directory_path() / ("fleetplan-cli-" + std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
        std::ofstream f(root / "tiny.inst");
        fleetplan::write_instance(fixtures::tiny_instance(), f);
    }
    ~Workdir() { fs::remove_all(root); }
    std::string path(const std::string& name) const { return (root / name).string(); }
};

}  // namespace

TEST_CASE("ops-cost on an empty fleet charges every request") {
    Workdir w;
    const auto r = run("ops-cost --instance builtin:grubhub18 --nfd 0 --ngw 0 --nod 0 --t 26 --out " +
                       w.path("ops/nested"));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("cost_rate,30000,") != std::string::npos);
    CHECK(r.out.find("cost_per_step,25000,") != std::string::npos);
    CHECK(fs::exists(w.root / "ops/nested/fluid.csv"));
    CHECK(fs::exists(w.root / "ops/nested/summary.csv"));
    const auto fluid = slurp(w.root / "ops/nested/fluid.csv");
    CHECK(std::count(fluid.begin(), fluid.end(), '\n') == 1 + 324);
}

TEST_CASE("usage errors exit nonzero") {
    CHECK(run("ops-cost --ngw 0 --nod 0 --t 0").status != 0);
    CHECK(run("ops-cost --nfd 1 --ngw 0 --nod 0 --t 0 --bogus").status != 0);
    CHECK(run("").status != 0);
    CHECK(run("frobnicate").status != 0);
    CHECK(run("evaluate --policy myopic --out /tmp/x").status != 0);  // seed is mandatory
    CHECK(run("ops-cost --nfd 1 --ngw 0 --nod 0 --t 99").status != 0);
    CHECK(run("validate-instance --instance /nonexistent.inst").status != 0);
    CHECK(run("evaluate --policy nonsense --seed 1 --out /tmp/x").status != 0);
    CHECK(run("ops-cost --nfd 1 --ngw 0 --nod 0 --t 0 --set warp=1").status != 0);
}

TEST_CASE("help enumerates the flags") {
    const auto r = run("evaluate --help");
    CHECK(r.status == 0);
    for (const char* flag : {"--policy", "--rollouts", "--seed", "--out", "--jobs", "--instance", "--hiring-gap"})
        CHECK(r.out.find(flag) != std::string::npos);
    const auto top = run("--help");
    for (const char* cmd : {"ops-cost", "bdp", "train", "evaluate", "sweep", "simulate", "validate-instance"})
        CHECK(top.out.find(cmd) != std::string::npos);
}

TEST_CASE("validate-instance round-trips") {
    Workdir w;
    const auto r = run("validate-instance --instance " + w.path("tiny.inst") + " --write " + w.path("copy.inst"));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("ok,tiny,zones,2") != std::string::npos);
    CHECK(fleetplan::load_instance_file(w.path("copy.inst")) == fixtures::tiny_instance());
}

TEST_CASE("evaluate is byte-identical across runs") {
    Workdir w;
    const std::string base = "evaluate --instance " + w.path("tiny.inst") + " --policy myopic --rollouts 50 --seed 7 ";
    REQUIRE(run(base + "--out " + w.path("a")).status == 0);
    REQUIRE(run(base + "--out " + w.path("b")).status == 0);
    for (const char* f : {"eval.csv", "steps.csv", "trajectories.csv"}) {
        CHECK(slurp(w.root / "a" / f) == slurp(w.root / "b" / f));
        CHECK_FALSE(slurp(w.root / "a" / f).empty());
    }
    CHECK(slurp(w.root / "a/eval.csv").find("myopic,delta_my,0\n") != std::string::npos);
}

TEST_CASE("bdp, train and evaluate chain together") {
    Workdir w;
    const auto inst = w.path("tiny.inst");
    REQUIRE(run("bdp --instance " + inst + " --out " + w.path("v.tbl")).status == 0);
    REQUIRE(run("train --instance " + inst + " --episodes 0 --seed 1 --out " + w.path("zero.slopes")).status == 0);
    const auto zero = slurp(w.root / "zero.slopes");
    CHECK(zero.find("rows 0") != std::string::npos);

    REQUIRE(run("train --instance " + inst + " --episodes 30 --alpha 0.3 --seed 4 --out " + w.path("s.slopes") +
                " --trace " + w.path("trace.csv"))
                .status == 0);
    const auto trace = slurp(w.root / "trace.csv");
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 31);

    const auto bdp = run("evaluate --instance " + inst + " --policy bdp:" + w.path("v.tbl") +
                         " --rollouts 10 --seed 3 --hiring-gap --out " + w.path("eb"));
    REQUIRE(bdp.status == 0);
    const auto report = slurp(w.root / "eb/eval.csv");
    CHECK(report.find("bdp,delta,") != std::string::npos);
    CHECK(report.find("bdp,terminal_hiring_gap,") != std::string::npos);
    CHECK(run("evaluate --instance " + inst + " --policy plvfa:" + w.path("s.slopes") + " --rollouts 5 --seed 3 --out " +
              w.path("ep"))
              .status == 0);

    std::ofstream(w.root / "broken.tbl") << "fleetplan-values 7\n";
    CHECK(run("evaluate --instance " + inst + " --policy bdp:" + w.path("broken.tbl") + " --seed 1 --out " +
              w.path("x"))
              .status != 0);
}

TEST_CASE("sweep over a range") {
    Workdir w;
    const auto r = run("sweep --instance " + w.path("tiny.inst") +
                       " --param q_gw --values 0.01:0.17:0.04 --rollouts 4 --seed 2 --out " + w.path("sweep.csv"));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("cells,5,") != std::string::npos);
    const auto csv = slurp(w.root / "sweep.csv");
    for (const char* v : {"q_gw,0.01,", "q_gw,0.05,", "q_gw,0.09,", "q_gw,0.13,", "q_gw,0.17,"})
        CHECK(csv.find(v) != std::string::npos);
    CHECK(run("sweep --param q_gw --values 0.2:0.1:0.05 --seed 1 --out " + w.path("bad.csv")).status != 0);
}

TEST_CASE("simulate writes a summary and routes") {
    Workdir w;
    const auto r = run("simulate --instance " + w.path("tiny.inst") + " --nfd 3 --ngw 2 --nod 2 --t 0 --hours 20 --seed 5 --out " +
                       w.path("sim"));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("bound_holds,") != std::string::npos);
    CHECK(fs::exists(w.root / "sim/summary.csv"));
    CHECK(fs::exists(w.root / "sim/routes.csv"));
}

TEST_CASE("parameter overrides reach the model") {
    const auto base = run("ops-cost --nfd 0 --ngw 0 --nod 0 --t 26");
    const auto cheap = run("ops-cost --nfd 0 --ngw 0 --nod 0 --t 26 --set penalty_per_request=6");
    REQUIRE(base.status == 0);
    REQUIRE(cheap.status == 0);
    CHECK(cheap.out.find("cost_rate,18000,") != std::string::npos);
}
