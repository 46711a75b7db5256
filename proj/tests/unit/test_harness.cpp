#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "almgp/harness.hpp"
#include "support.hpp"

using namespace almgp;
namespace fs = std::filesystem;

namespace {

RunRecord rec(std::size_t run, Strategy s, std::size_t it, double v) {
    RunRecord r;
    r.run_id = run;
    r.strategy = s;
    r.iteration = it;
    r.n_train = 10 + it;
    r.test_rmse = v;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("almgp_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

ExperimentConfig tiny_config(const fs::path& out) {
    ExperimentConfig cfg = ExperimentConfig::defaults(ProblemName::sphere3d);
    cfg.repetitions = 2;
    cfg.al.max_added = 3;
    cfg.opt.max_total_iters = 40;
    cfg.record_timing = false;
    cfg.threads = 2;
    cfg.output_dir = out;
    return cfg;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("aggregate of a single run") {
    const auto rows = aggregate({rec(0, Strategy::alc, 1, 0.5), rec(0, Strategy::alc, 2, 0.25)});
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.mean == r.min);
        CHECK(r.min == r.max);
        CHECK(r.runs == 1);
    }
}

TEST_CASE("aggregate arithmetic") {
    const auto rows = aggregate({rec(0, Strategy::alc, 1, 1.0), rec(2, Strategy::alc, 1, 3.0)});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean == 2.0);
    CHECK(rows[0].min == 1.0);
    CHECK(rows[0].max == 3.0);
}

TEST_CASE("early-stopped runs are carried forward (hand-built fixture)") {
    // run 0 stops after iteration 2, run 2 goes to 4; random runs are separate
    const std::vector<RunRecord> records{
        rec(0, Strategy::alc, 1, 4.0),    rec(0, Strategy::alc, 2, 2.0),    rec(1, Strategy::random, 1, 5.0),
        rec(1, Strategy::random, 2, 5.0), rec(2, Strategy::alc, 1, 6.0),    rec(2, Strategy::alc, 2, 4.0),
        rec(2, Strategy::alc, 3, 3.0),    rec(2, Strategy::alc, 4, 1.0),    rec(3, Strategy::random, 1, 7.0),
    };
    const auto rows = aggregate(records);
    struct Expect {
        Strategy s;
        std::size_t it;
        double mean, min, max;
        std::size_t runs;
    };
    const Expect expect[] = {
        {Strategy::alc, 1, 5.0, 4.0, 6.0, 2},    {Strategy::alc, 2, 3.0, 2.0, 4.0, 2},
        {Strategy::alc, 3, 2.5, 2.0, 3.0, 2},    {Strategy::alc, 4, 1.5, 1.0, 2.0, 2},
        {Strategy::random, 1, 6.0, 5.0, 7.0, 2}, {Strategy::random, 2, 6.0, 5.0, 7.0, 2},
    };
    REQUIRE(rows.size() == std::size(expect));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].strategy == expect[i].s);
        CHECK(rows[i].iteration == expect[i].it);
        CHECK(rows[i].mean == expect[i].mean);
        CHECK(rows[i].min == expect[i].min);
        CHECK(rows[i].max == expect[i].max);
        CHECK(rows[i].runs == expect[i].runs);
    }
}

TEST_CASE("config json round trip, overrides and strictness") {
    for (auto name : {ProblemName::trig1d, ProblemName::synthetic2d, ProblemName::sphere3d, ProblemName::borehole8d}) {
        const auto cfg = ExperimentConfig::defaults(name);
        const auto back = ExperimentConfig::from_json(cfg.to_json());
        CHECK(back.to_json() == cfg.to_json());
    }
    const std::string minimal = R"({"problem": "trig1d"})";
    const auto d = ExperimentConfig::from_json(minimal);
    CHECK(d.to_json() == ExperimentConfig::defaults(ProblemName::trig1d).to_json());

    const auto over = ExperimentConfig::from_json(apply_override(
        apply_override(minimal, "optimizer.learning_rate=0.5"), "active_learning.stop_metric=none"));
    CHECK(over.opt.learning_rate == 0.5);
    CHECK(over.al.stop_metric == StopMetric::none);

    CHECK(thrown_kind([] { ExperimentConfig::from_json(R"({"problem": "trig1d", "colour": 1})"); }) ==
          ErrorKind::invalid_spec);
    CHECK(thrown_kind([] { ExperimentConfig::from_json(R"({"problem": "trig1d", "version": 2})"); }) ==
          ErrorKind::invalid_spec);
    CHECK(thrown_kind([] { ExperimentConfig::from_json(R"({"problem": "trig1d", "model": {"layers": [2, 6, 2]}})"); }) ==
          ErrorKind::invalid_spec);
    CHECK(thrown_kind([] { ExperimentConfig::from_json(R"({"problem": "trig1d", "strategies": ["alc", "alc"]})"); }) ==
          ErrorKind::invalid_spec);
    CHECK(thrown_kind([] { ExperimentConfig::from_json(R"({"problem": "nope"})"); }) == ErrorKind::invalid_spec);
    CHECK(thrown_kind([] { ExperimentConfig::from_json("{"); }) == ErrorKind::invalid_spec);
    CHECK(thrown_kind([] { apply_override("{}", "novalue"); }) == ErrorKind::invalid_spec);
}

TEST_CASE("run ids") {
    std::set<std::size_t> ids;
    for (std::size_t rep = 0; rep < 10; ++rep)
        for (std::size_t s = 0; s < 2; ++s) CHECK(ids.insert(make_run_id(rep, s, 2)).second);
    CHECK(make_run_id(3, 1, 2) == 7);
}

TEST_CASE("unwritable output directory fails before any compute") {
    auto cfg = ExperimentConfig::defaults(ProblemName::borehole8d);
    cfg.output_dir = "/proc/almgp-cannot-exist/out";
    CHECK(thrown_kind([&] { run_experiment(cfg); }) == ErrorKind::io);
}

TEST_CASE("single repetition, random only, one batch gives one record") {
    const auto out = scratch("single");
    auto cfg = tiny_config(out);
    cfg.repetitions = 1;
    cfg.strategies = {Strategy::random};
    cfg.al.max_added = cfg.al.batch_size;
    const auto result = run_experiment(cfg);
    CHECK(result.records.size() == 1);
    const auto lines = slurp(out / "records.csv");
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 2);
    CHECK(fs::exists(out / "checkpoints" / "run_0.json"));
    fs::remove_all(out);
}

TEST_CASE("bundle contents, ordering, plot view and determinism") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const auto ra = run_experiment(tiny_config(a));
    run_experiment(tiny_config(b));

    for (const char* f : {"records.csv", "selected_points.csv", "aggregate.csv", "rmse.svg"}) {
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
    const auto records_text = slurp(a / "records.csv");
    CHECK(records_text.rfind(std::string(kRecordsHeader) + "\n", 0) == 0);

    // strictly ordered by (run_id, iteration)
    const auto records = read_records_csv(a / "records.csv");
    CHECK(records.size() == ra.records.size());
    for (std::size_t i = 1; i < records.size(); ++i) {
        const bool ordered = records[i - 1].run_id < records[i].run_id ||
                             (records[i - 1].run_id == records[i].run_id &&
                              records[i - 1].iteration < records[i].iteration);
        CHECK(ordered);
    }
    for (const auto& r : records) CHECK(r.wall_ms == 0.0);
    for (std::size_t id = 0; id < 4; ++id) CHECK(fs::exists(a / "checkpoints" / ("run_" + std::to_string(id) + ".json")));
    CHECK(fs::exists(a / "summary.json"));

    // aggregation is idempotent
    const auto agg_before = slurp(a / "aggregate.csv");
    aggregate_directory(a);
    CHECK(slurp(a / "aggregate.csv") == agg_before);
    aggregate_directory(a);
    CHECK(slurp(a / "aggregate.csv") == agg_before);

    // every number carried by the plot is in the aggregate csv
    const std::string svg = slurp(a / "rmse.svg");
    const std::regex attr(R"re(data-(mean|min|max)="([^"]+)")re");
    std::size_t found = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), attr); it != std::sregex_iterator(); ++it) {
        ++found;
        CHECK(agg_before.find("," + (*it)[2].str()) != std::string::npos);
    }
    CHECK(found == 3 * read_aggregate_csv(a / "aggregate.csv").size());
    CHECK(svg.find("stroke-dasharray=\"6,4\"") != std::string::npos);
    CHECK(svg.find("<polygon") != std::string::npos);

    plot_directory(a);
    CHECK(slurp(a / "rmse.svg") == svg);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("output root environment variable relocates relative directories") {
    auto cfg = ExperimentConfig::defaults(ProblemName::trig1d);
    cfg.output_dir = "rel/out";
    ::setenv(kOutputRootEnv, "/tmp/almgp-root", 1);
    CHECK(resolve_output_dir(cfg) == fs::path("/tmp/almgp-root/rel/out"));
    cfg.output_dir = "/abs/out";
    CHECK(resolve_output_dir(cfg) == fs::path("/abs/out"));
    ::unsetenv(kOutputRootEnv);
    cfg.output_dir = "rel/out";
    CHECK(resolve_output_dir(cfg) == fs::path("rel/out"));
}

TEST_CASE("cli prints a machine-readable error line and exits nonzero") {
    const char* cli = std::getenv("ALMGP_CLI");
    if (cli == nullptr) {
        MESSAGE("ALMGP_CLI not set; skipping");
        return;
    }
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    const std::string cmd = std::string(cli) + " run /nonexistent.json 2> " + (dir / "err.txt").string();
    const int status = std::system(cmd.c_str());
    CHECK(status != 0);
    CHECK(slurp(dir / "err.txt").rfind("almgp-error kind=io ", 0) == 0);

    const std::string ok = std::string(cli) + " oracle sphere3d 0 0 1 > " + (dir / "out.txt").string();
    CHECK(std::system(ok.c_str()) == 0);
    CHECK(std::stod(slurp(dir / "out.txt")) == doctest::Approx(1.0 + std::exp(1.0)).epsilon(1e-15));
    fs::remove_all(dir);
}

} // TEST_SUITE
