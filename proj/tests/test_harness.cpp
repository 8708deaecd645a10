#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "walsh/errors.hpp"
#include "walsh/harness.hpp"

using namespace walsh;

namespace {

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

ExperimentConfig small(const std::string& id) {
    ExperimentConfig c = find_experiment(id).defaults();
    if (c.seed) c.seed = 123;
    return c;
}

}  // namespace

TEST_CASE("registry lists the experiments in a fixed order") {
    std::vector<std::string> ids;
    for (const ExperimentInfo& e : experiment_registry()) {
        ids.push_back(e.id);
        CHECK_FALSE(e.description.empty());
        CHECK_FALSE(e.gates.empty());
        CHECK(e.defaults().experiment == e.id);
        CHECK(e.defaults().seed.has_value() == e.stochastic);
    }
    const std::vector<std::string> expected{"hitting",      "laplace",     "feller",
                                            "snowb-rebirth", "trace-vs-snowb", "darning",
                                            "phase-sweep",  "gamma-continuity", "recovery",
                                            "kernels",      "barrier-walk"};
    CHECK(ids == expected);
    CHECK_THROWS_AS(find_experiment("nope"), ConfigError);
}

TEST_CASE("every registry default round-trips through serialize and parse") {
    for (const ExperimentInfo& e : experiment_registry()) {
        const ExperimentConfig c = e.defaults();
        CHECK(parse_config(serialize_config(c)) == c);
        CHECK(parse_config_text(serialize_config(c).dump()) == c);
    }
    ExperimentConfig c = small("gamma-continuity");
    c.gamma_limit = std::numeric_limits<double>::infinity();
    c.weights = {0.1, 0.2, 0.3, 0.4};
    c.epsilons = {0.1, 1.0 / 3.0};
    CHECK(parse_config(serialize_config(c)) == c);
    CHECK(serialize_config(c)["domain"]["gamma_limit"] == "inf");
}

TEST_CASE("parsing: registry defaults fill gaps, seed must be explicit") {
    const ExperimentConfig c = parse_config_text(R"({"experiment": "phase-sweep"})");
    CHECK(c.nodes == find_experiment("phase-sweep").defaults().nodes);
    const ExperimentConfig h = parse_config_text(R"({"experiment": "hitting"})");
    CHECK_FALSE(h.seed.has_value());
    CHECK(error_of([&] { validate_config(h); }).find("seed") == 0);
    CHECK_NOTHROW(validate_config(parse_config_text(R"({"experiment": "hitting", "seed": 5})")));
}

TEST_CASE("parsing errors carry the field path") {
    CHECK(error_of([] { parse_config_text(R"({"experiment": "hitting", "domain": {"foo": 1}})"); })
              .find("domain.foo") == 0);
    CHECK(error_of([] { parse_config_text(R"({"experiment": "hitting", "bar": 1})"); }).find("bar") == 0);
    CHECK(error_of([] { parse_config_text(R"({"experiment": "hitting", "sim": {"dt": "x"}})"); })
              .find("sim.dt") == 0);
    CHECK(error_of([] { parse_config_text(R"({"domain": {}})"); }).find("experiment") == 0);
    CHECK_FALSE(error_of([] { parse_config_text("{not json"); }).empty());
    CHECK(error_of([] { validate_config(parse_config_text(R"({"experiment": "zzz"})")); })
              .find("experiment") == 0);
    CHECK(error_of([] {
              validate_config(parse_config_text(R"({"experiment": "feller", "domain": {"a": -1}})"));
          }).find("domain.a") == 0);
    CHECK(error_of([] {
              validate_config(parse_config_text(R"({"experiment": "kernels", "grid": {"h": 0.003}})"));
          }).find("domain.epsilons") == 0);
}

TEST_CASE("command-line overrides") {
    ExperimentConfig c = small("hitting");
    apply_override(c, "sim.n_paths=77");
    apply_override(c, "domain.r=0.25");
    apply_override(c, "domain.weights=[0.5,0.25,0.25]");
    apply_override(c, "output.dir=elsewhere");
    apply_override(c, "domain.gamma_limit=inf");
    CHECK(c.n_paths == 77);
    CHECK(c.r == 0.25);
    CHECK(c.weights.size() == 3);
    CHECK(c.output_dir == "elsewhere");
    CHECK(std::isinf(c.gamma_limit));
    CHECK(c.seed == 123u);
    CHECK_THROWS_AS(apply_override(c, "sim.nope=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "noequals"), ConfigError);
}

TEST_CASE("unknown experiment produces no output") {
    ExperimentConfig c;
    c.experiment = "unknown";
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

TEST_CASE("deterministic experiments pass their gates") {
    for (const char* id : {"feller", "kernels", "recovery"}) {
        const ExperimentOutput out = run_experiment(small(id));
        CHECK(out.passed());
        CHECK_FALSE(out.rows.empty());
    }
}

TEST_CASE("result rows: pass present iff gated; CSV schema headers") {
    ExperimentConfig c = small("hitting");
    c.n_paths = 2000;
    const ExperimentOutput out = run_experiment(c);
    for (const ResultRow& r : out.rows) CHECK(r.pass.has_value() == !r.gate.empty());
    const std::string csv = summary_csv(out);
    CHECK(csv.rfind("# schema=summary/1\nexperiment,quantity,parameters,estimate,error,oracle,gate,pass,wall_clock_s\n", 0) == 0);
    for (const CsvFile& f : out.files) CHECK(f.content.rfind("# schema=", 0) == 0);
    const auto j = summary_json(out);
    CHECK(j["experiment"] == "hitting");
    CHECK(j["rows"].size() == out.rows.size());
}

TEST_CASE("same seed gives byte-identical output at any thread count") {
    for (const char* id : {"hitting", "snowb-rebirth", "darning"}) {
        ExperimentConfig c = small(id);
        c.n_paths = 1500;
        const ExperimentOutput a = run_experiment(c);
        c.threads = 3;
        const ExperimentOutput b = run_experiment(c);
        CHECK(summary_csv(a, false) == summary_csv(b, false));
        REQUIRE(a.files.size() == b.files.size());
        for (std::size_t k = 0; k < a.files.size(); ++k) CHECK(a.files[k].content == b.files[k].content);
        c.seed = 124;
        c.threads = 1;
        CHECK(summary_csv(run_experiment(c), false) != summary_csv(a, false));
    }
}

TEST_CASE("outputs are written to the resolved directory") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "walshsim-test-out";
    fs::remove_all(dir);
    const ExperimentOutput out = run_experiment(small("feller"));
    const auto paths = write_outputs(out, dir.string());
    CHECK(paths.size() == 2 + out.files.size());
    for (const std::string& p : paths) CHECK(fs::exists(p));
    std::ifstream f(dir / "feller_summary.csv");
    std::string first;
    std::getline(f, first);
    CHECK(first == "# schema=summary/1");
    fs::remove_all(dir);

    ::unsetenv("WALSHSIM_OUTPUT_DIR");
    CHECK(resolve_output_dir("cfg") == "cfg");
    ::setenv("WALSHSIM_OUTPUT_DIR", "/tmp/envdir", 1);
    CHECK(resolve_output_dir("cfg") == "/tmp/envdir");
    ::unsetenv("WALSHSIM_OUTPUT_DIR");
}

TEST_CASE("acceptance runner reports one line per selected criterion") {
    AcceptanceOptions o;
    o.only = {3, 7};
    std::ostringstream log;
    const auto results = run_acceptance(o, log);
    REQUIRE(results.size() == 2);
    CHECK(results[0].id == 3);
    CHECK(results[1].id == 7);
    for (const auto& r : results) CHECK(r.pass);
    const std::string text = log.str();
    CHECK(text.rfind("PASS  [3]", 0) == 0);
    CHECK(text.find("\nPASS  [7]") != std::string::npos);
}
