// Exercises the shared-library surface only: capi.h plus the standard library.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dsmle/capi.h"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("dsmle_capi_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string config_text(const std::string& out, unsigned long long seed) {
    return R"({
      "family": "flip2",
      "box": [[0.05, 0.95]],
      "theta0": [0.3],
      "observation": {"kind": "gaussian", "means": [0.0, 1.0], "sigma": 0.5},
      "n": 40,
      "grid_resolution": [15],
      "seed": )" + std::to_string(seed) + R"(,
      "out": ")" + out + R"("
    })";
}

}  // namespace

TEST_CASE("malformed configs return a config error with a message") {
    dsmle_config* cfg = nullptr;
    const dsmle_status st = dsmle_config_load_string("{\"family\": \"flip2\"}", &cfg);
    CHECK(st == DSMLE_ERR_CONFIG);
    CHECK(cfg == nullptr);
    CHECK(std::strlen(dsmle_last_error()) > 0);
    CHECK(std::string(dsmle_status_name(st)) == "config-error");
}

TEST_CASE("null arguments are rejected") {
    CHECK(dsmle_config_load_file(nullptr, nullptr) == DSMLE_ERR_INVALID_ARGUMENT);
    CHECK(dsmle_run_simulate(nullptr, nullptr, 0) == DSMLE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("version string is exposed") {
    CHECK(std::string(dsmle_version()) == "0.1.0");
}

TEST_CASE("simulate runs through the C API are byte identical") {
    const fs::path out1 = fresh_dir("a");
    const fs::path out2 = fresh_dir("b");
    dsmle_config* c1 = nullptr;
    dsmle_config* c2 = nullptr;
    REQUIRE(dsmle_config_load_string(config_text(out1.string(), 11).c_str(), &c1) == DSMLE_OK);
    REQUIRE(dsmle_config_load_string(config_text(out2.string(), 11).c_str(), &c2) == DSMLE_OK);

    char h1[64] = {0}, h2[64] = {0};
    REQUIRE(dsmle_config_hash(c1, h1, sizeof(h1)) == DSMLE_OK);
    REQUIRE(dsmle_config_hash(c2, h2, sizeof(h2)) == DSMLE_OK);
    CHECK(std::string(h1) == h2);

    char d1[1024] = {0}, d2[1024] = {0};
    REQUIRE(dsmle_run_simulate(c1, d1, sizeof(d1)) == DSMLE_OK);
    REQUIRE(dsmle_run_simulate(c2, d2, sizeof(d2)) == DSMLE_OK);
    CHECK(slurp(fs::path(d1) / "observations.txt") == slurp(fs::path(d2) / "observations.txt"));

    // a different seed changes both the hash and the data
    REQUIRE(dsmle_config_set_seed(c2, 12) == DSMLE_OK);
    char h3[64] = {0};
    REQUIRE(dsmle_config_hash(c2, h3, sizeof(h3)) == DSMLE_OK);
    CHECK(std::string(h3) != h1);
    char d3[1024] = {0};
    REQUIRE(dsmle_run_simulate(c2, d3, sizeof(d3)) == DSMLE_OK);
    CHECK(slurp(fs::path(d3) / "observations.txt") != slurp(fs::path(d1) / "observations.txt"));

    // thread count changes neither the hash nor results
    REQUIRE(dsmle_config_set_seed(c2, 11) == DSMLE_OK);
    REQUIRE(dsmle_config_set_threads(c2, 4) == DSMLE_OK);
    char h4[64] = {0};
    REQUIRE(dsmle_config_hash(c2, h4, sizeof(h4)) == DSMLE_OK);
    CHECK(std::string(h4) == h1);

    dsmle_config_free(c1);
    dsmle_config_free(c2);
}

TEST_CASE("mle through the C API surfaces data-format failures") {
    const fs::path out = fresh_dir("mle");
    dsmle_config* cfg = nullptr;
    REQUIRE(dsmle_config_load_string(config_text(out.string(), 31).c_str(), &cfg) == DSMLE_OK);

    char sim_dir[1024] = {0};
    REQUIRE(dsmle_run_simulate(cfg, sim_dir, sizeof(sim_dir)) == DSMLE_OK);
    const fs::path data = fs::path(sim_dir) / "observations.txt";

    char mle_dir[1024] = {0};
    REQUIRE(dsmle_run_mle(cfg, data.string().c_str(), mle_dir, sizeof(mle_dir)) == DSMLE_OK);
    CHECK(fs::exists(fs::path(mle_dir) / "theta_hat.json"));
    CHECK(fs::exists(fs::path(mle_dir) / "surface.csv"));

    const fs::path bad = out / "bad.txt";
    {
        std::ofstream f(bad);
        f << "# dsmle-observations v1 model=gaussian n=1\n0.5\nnope\n";
    }
    char dir2[1024] = {0};
    const dsmle_status st = dsmle_run_mle(cfg, bad.string().c_str(), dir2, sizeof(dir2));
    CHECK(st == DSMLE_ERR_DATA_FORMAT);
    CHECK(std::string(dsmle_last_error()).find("line 3") != std::string::npos);
    dsmle_config_free(cfg);
}

TEST_CASE("CLI exit codes: 0 ok, 1 check failures, 2 invalid input") {
    const fs::path out = fresh_dir("cli_codes");
    const fs::path cfg = out / "config.json";
    {
        std::ofstream f(cfg);
        f << config_text(out.string(), 51);
    }
    const std::string cli = DSMLE_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int raw = std::system((cli + " " + args + " >/dev/null 2>" + (out / "err.txt").string()).c_str());
        return WEXITSTATUS(raw);
    };
    CHECK(run("simulate --config " + cfg.string()) == 0);

    const fs::path sim_out = out / "sim_for_surface";
    const int raw = std::system((cli + " simulate --config " + cfg.string() + " --out " + sim_out.string() +
                                 " > " + (out / "simdir.txt").string() + " 2>/dev/null").c_str());
    REQUIRE(WEXITSTATUS(raw) == 0);
    std::string sim_dir = slurp(out / "simdir.txt");
    while (!sim_dir.empty() && (sim_dir.back() == '\n' || sim_dir.back() == '\r')) sim_dir.pop_back();
    CHECK(run("likelihood-surface --config " + cfg.string() + " --data " + sim_dir + "/observations.txt") == 0);

    // corrupted data file: exit 2 and a diagnostic naming the line
    const fs::path bad = out / "bad.txt";
    {
        std::ofstream f(bad);
        f << "# dsmle-observations v1 model=gaussian n=1\n0.5\nnope\n";
    }
    CHECK(run("mle --config " + cfg.string() + " --data " + bad.string()) == 2);
    CHECK(slurp(out / "err.txt").find("line 3") != std::string::npos);

    CHECK(run("mle --config " + out.string() + "/missing.json --data " + bad.string()) == 2);

    // failing condition report: exit 1
    const fs::path vcfg = out / "verify.json";
    {
        std::ofstream f(vcfg);
        f << R"({"family":"flip2","box":[[1.0,1.0]],"theta0":[1.0],
                 "observation":{"kind":"channel","matrix":[[1.0,0.0],[0.0,1.0]]},
                 "seed":6,"out":")" << out.string() << R"(",
                 "verify":{"n":100,"reps":30,"erg_n":2000,"s5_tuples":3,
                           "lags":[1,2],"continuity_resolution":5,
                           "block_m":4,"block_n":100}})";
    }
    CHECK(run("verify-conditions --config " + vcfg.string()) == 1);
}

TEST_CASE("verify-conditions reports failure presence through the flag") {
    const fs::path out = fresh_dir("verify");
    const std::string cfg_text = R"({
      "family": "flip2",
      "box": [[1.0, 1.0]],
      "theta0": [1.0],
      "observation": {"kind": "channel", "matrix": [[1.0, 0.0], [0.0, 1.0]]},
      "seed": 5,
      "verify": {"n": 100, "reps": 30, "erg_n": 2000, "s5_tuples": 3,
                 "lags": [1, 2], "continuity_resolution": 5,
                 "block_m": 4, "block_n": 100},
      "out": ")" + out.string() + R"("
    })";
    dsmle_config* cfg = nullptr;
    REQUIRE(dsmle_config_load_string(cfg_text.c_str(), &cfg) == DSMLE_OK);
    char dir[1024] = {0};
    int failures = 0;
    REQUIRE(dsmle_run_verify_conditions(cfg, dir, sizeof(dir), &failures) == DSMLE_OK);
    CHECK(failures == 1);
    CHECK(fs::exists(fs::path(dir) / "conditions.json"));
    dsmle_config_free(cfg);
}
