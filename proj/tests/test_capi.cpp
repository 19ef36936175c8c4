#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "mfg.h"

namespace fs = std::filesystem;

namespace {
fs::path make_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("mfg_capi_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    fs::path p = dir / "config.json";
    std::ofstream(p) << body;
    return p;
}

const char* kSmallStationary = R"({
  "kind": "stationary",
  "grid": {"dim": 1, "n": 16},
  "model": {"gamma": 1.2, "a": {"const": 1.0, "fourier": [[1, 0.2, 0.0]]}},
  "coupling": {"alpha": 1.5, "eps": 0.1}
})";
}  // namespace

TEST_CASE("version and pure helpers") {
    REQUIRE(mfg_version() != nullptr);
    CHECK(std::strlen(mfg_version()) > 0);

    CHECK(mfg_gamma_gate(1.2, 1) == 1);
    CHECK(mfg_gamma_gate(1.6, 1) == 0);
    CHECK(mfg_gamma_gate(1.3, 2) == 1);
    CHECK(mfg_gamma_gate(1.4, 2) == 0);

    // d = 1, gamma = 1.5 sits at the gate edge: threshold 0
    CHECK(mfg_alpha_threshold(1, 1.5) == doctest::Approx(0.0));
    CHECK(mfg_alpha_threshold(2, 1.5) == doctest::Approx(0.0));
    CHECK(mfg_alpha_threshold(2, 2.5) == doctest::Approx(1.0));
    // outside the covered (d, gamma) region the threshold is +infinity
    CHECK(std::isinf(mfg_alpha_threshold(4, 3.0)));
}

TEST_CASE("context lifecycle and argument validation") {
    CHECK(mfg_run(nullptr, "gates", "x.json", "out", 1, -1) == 2);
    mfg_context* ctx = mfg_context_create();
    REQUIRE(ctx != nullptr);
    CHECK(std::string(mfg_error_message(ctx)).empty());
    CHECK(mfg_run(ctx, nullptr, "x.json", "out", 1, -1) == 2);
    CHECK(std::string(mfg_error_message(ctx)).find("validation") == 0);
    mfg_context_destroy(ctx);
    mfg_context_destroy(nullptr);  // must be a safe no-op
    CHECK(std::string(mfg_error_message(nullptr)).empty());
}

TEST_CASE("gates run produces the standard artifacts") {
    fs::path dir = make_dir("gates");
    fs::path cfg = write_config(dir, kSmallStationary);
    fs::path out = dir / "out";
    mfg_context* ctx = mfg_context_create();
    int rc = mfg_run(ctx, "gates", cfg.string().c_str(), out.string().c_str(), 1, -1);
    INFO(mfg_error_message(ctx));
    CHECK(rc == 0);
    CHECK(fs::exists(out / "resolved_config.json"));
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "manifest.json"));
    mfg_context_destroy(ctx);
    fs::remove_all(dir);
}

TEST_CASE("stationary run succeeds and clears the previous error") {
    fs::path dir = make_dir("stationary");
    fs::path cfg = write_config(dir, kSmallStationary);
    fs::path out = dir / "out";
    mfg_context* ctx = mfg_context_create();
    // first, provoke an error so we can observe it being cleared
    CHECK(mfg_run(ctx, "stationary", "/no/such/config.json",
                  out.string().c_str(), 1, -1) == 2);
    CHECK(!std::string(mfg_error_message(ctx)).empty());

    int rc = mfg_run(ctx, "stationary", cfg.string().c_str(),
                     out.string().c_str(), 1, -1);
    INFO(mfg_error_message(ctx));
    CHECK(rc == 0);
    CHECK(std::string(mfg_error_message(ctx)).empty());
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "manifest.json"));
    mfg_context_destroy(ctx);
    fs::remove_all(dir);
}

TEST_CASE("error codes: validation and non-convergence") {
    fs::path dir = make_dir("errors");
    mfg_context* ctx = mfg_context_create();
    fs::path out = dir / "out";

    fs::path bad_alpha = write_config(dir, R"({
      "kind": "stationary",
      "grid": {"dim": 1, "n": 16},
      "coupling": {"alpha": -1.0, "eps": 0.1}
    })");
    CHECK(mfg_run(ctx, "stationary", bad_alpha.string().c_str(),
                  out.string().c_str(), 1, -1) == 2);
    CHECK(std::string(mfg_error_message(ctx)).find("validation") == 0);

    fs::path bad_sub = write_config(dir, kSmallStationary);
    CHECK(mfg_run(ctx, "frobnicate", bad_sub.string().c_str(),
                  out.string().c_str(), 1, -1) == 2);

    fs::path starved = write_config(dir, R"({
      "kind": "stationary",
      "grid": {"dim": 1, "n": 16},
      "model": {"gamma": 1.2, "a": {"const": 1.0, "fourier": [[1, 0.3, 0.0]]}},
      "coupling": {"alpha": 1.5, "eps": 0.05},
      "solver": {"max_iters": 1, "picard_tol": 1e-14}
    })");
    CHECK(mfg_run(ctx, "stationary", starved.string().c_str(),
                  out.string().c_str(), 1, -1) == 3);
    CHECK(std::string(mfg_error_message(ctx)).find("convergence") == 0);

    mfg_context_destroy(ctx);
    fs::remove_all(dir);
}
