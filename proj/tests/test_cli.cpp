#include "../tools/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Result {
    int code = -1;
    std::string out;
};

// Runs the silt binary with `args`; stderr is appended to stdout when `merge`.
Result cli(const std::string& args, bool merge = false, const std::string& env = "") {
    const std::string cmd = env + " " + SILT_CLI_PATH + " " + args + (merge ? " 2>&1" : " 2>/dev/null");
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// Data lines of a CSV document (provenance comments dropped).
std::vector<std::string> csv_rows(const std::string& text) {
    std::vector<std::string> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') rows.push_back(line);
    return rows;
}

std::string last_field(const std::string& row) { return row.substr(row.rfind(',') + 1); }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("expectation prints a single-row CSV with provenance") {
    const auto r = cli("expectation --dim 2 --T 1 --eps 0.01");
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "regularization,d,T,eps,lambda,value");
    CHECK(std::stod(last_field(rows[1])) == doctest::Approx(0.5827094926).epsilon(1e-9));
    CHECK(r.out.find("# version=0.1.0") != std::string::npos);
    CHECK(r.out.find("# seed=1") != std::string::npos);
    CHECK(r.out.find("\r") == std::string::npos);
}

TEST_CASE("JSON output follows the documented schema") {
    const auto r = cli("expectation --dim 2 --gap 0.1 --format json");
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["command"] == "expectation");
    CHECK(doc["params"].is_object());
    CHECK(doc["rows"].size() == 1);
    CHECK(doc["rows"][0]["value"].get<double>() == doctest::Approx(0.2232283507).epsilon(1e-9));
    CHECK(doc["rows"][0]["regularization"] == "gap");
    CHECK(doc["meta"]["seed"] == 1);
    CHECK(doc["meta"]["version"] == silt::kVersion);
    CHECK(doc["meta"].contains("wall_time_s"));
    CHECK(doc["errors"].empty());
}

TEST_CASE("kernel subcommand") {
    const auto r = cli("kernel --kind phi --dim 2 --n 1 --u 0.25 --v 0.5");
    REQUIRE(r.code == 0);
    CHECK(std::stod(last_field(csv_rows(r.out)[1])) == doctest::Approx(-0.0322658881).epsilon(1e-9));
    CHECK(cli("kernel --kind rho --dim 2 --index 1,2 --gap 0.1 --u 0.5 --v 0.55").code == 0);
    CHECK(cli("kernel --kind rho --dim 2 --index -1,2 --gap 0.1 --u 0.5 --v 0.55").code == 2);
    CHECK(cli("kernel --kind phi --dim 2 --n 1 --u 0.5 --v 0.25").code == 2);
}

TEST_CASE("exit codes") {
    const auto bad = cli("expectation --dim 2 --eps 0", true);
    CHECK(bad.code == 2);
    CHECK(bad.out.find("precondition violated: eps > 0") != std::string::npos);
    CHECK(cli("rate --dim 2 --lambdas 0.1,0.01").code == 2);
    CHECK(cli("expectation --dim 2 --eps 0.01 --format xml").code != 0);
    CHECK(cli("partition --dim 2 --g 1e4 --eps 0.05 --paths 100").code == 4);
}

TEST_CASE("validate-kernels passes for d = 2") {
    const auto r = cli("validate-kernels --dim 2 --samples 5 --tol 1e-7");
    CHECK(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 10);  // header + 3 kernels x 3 orders
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(last_field(rows[i]) == "1");
    // An impossible tolerance reports failure with exit 1 and still writes the table.
    const auto strict = cli("validate-kernels --dim 2 --samples 3 --tol 1e-300");
    CHECK(strict.code == 1);
    CHECK(csv_rows(strict.out).size() == 10);
}

TEST_CASE("output files are written whole and reproducibly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "silt_cli_test";
    fs::create_directories(dir);
    const auto a = dir / "a.json", b = dir / "b.json";
    const std::string args = "simulate --dim 2 --eps 0.05 --paths 200 --seed 7 --format json --no-timing --output ";
    REQUIRE(cli(args + a.string(), false, "SILT_THREADS=1").code == 0);
    REQUIRE(cli(args + b.string(), false, "SILT_THREADS=8").code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK_FALSE(fs::exists(dir / "a.json.tmp"));
    const auto doc = nlohmann::json::parse(slurp(a));
    CHECK(doc["meta"]["seed"] == 7);
    CHECK(doc["meta"]["wall_time_s"] == 0.0);
    CHECK(doc["rows"][0]["n_samples"] == 200);

    // A failing run leaves no file behind.
    const auto c = dir / "c.csv";
    CHECK(cli("expectation --dim 2 --eps 0 --output " + c.string()).code == 2);
    CHECK_FALSE(fs::exists(c));
    fs::remove_all(dir);
}

TEST_CASE("run() in process") {
    silt::cli::RunConfig c;
    c.command = "expectation";
    c.params = silt::ModelParams::make(1, 1.0);
    c.reg = silt::RegularizationSpec::gaussian(0.0);
    std::ostringstream err;
    const auto path = std::filesystem::temp_directory_path() / "silt_run_inprocess.csv";
    c.output = path.string();
    CHECK(silt::cli::run(c, err) == silt::cli::kOk);
    const auto rows = csv_rows(slurp(path));
    CHECK(std::stod(last_field(rows.at(1))) == doctest::Approx(0.5319230405).epsilon(1e-9));
    std::filesystem::remove(path);

    c.command = "nonsense";
    CHECK(silt::cli::run(c, err) == silt::cli::kPrecondition);
    CHECK(err.str().find("unknown command") != std::string::npos);
}

TEST_CASE("simulate estimators") {
    const auto occ = cli("simulate --dim 1 --estimator occupation --steps 1000 --bin 0.01 --paths 100");
    REQUIRE(occ.code == 0);
    const auto rows = csv_rows(occ.out);
    CHECK(rows.at(0) == "estimator,d,T,eps,lambda,steps,mean,std_error,variance,variance_se,n_samples,seed");
    CHECK(rows.at(1).rfind("occupation,1,", 0) == 0);
    CHECK(cli("simulate --dim 1 --estimator occupation --paths 10").code == 2);  // --steps required
    CHECK(cli("simulate --dim 2 --estimator centered --eps 0.05 --gap 0.02 --paths 50").code == 0);
    CHECK(cli("simulate --dim 2 --estimator bogus --eps 0.05 --paths 10").code == 2);
}
