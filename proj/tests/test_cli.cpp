#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace {

std::string bin_path() {
    const char* env = std::getenv("UWARRANT_BIN");
    if (env != nullptr && *env != '\0') return env;
    for (const char* guess : {"./uwarrant", "build/uwarrant"}) {
        if (access(guess, X_OK) == 0) return guess;
    }
    return "./uwarrant";
}

std::string work_dir() {
    static std::string dir = [] {
        char tmpl[] = "/tmp/uwarrant_cli_XXXXXX";
        const char* d = mkdtemp(tmpl);
        REQUIRE(d != nullptr);
        return std::string(d);
    }();
    return dir;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(static_cast<bool>(out));
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const std::string out_file = work_dir() + "/stdout.txt";
    const std::string err_file = work_dir() + "/stderr.txt";
    const std::string cmd =
        env_prefix + bin_path() + " " + args + " > " + out_file + " 2> " + err_file;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out_file);
    r.err = read_file(err_file);
    return r;
}

const char* kExampleConfig = R"(# reference setup
[capital]
shares = 50
warrants = 100
exercise_ratio = 1
exercise_payment = 50

[market]
stock_price = 100
stock_vol = 0.04
rate = 0.04
horizon = 3
drift = 0.02
)";

std::string example_path() {
    static std::string path = [] {
        const std::string p = work_dir() + "/example.toml";
        write_file(p, kExampleConfig);
        return p;
    }();
    return path;
}

struct Row {
    double alpha, t, value;
};

std::vector<Row> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "alpha,t,value");
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        Row r{};
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &r.alpha, &r.t, &r.value) == 3);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST_CASE("price end to end: reference value, schema, determinism") {
    const std::string a = work_dir() + "/price_a.json";
    const std::string b = work_dir() + "/price_b.json";
    const RunResult first =
        run_cli("price --config " + example_path() + " --approx-v --approx-sigma --out " + a);
    REQUIRE(first.exit_code == 0);
    const RunResult second =
        run_cli("price --config " + example_path() + " --approx-v --approx-sigma --out " + b);
    REQUIRE(second.exit_code == 0);

    CHECK(read_file(a) == read_file(b));  // byte-identical repeats

    const nlohmann::json doc = nlohmann::json::parse(read_file(a));
    CHECK(doc.at("command") == "price");
    CHECK(std::abs(doc.at("f_w").get<double>() - 16.83) <= 0.01);
    CHECK(doc.at("inputs").at("firm_value").get<double>() == 5000.0);
    CHECK(doc.at("inputs").at("sigma").get<double>() == 0.04);
    CHECK(doc.at("c").get<double>() == doctest::Approx(0.066159467450615046).epsilon(1e-14));
    CHECK(doc.at("alpha0").get<double>() ==
          doctest::Approx(1.1378021272286277e-05).epsilon(1e-9));
    CHECK(doc.at("discount").get<double>() ==
          doctest::Approx(std::exp(-0.12)).epsilon(1e-14));

    // without --out the same bytes go to stdout
    const RunResult to_stdout =
        run_cli("price --config " + example_path() + " --approx-v --approx-sigma");
    CHECK(to_stdout.exit_code == 0);
    CHECK(to_stdout.out == read_file(a));
}

TEST_CASE("price at zero volatility emits the hand formula") {
    const std::string cfg = work_dir() + "/sigma0.toml";
    write_file(cfg, std::string(kExampleConfig) + "\n[model]\nsigma = 0\n");
    const RunResult r = run_cli("price --config " + cfg + " --approx-v");
    REQUIRE(r.exit_code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    const double want = std::exp(-0.12) * (5000.0 * std::exp(0.06) - 2500.0) / 150.0;
    CHECK(doc.at("f_w").get<double>() == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("validation failures exit with 2 and name the problem") {
    SUBCASE("unknown key") {
        const std::string cfg = work_dir() + "/unknown.toml";
        write_file(cfg, std::string(kExampleConfig) + "\n[market]junk\n");
        // malformed line (no '=')
        const RunResult r = run_cli("price --config " + cfg + " --approx-v --approx-sigma");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("unknown key is reported by name") {
        const std::string cfg = work_dir() + "/unknown2.toml";
        write_file(cfg, std::string(kExampleConfig) + "\n[numerics]\nbogus_knob = 3\n");
        const RunResult r = run_cli("price --config " + cfg + " --approx-v --approx-sigma");
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("bogus_knob") != std::string::npos);
    }
    SUBCASE("field range violation is named") {
        const std::string cfg = work_dir() + "/neg.toml";
        write_file(cfg, "[capital]\nshares = -3\nwarrants = 1\nexercise_ratio = 1\n"
                        "exercise_payment = 1\n");
        const RunResult r = run_cli("price --config " + cfg);
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("shares") != std::string::npos);
    }
    SUBCASE("missing firm value") {
        const RunResult r = run_cli("price --config " + example_path() + " --approx-sigma");
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("--approx-v") != std::string::npos);
    }
    SUBCASE("command mismatch between config and subcommand") {
        const std::string cfg = work_dir() + "/cmd.toml";
        write_file(cfg, std::string("command = calibrate\n") + kExampleConfig);
        const RunResult r = run_cli("price --config " + cfg + " --approx-v --approx-sigma");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("bad thread cap env var") {
        const RunResult r = run_cli("price --config " + example_path() +
                                        " --approx-v --approx-sigma",
                                    "UWARRANT_NUM_THREADS=abc ");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("missing config file") {
        const RunResult r = run_cli("price --config /nonexistent/nope.toml");
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("divergent tail exits with 3") {
    const std::string cfg = work_dir() + "/divergent.toml";
    write_file(cfg, std::string(kExampleConfig) + "\n[model]\nsigma = 0.65\n");
    const RunResult r = run_cli("price --config " + cfg + " --approx-v");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("c") != std::string::npos);
}

TEST_CASE("non-convergent calibration exits with 4 and reports the last iterate") {
    const std::string cfg = work_dir() + "/infeasible.toml";
    write_file(cfg,R"([capital]
shares = 50
warrants = 100
exercise_ratio = 1
exercise_payment = 50

[market]
stock_price = 100
stock_vol = 0.9
rate = 0.04
horizon = 3
drift = 0.02
)");
    const std::string out = work_dir() + "/cal_fail.json";
    const RunResult r = run_cli("calibrate --config " + cfg + " --out " + out);
    CHECK(r.exit_code == 4);
    const nlohmann::json doc = nlohmann::json::parse(read_file(out));
    CHECK(doc.at("converged") == false);
    CHECK(doc.at("result").at("sigma").get<double>() > 0.0);
    CHECK(doc.at("error").get<std::string>().find("unreachable") != std::string::npos);
}

TEST_CASE("calibrate end to end keeps residuals under 1e-8") {
    const RunResult r = run_cli("calibrate --config " + example_path());
    REQUIRE(r.exit_code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("converged") == true);
    CHECK(doc.at("result").at("residual_value").get<double>() < 1e-8);
    CHECK(doc.at("result").at("residual_vol").get<double>() < 1e-8);
    CHECK(doc.at("result").at("iterations").get<int>() <= 200);
    CHECK(doc.at("result").at("sigma").get<double>() ==
          doctest::Approx(0.056789146902185831).epsilon(1e-8));
    CHECK(doc.at("result").at("firm_value").get<double>() ==
          doctest::Approx(9703.2104654111810).epsilon(1e-8));
}

TEST_CASE("alpha-path export: sorted, monotone, matches the closed form") {
    const std::string cfg = work_dir() + "/paths.toml";
    write_file(cfg, std::string(kExampleConfig) +
                        "\n[model]\nsigma = 0.04\n\n[paths]\nalphas = 0.75, 0.25, 0.5\n"
                        "times = 3, 0, 1\n");
    const std::string out_a = work_dir() + "/paths_a.csv";
    const RunResult r = run_cli("alpha-paths --config " + cfg + " --approx-v --out " + out_a);
    REQUIRE(r.exit_code == 0);
    const std::vector<Row> rows = parse_csv(read_file(out_a));
    REQUIRE(rows.size() == 9);

    // sorted by (alpha, t)
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const bool sorted = rows[i - 1].alpha < rows[i].alpha ||
                            (rows[i - 1].alpha == rows[i].alpha && rows[i - 1].t < rows[i].t);
        CHECK(sorted);
    }
    // alpha = 1/2 rows carry no diffusion term
    for (const Row& row : rows) {
        if (row.alpha == 0.5) {
            CHECK(std::abs(row.value - 5000.0 * std::exp(0.02 * row.t)) <=
                  1e-12 * 5000.0 * std::exp(0.02 * row.t));
        }
        // closed form of the quantile path
        const double pi = 3.14159265358979323846;
        const double want = 5000.0 * std::exp(0.02 * row.t + 0.04 * row.t * (std::sqrt(3.0) / pi) *
                                                                 std::log(row.alpha /
                                                                          (1.0 - row.alpha)));
        CHECK(std::abs(row.value - want) <= 1e-12 * want);
    }
    // monotone in alpha at fixed t
    for (double t : {0.0, 1.0, 3.0}) {
        double prev = -1.0;
        for (const Row& row : rows) {
            if (row.t == t) {
                CHECK(row.value >= prev);
                prev = row.value;
            }
        }
    }

    // identical bytes for any thread cap
    const std::string out_b = work_dir() + "/paths_b.csv";
    const RunResult r1 = run_cli("alpha-paths --config " + cfg + " --approx-v --out " + out_b,
                                 "UWARRANT_NUM_THREADS=1 ");
    REQUIRE(r1.exit_code == 0);
    CHECK(read_file(out_a) == read_file(out_b));
    const RunResult r3 = run_cli("alpha-paths --config " + cfg + " --approx-v --out " + out_b,
                                 "UWARRANT_NUM_THREADS=3 ");
    REQUIRE(r3.exit_code == 0);
    CHECK(read_file(out_a) == read_file(out_b));
}

TEST_CASE("alpha-paths via the uniform level ladder") {
    const std::string cfg = work_dir() + "/ladder.toml";
    write_file(cfg, std::string(kExampleConfig) +
                        "\n[model]\nsigma = 0.04\n\n[paths]\ntimes = 1\n");
    const RunResult r =
        run_cli("alpha-paths --config " + cfg + " --approx-v --alpha-levels 9");
    REQUIRE(r.exit_code == 0);
    const std::vector<Row> rows = parse_csv(r.out);
    REQUIRE(rows.size() == 9);
    CHECK(rows.front().alpha == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(rows.back().alpha == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("expect end to end matches the growth identity") {
    const RunResult r = run_cli("expect --config " + example_path() + " --approx-v --approx-sigma");
    REQUIRE(r.exit_code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    const double c = doc.at("c").get<double>();
    const double pi = 3.14159265358979323846;
    const double want = 5000.0 * std::exp(0.02 * 3.0) * (pi * c / std::sin(pi * c));
    CHECK(doc.at("expected_value").get<double>() == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("format restrictions are validated") {
    CHECK(run_cli("price --config " + example_path() + " --approx-v --approx-sigma --format csv")
              .exit_code == 2);
    const std::string cfg = work_dir() + "/fmt.toml";
    write_file(cfg, std::string(kExampleConfig) +
                        "\n[model]\nsigma = 0.04\n\n[paths]\ntimes = 1\nalphas = 0.5\n");
    CHECK(run_cli("alpha-paths --config " + cfg + " --approx-v --format json").exit_code == 2);
}
