#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "potts/homogeneous.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string cli = POTTS_CLI_PATH;

int run(const std::string& args) {
    int rc = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path tmp_file(const std::string& name) {
    return fs::temp_directory_path() / ("potts_cli_test_" + name);
}

}  // namespace

TEST_CASE("cli: constants") {
    fs::path out = tmp_file("constants.json");
    REQUIRE(run("constants --k 2 --q 5 --out " + out.string()) == 0);
    json j = json::parse(slurp(out));
    CHECK(j["theta_c"].get<double>() == doctest::Approx(4.6847).epsilon(1e-4));
    CHECK(j["theta_m"][0].get<double>() == doctest::Approx(4.4641).epsilon(1e-4));
    CHECK(j["theta_m"][1].get<double>() == doctest::Approx(5.0));
    CHECK(j["theta_0_plus"].get<double>() == doctest::Approx(6.0));
    CHECK(j["theta_0_minus"].get<double>() == doctest::Approx(5.0));
    CHECK_FALSE(j.contains("tilde_theta_1"));

    REQUIRE(run("constants --k 5 --q 3 --out " + out.string()) == 0);
    j = json::parse(slurp(out));
    CHECK(j["theta_0_minus"].get<double>() == doctest::Approx(1.6966).epsilon(5e-4));
    CHECK(j["tilde_theta_1"].get<double>() ==
          doctest::Approx(std::sqrt(49.0 * 25 + 62 * 5 + 49) / 24.0).epsilon(1e-12));
    CHECK(j["tilde_theta_1"].get<double>() == doctest::Approx(potts::tilde_theta_1(5)));
    fs::remove(out);
}

TEST_CASE("cli: exit codes") {
    CHECK(run("count --k 2 --q 3") == 2);                       // missing required flags
    CHECK(run("nonsense") == 2);                                // unknown subcommand
    CHECK(run("constants --k 1 --q 3") == 2);                   // k out of range
    CHECK(run("sample --k 2 --q 2 --theta 2 --depth 2 --field /nonexistent.json --seed 1") == 1);
    CHECK(run("constants --k 2 --q 3 --out /nonexistent_dir/x.json") == 1);
    CHECK(run("count --k 2 --q 3 --theta 20 --alpha 0") == 0);
}

TEST_CASE("cli: count with oracle agrees") {
    fs::path out = tmp_file("count.json");
    REQUIRE(run("count --k 2 --q 3 --theta 5.5 --alpha -0.37 --oracle --out " + out.string()) == 0);
    json j = json::parse(slurp(out));
    CHECK(j["nu"].get<int>() == j["oracle_count"].get<int>());
    CHECK(j["nu"].get<int>() >= 1);
    for (const auto& s : j["solutions"]) CHECK(s["residual"].get<double>() < 1e-10);
    fs::remove(out);
}

TEST_CASE("cli: curves CSV round-trips against the library") {
    fs::path out = tmp_file("curves.csv");
    REQUIRE(run("curves --k 2 --q 5 --theta-min 4.47 --theta-max 10 --steps 40 --gnuplot-stub --out " +
                out.string()) == 0);
    CHECK(fs::exists(out.string() + ".gp"));

    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "theta,alpha_minus,alpha_plus,alpha_m1,alpha_m2,alpha_m3");

    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        cells.resize(6);
        rows.push_back(cells);
    }
    REQUIRE(rows.size() == 40);
    int checked = 0;
    for (std::size_t r = 0; r < rows.size(); r += 4) {
        double th = std::stod(rows[r][0]);
        if (!rows[r][1].empty()) {
            auto [am, ap] = potts::alpha_pm(2, 5, th);
            CHECK(std::fabs(std::stod(rows[r][1]) - am) < 1e-12);
            CHECK(std::fabs(std::stod(rows[r][2]) - ap) < 1e-12);
            ++checked;
        }
        if (!rows[r][3].empty()) {
            CHECK(std::fabs(std::stod(rows[r][3]) - potts::alpha_m(2, 5, 1, th)) < 1e-12);
            ++checked;
        }
    }
    CHECK(checked >= 10);
    fs::remove(out);
    fs::remove(out.string() + ".gp");
}

TEST_CASE("cli: stochastic commands demand a seed and are deterministic") {
    fs::path field = tmp_file("field.json");
    std::ofstream(field) << R"({"type":"iid_discrete","atoms":[{"xi":[1,-1],"p":0.5},{"xi":[-1,1],"p":0.5}]})";

    CHECK(run("sample --k 2 --q 2 --theta 2 --depth 2 --field " + field.string()) == 2);

    fs::path s1 = tmp_file("s1.csv"), s2 = tmp_file("s2.csv");
    REQUIRE(run("sample --k 2 --q 2 --theta 2 --depth 3 --field " + field.string() +
                " --n-samples 20 --seed 42 --out " + s1.string()) == 0);
    REQUIRE(run("sample --k 2 --q 2 --theta 2 --depth 3 --field " + field.string() +
                " --n-samples 20 --seed 42 --out " + s2.string()) == 0);
    CHECK(slurp(s1) == slurp(s2));
    CHECK(slurp(s1).substr(0, 12) == "vertex,spin\n");

    fs::path sj = tmp_file("s.json");
    REQUIRE(run("sample --k 2 --q 2 --theta 2 --depth 2 --field " + field.string() +
                " --n-samples 3 --seed 42 --format json --out " + sj.string()) == 0);
    json lawj = json::parse(slurp(sj));
    CHECK(lawj["boundary_law"].contains("1>e"));
    CHECK(lawj["boundary_law"].contains("e>1"));
    CHECK(lawj["samples"].size() == 3);
    fs::remove(sj);

    fs::path itr = tmp_file("iterate.json");
    REQUIRE(run("iterate --k 2 --q 2 --theta 2 --depth 6 --field " + field.string() +
                " --seed 1 --out " + itr.string()) == 0);
    json j = json::parse(slurp(itr));
    CHECK(j["converged"].get<bool>());
    CHECK(j["final_residual"].get<double>() < 1e-10);
    CHECK(j["g"].contains("e"));
    CHECK(j["g"].contains("1.2"));

    for (const fs::path& p : {field, s1, s2, itr}) fs::remove(p);
}

TEST_CASE("cli: verify-compat iff report") {
    fs::path out = tmp_file("verify.json");
    REQUIRE(run("verify-compat --k 2 --q 3 --depth 1 --theta 3 --trials 20 --seed 7 --out " +
                out.string()) == 0);
    json j = json::parse(slurp(out));
    CHECK(j["all_consistent"].get<bool>());
    REQUIRE(j["trials"].size() == 20);
    for (const auto& t : j["trials"]) {
        CHECK(t["residual_compatible"].get<double>() < 1e-10);
        CHECK(t["tv_compatible"].get<double>() < 1e-8);
        CHECK(t["residual_perturbed"].get<double>() > 1e-3);
        CHECK(t["tv_perturbed"].get<double>() > 1e-6);
    }
    fs::remove(out);
}
