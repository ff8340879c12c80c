#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string cli = BAE_CLI_PATH;
const std::string src = BAE_SOURCE_DIR;

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("bae_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args) {
    std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);
    if (header) {
        std::stringstream hs(line);
        for (std::string c; std::getline(hs, c, ',');) header->push_back(c);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        std::stringstream ls(line);
        std::vector<double> r;
        for (std::string c; std::getline(ls, c, ',');) r.push_back(std::strtod(c.c_str(), nullptr));
        rows.push_back(r);
    }
    return rows;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("derive") {
    fs::path d = scratch("derive");
    CHECK(run("derive --preset paper-like -o " + d.string()) == 0);
    json j = read_json(d / "derive.json");
    CHECK(j["G0"].get<double>() == doctest::Approx(2e5).epsilon(1e-12));
    CHECK(j["gamma_m_add"].get<double>() == doctest::Approx(14.814814814814815).epsilon(1e-12));
    json m = read_json(d / "derive_manifest.json");
    CHECK(m["outputs"][0] == "derive.json");
    CHECK(m["config"]["system"]["omega_m"] == 3e7);

    CHECK(run("derive --preset fast-test --set pump.amp_plus=0 --set pump.amp_minus=0 -o " +
              d.string()) == 0);
    j = read_json(d / "derive.json");
    CHECK(j["G0"].get<double>() == 0);
    CHECK(j["d_plus"]["re"].get<double>() == 0);
}

TEST_CASE("config errors exit with 2") {
    fs::path d = scratch("errors");
    std::ofstream(d / "bad.json") << "{\n  \"preset\": \"fast-test\",\n  \"sytem\": {}\n}\n";
    CHECK(run("derive -c " + (d / "bad.json").string() + " -o " + d.string()) == 2);
    std::string cmd = cli + " derive -c " + (d / "bad.json").string() + " -o " + d.string() + " 2>&1";
    FILE* f = popen(cmd.c_str(), "r");
    char buf[512] = {};
    std::string err;
    while (fgets(buf, sizeof buf, f)) err += buf;
    pclose(f);
    CHECK(err.find("sytem") != std::string::npos);
    CHECK(err.find("line 3") != std::string::npos);
    CHECK(run("derive --preset fast-test --set system.mass=-1 -o " + d.string()) == 2);
    CHECK(run("sweep --preset fast-test --param mass --range 1:2:3 -o " + d.string()) == 2);
    CHECK(run("frobnicate") == 2);
}

TEST_CASE("spectrum") {
    fs::path d = scratch("spectrum");
    CHECK(run("spectrum --preset fast-test --set system.gamma_m=0 --set pump.theta=1.5 --oracle "
              "--nu-min 0.01 --nu-max 0.5 --points 20 -o " + d.string()) == 0);
    std::vector<std::string> h;
    auto rows = read_csv(d / "spectrum.csv", &h);
    REQUIRE(rows.size() == 20);
    CHECK(h[0] == "nu_rad_per_s");
    CHECK(h.back() == "pole");
    for (auto& r : rows) {
        CHECK(r[1] == 2.0);
        CHECK(r[6] < 1e-10);
    }
    json m = read_json(d / "spectrum_manifest.json");
    CHECK(m["results"]["max_rel_deviation"].get<double>() < 1e-10);

    // the grid passes through the pole at nu = 0
    CHECK(run("spectrum --preset fast-test --set system.gamma_m=0 --oracle --points 3 -o " +
              d.string()) == 0);
    rows = read_csv(d / "spectrum.csv");
    CHECK(rows[1][7] == 1.0);

    CHECK(run("spectrum -c " + src + "/configs/asymmetric.json -o " + d.string()) == 3);
    CHECK(run("spectrum -c " + src + "/configs/asymmetric.json --oracle -o " + d.string()) == 0);
}

TEST_CASE("sweep orders rows regardless of jobs") {
    fs::path a = scratch("sweep1"), b = scratch("sweep4");
    std::string common = "sweep --preset fast-test --set system.gamma_m=0 --set pump.theta=1.5707963267948966 "
                         "--param G --range 1:1000:9 --log "
                         "--metric fmin_ratio --metric s_i ";
    CHECK(run(common + "--jobs 1 -o " + a.string()) == 0);
    CHECK(run(common + "--jobs 4 -o " + b.string()) == 0);
    CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
    auto rows = read_csv(a / "sweep.csv");
    REQUIRE(rows.size() == 9);
    double slope = std::log(rows[8][1] / rows[0][1]) / std::log(rows[8][0] / rows[0][0]);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.02));

    CHECK(run("sweep --preset fast-test --set system.gamma_m=0 --param theta_minus_phi_r "
              "--range 0:1.5707963267948966:5 --metric signal --nu 0.01 -o " + a.string()) == 0);
    rows = read_csv(a / "sweep.csv");
    CHECK(rows[0][1] == 0);
    for (auto& r : rows) CHECK(r[1] == doctest::Approx(rows[4][1] * std::sin(r[0])).epsilon(1e-12));

    CHECK(run("sweep --preset fast-test --set system.gamma_m=0 --param epsilon --range 0:0.02:5 "
              "--metric ba_residual -o " + a.string()) == 0);
    rows = read_csv(a / "sweep.csv");
    CHECK(rows[0][1] < 1e-14);
    CHECK(rows[4][1] / rows[2][1] == doctest::Approx(2).epsilon(0.02));
}

TEST_CASE("stability") {
    fs::path d = scratch("stability");
    CHECK(run("stability --preset paper-like -o " + d.string()) == 0);
    json j = read_json(d / "stability.json");
    CHECK(j["g_threshold"].get<double>() == doctest::Approx(2.5455844122715711e5).epsilon(1e-12));
    CHECK(j["stable"] == true);
    CHECK(j.contains("compensation_force"));
    auto rows = read_csv(d / "stability.csv");
    CHECK(rows.size() == 41);
    CHECK(rows.front()[3] == 1.0);
    CHECK(rows.back()[3] == 0.0);
}

TEST_CASE("simulate is reproducible and reports halts") {
    fs::path a = scratch("sim1"), b = scratch("sim2");
    std::string args = "simulate -c " + src + "/configs/fast-test.json --duration 4000 --segment 512 --compare ";
    CHECK(run(args + "-o " + a.string()) == 0);
    CHECK(run(args + "-o " + b.string()) == 0);
    CHECK(slurp(a / "series.bin") == slurp(b / "series.bin"));
    CHECK(slurp(a / "psd.csv") == slurp(b / "psd.csv"));
    std::vector<std::string> h;
    auto rows = read_csv(a / "psd.csv", &h);
    CHECK(h.back() == "S_I_analytic");
    json m = read_json(a / "simulate_manifest.json");
    CHECK(m["outputs"].size() == 2);

    CHECK(run("simulate -c " + src + "/configs/instability.json -o " + a.string()) == 4);
    m = read_json(a / "simulate_manifest.json");
    CHECK(m["results"]["halted"] == true);
    CHECK(m["results"]["growth_rate"].get<double>() > 0);
}
