#include <gtest/gtest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "lel_cli_test";

int lel(const std::string& args) {
    const std::string cmd = std::string(LEL_BINARY) + " " + args + " 2>/dev/null";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream f(p);
    std::string l;
    std::getline(f, l);
    return l;
}

// digest through coreutils, independent of the tool's own hashing
std::string sha256sum(const fs::path& p) {
    std::string cmd = "sha256sum '" + p.string() + "'";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::array<char, 128> buf{};
    std::string out;
    while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    pclose(pipe);
    return out.substr(0, 64);
}

fs::path out(const std::string& name) { return work / name; }

}  // namespace

TEST(Cli, SpecialProfilesAndIntegrals) {
    ASSERT_EQ(lel("special --out " + out("sp").string()), 0);
    const auto csv = out("sp") / "special_profiles.csv";
    EXPECT_EQ(first_line(csv), "r,phi0,phi1_axis,phi3,psi0,s_star,t_star");
    const auto text = slurp(csv);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1002);
    EXPECT_EQ(text.find('\r'), std::string::npos);
    const auto tab = slurp(out("sp") / "reference_integrals.csv");
    const auto pos = tab.find("int_eU,");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_NEAR(std::stod(tab.substr(pos + 7)), 8.0 * M_PI, 1e-6);
}

TEST(Cli, RerunIsByteIdentical) {
    ASSERT_EQ(lel("special --out " + out("a").string()), 0);
    ASSERT_EQ(lel("special --out " + out("b").string()), 0);
    EXPECT_EQ(slurp(out("a") / "special_profiles.csv"), slurp(out("b") / "special_profiles.csv"));
}

TEST(Cli, ManifestDigestsValidate) {
    ASSERT_EQ(lel("pohozaev --out " + out("po").string()), 0);
    const auto m = nlohmann::json::parse(slurp(out("po") / "manifest.json"));
    EXPECT_EQ(m["exit_code"], 0);
    ASSERT_FALSE(m["files"].empty());
    for (const auto& f : m["files"]) {
        const auto p = out("po") / f["path"].get<std::string>();
        ASSERT_TRUE(fs::exists(p));
        EXPECT_EQ(f["sha256"].get<std::string>(), sha256sum(p));
        EXPECT_EQ(f["bytes"].get<std::uintmax_t>(), fs::file_size(p));
    }
    EXPECT_EQ(m["checks"][0]["name"], "P_relative");
    EXPECT_LE(m["checks"][0]["value"].get<double>(), 1e-3);
}

TEST(Cli, PohozaevOnStoredSolution) {
    ASSERT_EQ(lel("solve-radial --p 10 --out " + out("sr").string()), 0);
    const auto sol = out("sr") / "radial_solution.csv";
    EXPECT_EQ(first_line(sol), "r,u,v");
    EXPECT_EQ(lel("pohozaev --solution " + sol.string() + " --out " + out("ps").string()), 0);
}

TEST(Cli, KirchhoffRouthDisk) {
    ASSERT_EQ(lel("kr --domain unit-disk --k 1 --seed 3 --out " + out("kr").string()), 0);
    std::ifstream f(out("kr") / "kr_points.csv");
    std::string header, row, extra;
    std::getline(f, header);
    std::getline(f, row);
    EXPECT_FALSE(std::getline(f, extra));
    EXPECT_EQ(header, "k,value,x1,y1,eig1,eig2,nondegenerate");
    double k, v, x, y, e1, e2;
    int nd;
    ASSERT_EQ(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%d", &k, &v, &x, &y, &e1, &e2, &nd), 7);
    EXPECT_LE(std::hypot(x, y), 1e-8);
    EXPECT_GT(e1, 0.0);
    EXPECT_GT(e2, 0.0);
}

TEST(Cli, SpectrumRange) {
    ASSERT_EQ(lel("spectrum --p 20:80 --threads 2 --out " + out("spec").string()), 0);
    std::ifstream f(out("spec") / "spectrum.csv");
    std::string line;
    std::getline(f, line);
    EXPECT_EQ(line.rfind("p,theta,sigma_1", 0), 0u);
    double prev = 0.0;
    int rows = 0;
    while (std::getline(f, line)) {
        double p, th, s1;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &p, &th, &s1), 3);
        EXPECT_GT(p, prev);
        EXPECT_GT(s1, 0.0);
        prev = p;
        ++rows;
    }
    EXPECT_EQ(rows, 7);
}

TEST(Cli, RatesGapRatioColumn) {
    // the default checks include the energy bound, so the exit status reflects it
    const int code = lel("rates --theta 1 --p 40,80,160 --out " + out("r1").string());
    EXPECT_TRUE(code == 0 || code == 1);
    std::ifstream f(out("r1") / "rates.csv");
    std::string line;
    std::getline(f, line);
    EXPECT_EQ(line, "p,theta,v_max,v_pred,u_max,u_pred,mu,mu_pred,gap_ratio,energy");
    while (std::getline(f, line)) {
        double v[9];
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3], &v[4],
                              &v[5], &v[6], &v[7], &v[8]),
                  9);
        if (v[0] == 80.0) {
            EXPECT_GE(v[8], 0.9);
            EXPECT_LE(v[8], 1.1);
        }
    }
    const auto m = nlohmann::json::parse(slurp(out("r1") / "manifest.json"));
    bool failed = false;
    for (const auto& c : m["checks"]) failed = failed || !c["pass"].get<bool>();
    EXPECT_EQ(code, failed ? 1 : 0);
}

TEST(Cli, ExitCodes) {
    fs::create_directories(work);
    const auto bad = work / "bad.json";
    std::ofstream(bad) << R"({"p": 10, "bogus": true})";
    EXPECT_EQ(lel("solve-radial --config " + bad.string() + " --out " + out("bad").string()), 2);
    const auto badtype = work / "badtype.json";
    std::ofstream(badtype) << R"({"p": "ten"})";
    EXPECT_EQ(lel("solve-radial --config " + badtype.string() + " --out " + out("bad").string()), 2);
    const auto nested = work / "nested.json";
    std::ofstream(nested) << R"({"thresholds": {"nope": 1}})";
    EXPECT_EQ(lel("rates --config " + nested.string() + " --out " + out("bad").string()), 2);
    EXPECT_EQ(lel("kr --domain triangle --out " + out("bad").string()), 2);
    EXPECT_EQ(lel("solve-radial --out /proc/lel_forbidden"), 4);
    EXPECT_EQ(lel("pohozaev --solution /nonexistent.csv --out " + out("bad").string()), 4);
}
