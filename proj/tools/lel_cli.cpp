// lel: batch driver for the solvers and diagnostics.
//
//   lel <command> [--config file.json] [--out dir] [--threads n] [--seed s] [command flags]
//
// exit codes: 0 all checks pass, 1 a check failed, 2 bad config, 3 solver failure, 4 I/O failure

#include <CLI11.hpp>
#include <json.hpp>

#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <list>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include "lel/asymptotics.hpp"
#include "lel/kirchhoff_routh.hpp"
#include "lel/special.hpp"
#include "lel/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace lel;

namespace {

constexpr const char* schema_version = "lel-run/1";

enum Exit { ok = 0, check_failed = 1, config_error = 2, solver_error = 3, io_error = 4 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
    return buf;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot reopen " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

// ---------------------------------------------------------------------------
// run context: output directory, manifest, check bookkeeping

struct Run {
    std::string command;
    fs::path out;
    unsigned threads = 1;
    std::uint64_t seed = 0;
    json config;
    json steps = json::array();
    json checks = json::array();
    std::vector<std::string> files;
    std::string started = utc_now();
    bool all_pass = true;

    std::ofstream open(const std::string& name) {
        std::error_code ec;
        fs::create_directories(out, ec);
        std::ofstream f(out / name, std::ios::binary);
        if (!f) throw IoError("cannot write " + (out / name).string());
        files.push_back(name);
        return f;
    }

    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
        auto f = open(name);
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) f << (i ? "," : "") << cells[i];
            f << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        if (!f) throw IoError("write failed for " + name);
    }

    void write_json(const std::string& name, const json& j) {
        auto f = open(name);
        f << j.dump(2) << '\n';
        if (!f) throw IoError("write failed for " + name);
    }

    void step(const std::string& name, const std::string& status, const std::string& message = "") {
        json s = {{"name", name}, {"status", status}};
        if (!message.empty()) s["message"] = message;
        steps.push_back(s);
        if (name == "error")
            spdlog::error("{} error: {}", status, message);
        else
            spdlog::info("{}: {} {}", name, status, message);
    }

    void check(const std::string& name, double value, double limit, bool pass) {
        checks.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"pass", pass}});
        all_pass = all_pass && pass;
        if (!pass) spdlog::warn("check {} failed: {} vs {}", name, num(value), num(limit));
    }

    void write_manifest(int exit_code) {
        json inv = json::array();
        for (const auto& f : files) {
            const auto path = out / f;
            inv.push_back({{"path", f}, {"bytes", fs::file_size(path)}, {"sha256", sha256_file(path)}});
        }
        json m = {{"schema", schema_version},
                  {"command", command},
                  {"config", config},
                  {"threads", threads},
                  {"seed", seed},
                  {"started", started},
                  {"finished", utc_now()},
                  {"steps", steps},
                  {"checks", checks},
                  {"files", inv},
                  {"exit_code", exit_code}};
        std::error_code ec;
        fs::create_directories(out, ec);
        std::ofstream f(out / "manifest.json", std::ios::binary);
        if (!f) throw IoError("cannot write manifest");
        f << m.dump(2) << '\n';
    }
};

// ---------------------------------------------------------------------------
// config handling

json defaults_for(const std::string& cmd) {
    if (cmd == "special") return {{"theta", 0.0}, {"sigma", 0.0}, {"r_max", 10.0}, {"rows", 1001}};
    if (cmd == "green") return {{"domain", "unit-disk"}, {"h", 1.0 / 128}, {"pole", {0.0, 0.0}}, {"samples", 41}};
    if (cmd == "kr")
        return {{"domain", "unit-disk"}, {"k", 1}, {"starts", 20}, {"h", 1.0 / 64}, {"expect_points", nullptr}};
    if (cmd == "solve-radial") return {{"p", 10.0}, {"theta", 0.0}, {"refinement", 1}};
    if (cmd == "solve-2d")
        return {{"domain", "unit-disk"}, {"p", 10.0},       {"theta", 0.0},
                {"h", 1.0 / 64},         {"refine", json::array({json::array({-0.25, -0.25, 0.25, 0.25})})},
                {"k", 1},                {"green_h", 1.0 / 64}};
    if (cmd == "rates")
        return {{"domain", "unit-disk"},
                {"theta", 0.0},
                {"p_grid", {20.0, 40.0, 80.0, 160.0}},
                {"refinement", 1},
                {"richardson", true},
                {"phi", 0.0},
                {"thresholds",
                 {{"v_order_max", -1.5},
                  {"mu_remainder_max", 0.02},
                  {"mu_remainder_at", 160.0},
                  {"gap_ratio_tol", 0.1},
                  {"gap_ratio_at", 80.0},
                  {"energy_rel_tol", 0.05},
                  {"energy_at", 80.0}}}};
    if (cmd == "spectrum")
        return {{"p_grid", {20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0}}, {"theta", 0.0}, {"k", 4}, {"max_mode", 4}, {"floor", 0.5}};
    if (cmd == "pohozaev")
        return {{"p", 10.0}, {"theta", 0.0}, {"radii", {0.5}}, {"refinement", 1}, {"solution", nullptr},
                {"residual_max", 1e-3}};
    throw ConfigError("unknown command " + cmd);
}

// recursive merge that rejects keys missing from the defaults
void merge(json& base, const json& in, const std::string& where) {
    if (!in.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = in.begin(); it != in.end(); ++it) {
        if (where.empty() && it.key() == "schema") {
            if (it.value() != schema_version) throw ConfigError("unsupported schema " + it.value().dump());
            continue;
        }
        if (!base.contains(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
        auto& slot = base[it.key()];
        if (slot.is_object())
            merge(slot, it.value(), where + it.key() + ".");
        else
            slot = it.value();
    }
}

json load_config(const std::string& cmd, const std::string& path) {
    json cfg = defaults_for(cmd);
    if (path.empty()) return cfg;
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path);
    json in;
    try {
        in = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    merge(cfg, in, "");
    return cfg;
}

template <class T>
T get(const json& cfg, const char* key) {
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

DomainSpec parse_domain(const std::string& s) {
    if (s == "unit-disk") return DomainSpec::unit_disk();
    double a = 0, b = 0, c = 0;
    if (std::sscanf(s.c_str(), "rectangle:%lfx%lf", &a, &b) == 2) return DomainSpec::rectangle(a, b);
    if (std::sscanf(s.c_str(), "disk:%lf,%lf,%lf", &a, &b, &c) == 3) return DomainSpec::scaled_disk({a, b}, c);
    throw ConfigError("unknown domain '" + s + "' (unit-disk, rectangle:WxH, disk:cx,cy,r)");
}

GreenModel green_model(const DomainSpec& d, double h) {
    return d.is_disk() ? GreenModel::analytic(d) : GreenModel::numeric(d, h);
}

// "20:80" (step 10), "20:80:5", or "20,40,80"
std::vector<double> parse_p_list(const std::string& s) {
    std::vector<double> out;
    double a = 0, b = 0, st = 10;
    char tail = 0;
    if (s.find(':') != std::string::npos) {
        const int n = std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &a, &b, &st, &tail);
        if ((n != 2 && n != 3) || !(st > 0) || !(b >= a)) throw ConfigError("bad p range '" + s + "'");
        for (int i = 0; a + i * st <= b + 1e-9; ++i) out.push_back(a + i * st);
        return out;
    }
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad p list '" + s + "'");
        }
    }
    return out;
}

std::vector<double> checked_p_grid(const json& cfg) {
    auto g = get<std::vector<double>>(cfg, "p_grid");
    if (g.empty()) throw ConfigError("p_grid is empty");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 1.0)) throw ConfigError("p_grid entries must exceed 1");
        if (i && !(g[i] > g[i - 1])) throw ConfigError("p_grid must be increasing");
    }
    return g;
}

// continuation grid reaching `target` from p = 3; the cold solve is only reliable at small p
std::vector<double> bridged(const std::vector<double>& target) {
    std::vector<double> g;
    for (double q : {3.0, 5.0, 10.0})
        if (q < target.front()) g.push_back(q);
    g.insert(g.end(), target.begin(), target.end());
    return g;
}

std::vector<RadialPair> radial_run(const std::vector<double>& target, double theta, int refinement,
                                   std::vector<RadialPair>* partial = nullptr) {
    MeshPolicy pol;
    pol.refinement = refinement;
    const auto grid = bridged(target);
    auto keep = [&](const std::vector<RadialPair>& all) {
        std::vector<RadialPair> out;
        for (const auto& s : all)
            for (double p : target)
                if (s.ep.p() == p) out.push_back(s);
        return out;
    };
    try {
        return keep(continue_radial(grid, theta, pol));
    } catch (const SolveError<std::vector<RadialPair>>& e) {
        if (partial) *partial = keep(e.last_iterate());
        throw;
    }
}

RadialPair radial_solution(double p, double theta, int refinement) {
    return radial_run({p}, theta, refinement).back();
}

RadialPair read_radial_csv(const std::string& path, const ExponentPair& ep) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read solution " + path);
    std::string line;
    std::getline(f, line);
    if (line.rfind("r,u,v", 0) != 0) throw ConfigError("solution file must start with header r,u,v");
    RadialPair s;
    s.ep = ep;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        double r, u, v;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r, &u, &v) != 3) throw ConfigError("bad row in " + path);
        s.mesh.r.push_back(r);
        s.u.push_back(u);
        s.v.push_back(v);
    }
    if (s.mesh.size() < 4 || s.mesh.r.front() != 0.0 || s.mesh.r.back() != 1.0)
        throw ConfigError("solution mesh must run from r = 0 to r = 1");
    return s;
}

// ---------------------------------------------------------------------------
// commands

void cmd_special(Run& run) {
    const auto& c = run.config;
    const double theta = get<double>(c, "theta"), sigma = get<double>(c, "sigma"), rmax = get<double>(c, "r_max");
    const int rows = get<int>(c, "rows");
    if (rows < 2 || !(rmax > 0)) throw ConfigError("need rows >= 2 and r_max > 0");
    const auto cc = CorrectionConstants::make(theta, sigma);
    std::vector<std::vector<std::string>> out;
    for (int i = 0; i < rows; ++i) {
        const double r = rmax * i / (rows - 1);
        const auto cp = correction_profiles(r, cc);
        out.push_back({num(r), num(phi0_radial(r)), num(eval_phi(1, {r, 0.0}).value), num(eval_phi3(r).value),
                       num(eval_psi0(r).value), num(cp.s_star), num(cp.t_star)});
    }
    run.write_csv("special_profiles.csv", {"r", "phi0", "phi1_axis", "phi3", "psi0", "s_star", "t_star"}, out);
    run.step("profiles", "ok");
    std::vector<std::vector<std::string>> tab;
    for (const auto& q : reference_integrals(theta)) tab.push_back({q.name, num(q.value), num(q.error)});
    run.write_csv("reference_integrals.csv", {"name", "value", "error"}, tab);
    run.step("integrals", "ok");
}

void cmd_green(Run& run) {
    const auto& c = run.config;
    const auto dom = parse_domain(get<std::string>(c, "domain"));
    const auto model = green_model(dom, get<double>(c, "h"));
    const auto pole_v = get<std::vector<double>>(c, "pole");
    if (pole_v.size() != 2) throw ConfigError("pole must be [x, y]");
    const Point pole{pole_v[0], pole_v[1]};
    if (!dom.contains(pole)) throw ConfigError("pole outside the domain");
    const int n = get<int>(c, "samples");
    if (n < 2) throw ConfigError("samples must be >= 2");
    const Point lo = dom.middle() - Point{0.5 * dom.width, 0.5 * dom.height};
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Point x = lo + Point{dom.width * i / (n - 1), dom.height * j / (n - 1)};
            if (!dom.contains(x) || distance(x, pole) < 1e-12) continue;
            rows.push_back({num(x.x), num(x.y), num(model.green(x, pole).value), num(model.regular(x, pole).value),
                            num(model.robin(x).value)});
        }
    run.write_csv("green_field.csv", {"x", "y", "G", "H", "R"}, rows);
    run.step("sample", "ok", std::to_string(rows.size()) + " points");
}

void cmd_kr(Run& run) {
    const auto& c = run.config;
    const auto dom = parse_domain(get<std::string>(c, "domain"));
    const auto model = green_model(dom, get<double>(c, "h"));
    const int k = get<int>(c, "k"), n = get<int>(c, "starts");
    if (k < 1 || n < 1) throw ConfigError("need k >= 1 and starts >= 1");
    std::mt19937_64 rng(run.seed);
    std::uniform_real_distribution<double> uni(-0.45, 0.45);
    std::vector<std::vector<Point>> starts;
    while (static_cast<int>(starts.size()) < n) {
        std::vector<Point> s;
        while (static_cast<int>(s.size()) < k) {
            const Point x = dom.middle() + Point{uni(rng) * dom.width, uni(rng) * dom.height};
            if (dom.boundary_distance(x) > 0.1 * dom.min_dimension()) s.push_back(x);
        }
        starts.push_back(s);
    }
    const auto res = find_kr_critical(model, k, starts, run.threads);
    std::vector<std::string> header{"k", "value"};
    for (int i = 1; i <= k; ++i) {
        header.push_back("x" + std::to_string(i));
        header.push_back("y" + std::to_string(i));
    }
    for (int i = 1; i <= 2 * k; ++i) header.push_back("eig" + std::to_string(i));
    header.push_back("nondegenerate");
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : res.points) {
        std::vector<std::string> r{std::to_string(k), num(p.value)};
        for (const auto& x : p.config) {
            r.push_back(num(x.x));
            r.push_back(num(x.y));
        }
        for (double e : p.eigenvalues) r.push_back(num(e));
        r.push_back(p.nondegenerate ? "1" : "0");
        rows.push_back(r);
    }
    run.write_csv("kr_points.csv", header, rows);
    run.write_json("kr_summary.json", {{"converged_runs", res.converged_runs},
                                       {"escaped_runs", res.escaped_runs},
                                       {"stalled_runs", res.stalled_runs},
                                       {"points", res.points.size()},
                                       {"diagnostic", res.diagnostic}});
    run.step("search", "ok", std::to_string(res.points.size()) + " critical configurations");
    if (!c.at("expect_points").is_null()) {
        const int want = get<int>(c, "expect_points");
        run.check("expect_points", double(res.points.size()), want, static_cast<int>(res.points.size()) == want);
    }
}

void cmd_solve_radial(Run& run) {
    const auto& c = run.config;
    const auto s = radial_solution(get<double>(c, "p"), get<double>(c, "theta"), get<int>(c, "refinement"));
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < s.mesh.size(); ++i) rows.push_back({num(s.mesh.r[i]), num(s.u[i]), num(s.v[i])});
    run.write_csv("radial_solution.csv", {"r", "u", "v"}, rows);
    const auto d = extract_bubble(s);
    run.write_json("radial_summary.json", {{"p", s.ep.p()},
                                           {"q", s.ep.q()},
                                           {"nodes", s.mesh.size()},
                                           {"v_max", d.v_max},
                                           {"u_at_max", d.u_at_max},
                                           {"mu", d.mu},
                                           {"energy_uv", d.energy_uv},
                                           {"mass_v", d.mass_v},
                                           {"residual", s.residual},
                                           {"iterations", s.iterations}});
    run.step("solve", "ok");
}

void cmd_solve_2d(Run& run) {
    const auto& c = run.config;
    const auto dom = parse_domain(get<std::string>(c, "domain"));
    const ExponentPair ep(get<double>(c, "p"), get<double>(c, "theta"));
    std::vector<RefineBox> boxes;
    for (const auto& b : c.at("refine")) {
        const auto v = b.get<std::vector<double>>();
        if (v.size() != 4) throw ConfigError("refine boxes are [x0, y0, x1, y1]");
        boxes.push_back({v[0], v[1], v[2], v[3]});
    }
    auto grid = std::make_shared<const Grid2D>(build_grid(dom, get<double>(c, "h"), boxes));
    const auto model = green_model(dom, get<double>(c, "green_h"));
    const int k = get<int>(c, "k");
    std::vector<Point> start;
    for (int i = 0; i < k; ++i) {
        const double a = 2.0 * pi * i / k;
        start.push_back(dom.middle() + (k == 1 ? 0.0 : 0.25 * dom.min_dimension()) * Point{std::cos(a), std::sin(a)});
    }
    const auto kr = find_kr_critical(model, k, {start}, 1);
    if (kr.points.empty()) throw Error(ErrorKind::no_convergence, "no Kirchhoff-Routh critical point from the start");
    const auto f = solve_planar(ep, grid, initial_guess_from_kr(model, ep, kr.points.front(), grid));
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < grid->size(); ++i)
        rows.push_back({num(grid->node(i).x), num(grid->node(i).y), num(f.u[i]), num(f.v[i])});
    run.write_csv("field.csv", {"x", "y", "u", "v"}, rows);
    json summary = {{"p", ep.p()}, {"q", ep.q()}, {"nodes", grid->size()}, {"iterations", f.iterations},
                    {"residual", f.residual}, {"energy", planar_energy(f)}};
    if (k == 1) {
        const auto d = extract_bubble(f);
        summary["x"] = {d.x.x, d.x.y};
        summary["v_max"] = d.v_max;
        summary["u_at_max"] = d.u_at_max;
        summary["mu"] = d.mu;
    }
    run.write_json("field_summary.json", summary);
    run.step("solve", "ok");
}

json opt_num(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

void write_rates(Run& run, const RateReport& rep) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : rep.rows)
        rows.push_back({num(r.p), num(r.theta), num(r.v_max), num(r.v_pred), num(r.u_max), num(r.u_pred), num(r.mu),
                        num(r.mu_pred), std::isnan(r.gap_ratio) ? "" : num(r.gap_ratio), num(r.energy)});
    run.write_csv("rates.csv",
                  {"p", "theta", "v_max", "v_pred", "u_max", "u_pred", "mu", "mu_pred", "gap_ratio", "energy"}, rows);
}

void cmd_rates(Run& run) {
    const auto& c = run.config;
    if (!parse_domain(get<std::string>(c, "domain")).is_disk() || get<std::string>(c, "domain") != "unit-disk")
        throw ConfigError("rates runs the radial solver and needs domain unit-disk");
    const auto grid = checked_p_grid(c);
    const double theta = get<double>(c, "theta"), phi = get<double>(c, "phi");
    const int refinement = get<int>(c, "refinement");
    std::vector<RadialPair> partial;
    std::vector<RadialPair> runs, fine;
    try {
        runs = radial_run(grid, theta, refinement, &partial);
        if (get<bool>(c, "richardson")) fine = radial_run(grid, theta, 2 * refinement);
    } catch (const Error& e) {
        if (!partial.empty()) {
            write_rates(run, build_rate_report(partial, {}, phi));
            run.step("continuation", "failed", "last good p = " + num(partial.back().ep.p()));
        }
        throw;
    }
    run.step("continuation", "ok");
    const auto rep = build_rate_report(runs, fine, phi);
    write_rates(run, rep);

    const auto& t = c.at("thresholds");
    auto th = [&](const char* k) { return get<double>(t, k); };
    if (rep.v_order) run.check("v_order", *rep.v_order, th("v_order_max"), *rep.v_order <= th("v_order_max"));
    for (const auto& r : rep.rows) {
        if (r.p == th("mu_remainder_at")) {
            const double e = std::abs(r.mu_law_remainder(phi));
            run.check("mu_remainder", e, th("mu_remainder_max"), e <= th("mu_remainder_max"));
        }
        if (r.p == th("gap_ratio_at") && theta > 0.0)
            run.check("gap_ratio", r.gap_ratio, th("gap_ratio_tol"), std::abs(r.gap_ratio - 1.0) <= th("gap_ratio_tol"));
        if (r.p == th("energy_at") && theta == 0.0) {
            const double rel = std::abs(r.energy / (8.0 * pi * std::exp(1.0)) - 1.0);
            run.check("energy", rel, th("energy_rel_tol"), rel <= th("energy_rel_tol"));
        }
    }
    json mu_rem = json::array();
    for (const auto& r : rep.rows) mu_rem.push_back(r.mu_law_remainder(phi));
    run.write_json("rates_summary.json", {{"theta", theta},
                                          {"phi", phi},
                                          {"richardson", !fine.empty()},
                                          {"v_order", opt_num(rep.v_order)},
                                          {"u_order", opt_num(rep.u_order)},
                                          {"mu_order", opt_num(rep.mu_order)},
                                          {"mu_law_remainder", mu_rem},
                                          {"checks", run.checks}});
}

void cmd_spectrum(Run& run) {
    const auto& c = run.config;
    const auto grid = checked_p_grid(c);
    const double theta = get<double>(c, "theta"), floor = get<double>(c, "floor");
    ProbeOptions opt;
    opt.k = get<int>(c, "k");
    opt.max_mode = get<int>(c, "max_mode");
    const auto sols = radial_run(grid, theta, 1);
    run.step("continuation", "ok");
    std::vector<SpectralProbe> probes(sols.size());
    std::vector<std::string> errors(sols.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < sols.size(); i = next++) {
            try {
                probes[i] = linearized_probe(sols[i], opt);
            } catch (const SolveError<SpectralProbe>& e) {
                probes[i] = e.last_iterate();
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::max(1u, run.threads); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<std::string> header{"p", "theta"};
    for (int i = 1; i <= opt.k; ++i) header.push_back("sigma_" + std::to_string(i));
    for (int i = 1; i <= opt.k; ++i) header.push_back("mode_" + std::to_string(i));
    for (const char* h : {"laplacian_scale", "scaled_min", "converged"}) header.push_back(h);
    std::vector<std::vector<std::string>> rows;
    double worst = 1e300;
    for (std::size_t i = 0; i < sols.size(); ++i) {
        const auto& pr = probes[i];
        std::vector<std::string> r{num(sols[i].ep.p()), num(theta)};
        for (double s : pr.singular_values) r.push_back(num(s));
        for (int m : pr.modes) r.push_back(std::to_string(m));
        r.push_back(num(pr.laplacian_scale));
        r.push_back(num(pr.scaled_min));
        r.push_back(errors[i].empty() ? "1" : "0");
        rows.push_back(r);
        worst = std::min(worst, pr.scaled_min);
    }
    run.write_csv("spectrum.csv", header, rows);
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty()) throw Error(ErrorKind::probe, "p = " + num(sols[i].ep.p()) + ": " + errors[i]);
    run.check("scaled_min", worst, floor, worst > floor);
}

void cmd_pohozaev(Run& run) {
    const auto& c = run.config;
    const ExponentPair ep(get<double>(c, "p"), get<double>(c, "theta"));
    const auto sol = c.at("solution").is_null() ? radial_solution(ep.p(), ep.theta(), get<int>(c, "refinement"))
                                                : read_radial_csv(get<std::string>(c, "solution"), ep);
    const double lim = get<double>(c, "residual_max");
    std::vector<std::vector<std::string>> rows;
    double worst = 0.0;
    for (double r : get<std::vector<double>>(c, "radii")) {
        const auto rep = pohozaev_check(sol, r);
        rows.push_back({num(r), num(rep.P_lhs), num(rep.P_rhs), num(rep.P_residual), num(rep.P_relative()),
                        num(rep.Q1_lhs), num(rep.Q1_rhs), num(rep.Q1_residual), num(rep.Q2_lhs), num(rep.Q2_rhs),
                        num(rep.Q2_residual)});
        worst = std::max(worst, rep.P_relative());
    }
    run.write_csv("pohozaev.csv",
                  {"r", "P_lhs", "P_rhs", "P_residual", "P_relative", "Q1_lhs", "Q1_rhs", "Q1_residual", "Q2_lhs",
                   "Q2_rhs", "Q2_residual"},
                  rows);
    run.step("identities", "ok");
    run.check("P_relative", worst, lim, worst <= lim);
}

int exit_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::argument:
        case ErrorKind::domain:
        case ErrorKind::parameter:
        case ErrorKind::config: return config_error;
        case ErrorKind::io: return io_error;
        default: return solver_error;
    }
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("lel");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* lv = std::getenv("LEL_LOG")) spdlog::set_level(spdlog::level::from_str(lv));
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"lel: Lane-Emden system solvers and blow-up diagnostics"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir = "lel_out";
    unsigned threads = 1;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
    app.add_option("--seed", seed, "seed for multistart sampling");

    // command-line overrides land on top of the config file
    struct Override {
        CLI::Option* opt;
        std::string key;
        std::variant<double, int, std::string>* slot;
    };
    std::list<std::variant<double, int, std::string>> slots;
    std::vector<Override> overrides;
    auto ovr = [&](CLI::App* sub, const std::string& flag, const std::string& key, auto tag) {
        using T = decltype(tag);
        auto& slot = slots.emplace_back(T{});
        overrides.push_back({sub->add_option(flag, std::get<T>(slot)), key, &slot});
    };
    auto* special = app.add_subcommand("special", "kernel functions, correction profiles, reference integrals");
    ovr(special, "--theta", "theta", double{});
    ovr(special, "--rows", "rows", int{});
    auto* green = app.add_subcommand("green", "sample G, H, R around a pole");
    ovr(green, "--domain", "domain", std::string{});
    ovr(green, "--spacing", "h", double{});
    auto* kr = app.add_subcommand("kr", "Kirchhoff-Routh critical points by multistart Newton");
    ovr(kr, "--domain", "domain", std::string{});
    ovr(kr, "--k", "k", int{});
    ovr(kr, "--starts", "starts", int{});
    auto* sr = app.add_subcommand("solve-radial", "radial solve on the unit disk");
    ovr(sr, "--p", "p", double{});
    ovr(sr, "--theta", "theta", double{});
    ovr(sr, "--refinement", "refinement", int{});
    auto* s2 = app.add_subcommand("solve-2d", "planar solve from the Kirchhoff-Routh guess");
    ovr(s2, "--domain", "domain", std::string{});
    ovr(s2, "--p", "p", double{});
    ovr(s2, "--theta", "theta", double{});
    ovr(s2, "--spacing", "h", double{});
    ovr(s2, "--k", "k", int{});
    auto* rates = app.add_subcommand("rates", "rate report over a p grid");
    ovr(rates, "--theta", "theta", double{});
    std::string rates_p, spec_p;
    rates->add_option("--p", rates_p, "p grid: a:b[:step] or a,b,c");
    auto* spectrum = app.add_subcommand("spectrum", "linearized-operator probe over a p grid");
    ovr(spectrum, "--theta", "theta", double{});
    spectrum->add_option("--p", spec_p, "p grid: a:b[:step] or a,b,c");
    auto* poh = app.add_subcommand("pohozaev", "Pohozaev identity residuals");
    ovr(poh, "--p", "p", double{});
    ovr(poh, "--solution", "solution", std::string{});

    CLI11_PARSE(app, argc, argv);

    Run run;
    run.command = app.get_subcommands().front()->get_name();
    run.out = out_dir;
    run.threads = threads;
    run.seed = seed;
    int code = ok;
    try {
        try {
            run.config = load_config(run.command, config_path);
            for (const auto& o : overrides)
                if (o.opt->count() > 0) std::visit([&](const auto& v) { run.config[o.key] = v; }, *o.slot);
            if (!rates_p.empty()) run.config["p_grid"] = parse_p_list(rates_p);
            if (!spec_p.empty()) run.config["p_grid"] = parse_p_list(spec_p);
            run.step("config", "ok");
            if (run.command == "special") cmd_special(run);
            else if (run.command == "green") cmd_green(run);
            else if (run.command == "kr") cmd_kr(run);
            else if (run.command == "solve-radial") cmd_solve_radial(run);
            else if (run.command == "solve-2d") cmd_solve_2d(run);
            else if (run.command == "rates") cmd_rates(run);
            else if (run.command == "spectrum") cmd_spectrum(run);
            else if (run.command == "pohozaev") cmd_pohozaev(run);
            code = run.all_pass ? ok : check_failed;
        } catch (const ConfigError& e) {
            run.step("error", "config", e.what());
            code = config_error;
        } catch (const IoError& e) {
            run.step("error", "io", e.what());
            code = io_error;
        } catch (const Error& e) {
            run.step("error", to_string(e.kind()), e.what());
            code = exit_for(e.kind());
        }
        run.write_manifest(code);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return io_error;
    }
    if (code != ok) spdlog::error("{} exited with code {}", run.command, code);
    return code;
}
