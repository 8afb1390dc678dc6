#ifndef QKELLY_CLI_HPP
#define QKELLY_CLI_HPP

#include "problem_model.hpp"
#include "quantile_eval.hpp"
#include "rational.hpp"
#include "recursive_solver.hpp"
#include "shadow_kelly.hpp"
#include "verification.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkelly::cli {

using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::string command;
    std::vector<std::string> p, q;
    int n = 0;
    std::string alpha;
    int resolution = 0; // 0 means the command default
    std::size_t samples = 1000000;
    std::uint64_t seed = 20240601;
    std::vector<int> horizons;
    std::vector<std::string> family;
    std::string out;
    std::string format;
};

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        auto b = cur.find_first_not_of(" \t");
        auto e = cur.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
    }
    return out;
}

/// "1,3,5" or "a:b:step" (inclusive).
inline std::vector<int> parse_horizons(const std::string& s)
{
    std::vector<int> out;
    try {
        if (s.find(':') != std::string::npos) {
            auto parts = split(s, ':');
            if (parts.size() < 2 || parts.size() > 3) throw ConfigError("bad horizon range '" + s + "'");
            int a = std::stoi(parts[0]), b = std::stoi(parts[1]), step = parts.size() == 3 ? std::stoi(parts[2]) : 1;
            if (step <= 0) throw ConfigError("horizon step must be positive");
            for (int v = a; v <= b; v += step) out.push_back(v);
        } else {
            for (const auto& t : split(s, ',')) out.push_back(std::stoi(t));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("bad horizon list '" + s + "'");
    }
    if (out.empty()) throw ConfigError("empty horizon list");
    return out;
}

/// "a1,...,am<=b".
inline WealthHalfspace parse_halfspace(const std::string& s, int m)
{
    auto pos = s.find("<=");
    if (pos == std::string::npos) throw ConfigError("halfspace '" + s + "' must have the form a1,...,am<=b");
    WealthHalfspace h;
    try {
        h.a = parse_rational_list(s.substr(0, pos));
        h.b = parse_rational(s.substr(pos + 2));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("halfspace '" + s + "': " + e.what());
    }
    if (static_cast<int>(h.a.size()) != m)
        throw ConfigError("halfspace '" + s + "' has " + std::to_string(h.a.size()) + " coefficients, expected " +
                          std::to_string(m));
    return h;
}

namespace detail {

inline json toml_scalar(const std::string& raw, int line)
{
    std::string v = raw;
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        return v.substr(1, v.size() - 2);
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        std::size_t used = 0;
        long long x = std::stoll(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    // Floats stay as text so they are later read as exact decimals.
    try {
        parse_rational(v);
        return v;
    } catch (const std::invalid_argument&) {
    }
    throw ConfigError("config line " + std::to_string(line) + ": unsupported value '" + raw + "'");
}

} // namespace detail

/// Flat TOML: `key = value` lines with strings, integers, booleans and one-line arrays.
inline json parse_toml(const std::string& text)
{
    json doc = json::object();
    std::istringstream is(text);
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
        ++no;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        auto trim = [](std::string x) {
            auto b = x.find_first_not_of(" \t\r");
            auto e = x.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
        };
        std::string s = trim(line);
        if (s.empty()) continue;
        if (s.front() == '[') throw ConfigError("config line " + std::to_string(no) + ": tables are not supported");
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(no) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']') throw ConfigError("config line " + std::to_string(no) + ": unterminated array");
            json arr = json::array();
            std::string body = val.substr(1, val.size() - 2);
            std::string cur;
            bool q = false;
            for (char c : body + ",") {
                if (c == '"') q = !q;
                if (c == ',' && !q) {
                    cur = trim(cur);
                    if (!cur.empty()) arr.push_back(detail::toml_scalar(cur, no));
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            doc[key] = arr;
        } else {
            doc[key] = detail::toml_scalar(val, no);
        }
    }
    return doc;
}

namespace detail {

inline std::string as_literal(const json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_float()) {
        std::ostringstream os;
        os << std::setprecision(17) << v.get<double>();
        return os.str();
    }
    throw ConfigError("expected a number or a string literal");
}

inline std::vector<std::string> as_literal_list(const json& v)
{
    if (v.is_string()) return split(v.get<std::string>(), ',');
    if (!v.is_array()) throw ConfigError("expected a list");
    std::vector<std::string> out;
    for (const auto& x : v) out.push_back(as_literal(x));
    return out;
}

} // namespace detail

/// Reads a JSON (by extension or leading brace) or flat TOML file into cfg.
inline void load_config_file(const std::string& path, RunConfig& cfg)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    auto first = text.find_first_not_of(" \t\r\n");
    bool is_json = path.ends_with(".json") || (first != std::string::npos && text[first] == '{');
    json doc;
    try {
        doc = is_json ? json::parse(text) : parse_toml(text);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "command") cfg.command = v.get<std::string>();
            else if (k == "p") cfg.p = detail::as_literal_list(v);
            else if (k == "q") cfg.q = detail::as_literal_list(v);
            else if (k == "n") cfg.n = v.get<int>();
            else if (k == "alpha") cfg.alpha = detail::as_literal(v);
            else if (k == "resolution") cfg.resolution = v.get<int>();
            else if (k == "samples") cfg.samples = v.get<std::size_t>();
            else if (k == "seed") cfg.seed = v.get<std::uint64_t>();
            else if (k == "horizons") {
                if (v.is_string()) cfg.horizons = parse_horizons(v.get<std::string>());
                else cfg.horizons = v.get<std::vector<int>>();
            } else if (k == "family") {
                cfg.family.clear();
                if (v.is_string()) cfg.family.push_back(v.get<std::string>());
                else cfg.family = v.get<std::vector<std::string>>();
            } else if (k == "out") cfg.out = v.get<std::string>();
            else if (k == "format") cfg.format = v.get<std::string>();
            else throw ConfigError("unknown config key '" + k + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
}

inline ProblemInstance instance_of(const RunConfig& cfg)
{
    if (cfg.p.empty() || cfg.q.empty() || cfg.alpha.empty() || cfg.n == 0)
        throw ConfigError("p, q, n and alpha are all required");
    return validate_instance(static_cast<int>(cfg.p.size()), cfg.p, cfg.q, cfg.n, cfg.alpha);
}

inline RestrictedFamily family_of(const RunConfig& cfg, int m)
{
    RestrictedFamily fam;
    for (const auto& s : cfg.family) fam.halfspaces.push_back(parse_halfspace(s, m));
    return fam;
}

inline json rational_list(const std::vector<Rational>& v)
{
    json a = json::array();
    for (const auto& x : v) a.push_back(to_string(x));
    return a;
}

inline json number_list(const std::vector<double>& v)
{
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

inline json instance_json(const ProblemInstance& inst)
{
    return json{{"m", inst.m}, {"p", rational_list(inst.p)}, {"q", rational_list(inst.q)},
                {"n", inst.n}, {"alpha", to_string(inst.alpha)}};
}

inline json solve_report(const ProblemInstance& inst, const RestrictedFamily& fam, const GlobalSolution& sol)
{
    json r;
    r["instance"] = instance_json(inst);
    if (!fam.empty()) {
        json f = json::array();
        for (const auto& h : fam.halfspaces) f.push_back(json{{"a", rational_list(h.a)}, {"b", to_string(h.b)}});
        r["family"] = f;
    }
    r["value"] = json{{"decimal", sol.value}, {"exact", sol.exact_value ? json(to_string(*sol.exact_value)) : json()}};
    r["argmax"] = json{{"decimal", number_list(sol.argmax)},
                       {"exact", sol.argmax_exact ? rational_list(*sol.argmax_exact) : json()}};
    r["active_count"] = sol.active_count.k;
    r["shadow_law"] = rational_list(shadow_law(sol.active_count));
    auto K = kelly_point(inst.p, inst.q);
    r["kelly_point"] = json{{"decimal", number_list(to_double(K))}, {"exact", rational_list(K)}};
    r["kelly_value"] = kelly_value(inst.p, inst.q);
    const auto& st = sol.attained_stratum;
    std::vector<int> support;
    for (int i : st.S.idx) support.push_back(i + 1);
    r["attained_stratum"] = json{{"id", st.id}, {"label", st.label()}, {"support", support}, {"dim", st.dim}};

    json visited = json::array();
    for (const auto& v : sol.trace.visited) {
        json e{{"stratum", v.stratum}, {"label", v.label}, {"rank", {v.rank.first, v.rank.second}},
               {"status", visit_status_name(v.status)}};
        e["active_count"] = v.active ? json(v.active->k) : json();
        e["candidate"] = v.candidate;
        e["value"] = v.candidate ? json(v.value) : json();
        e["exact_value"] = v.candidate && v.exact_value ? json(to_string(*v.exact_value)) : json();
        e["landing"] = v.landing ? json(*v.landing) : json();
        visited.push_back(std::move(e));
    }
    json path = json::array();
    for (int id : sol.trace.winning_path) path.push_back(sol.trace.visited[static_cast<std::size_t>(id)].label);
    json edges = json::array();
    for (const auto& [a, b] : sol.trace.descent_edges) edges.push_back({a, b});
    r["trace"] = json{{"strata", sol.trace.visited.size()}, {"pruned_zero", sol.trace.pruned_zero},
                      {"descent_path", path}, {"descent_edges", edges}, {"visited", visited}};
    return r;
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : out_(&fallback)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw ConfigError("cannot write '" + path + "'");
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

inline int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream&)
{
    auto inst = instance_of(cfg);
    auto fam = family_of(cfg, inst.m);
    auto sol = solve(inst, fam);
    Output o(cfg.out, out);
    o.stream() << solve_report(inst, fam, sol).dump(2) << "\n";
    return kOk;
}

inline int run_surface(const RunConfig& cfg, std::ostream& out, std::ostream&)
{
    auto inst = instance_of(cfg);
    if (inst.m < 2 || inst.m > 3) throw ConfigError("surface needs m = 2 or m = 3");
    const int R = cfg.resolution ? cfg.resolution : 200;
    if (R < 1) throw ConfigError("resolution must be positive");
    const auto table = count_table(inst);
    const bool as_json = cfg.format == "json";
    Output o(cfg.out, out);
    auto& os = o.stream();
    os << std::setprecision(17);
    json rows = json::array();
    if (!as_json) {
        for (int i = 1; i <= inst.m; ++i) os << "W" << i << ",";
        os << "value\n";
    }
    qkelly::detail::for_each_composition(inst.m, R, [&](const std::vector<int>& j) {
        Profile<Rational> W(j.size());
        for (std::size_t i = 0; i < j.size(); ++i) W[i] = Rational(j[i]) / (Rational(R) * inst.q[i]);
        Rational v = quantile_at(inst, table, W);
        if (as_json) {
            rows.push_back(json{{"W", number_list(to_double(W))}, {"value", to_double(v)}, {"exact", to_string(v)}});
        } else {
            for (const auto& w : W) os << to_double(w) << ",";
            os << to_double(v) << "\n";
        }
    });
    if (as_json) os << rows.dump(2) << "\n";
    return kOk;
}

inline int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    auto inst = instance_of(cfg);
    auto fam = family_of(cfg, inst.m);
    auto sol = solve(inst, fam);
    const int R = cfg.resolution ? cfg.resolution : 400;
    auto grid = grid_oracle(inst, R, fam);
    const auto table = count_table(inst);
    double rel = std::abs(grid.best_value - sol.value) / std::max(std::abs(sol.value), 1e-300);
    bool grid_ok = rel <= 2e-3 && grid.best_value <= sol.value + 1e-9;
    json mc;
    bool mc_ok;
    if (sol.argmax_exact) {
        Rational atom = quantile_at(inst, table, *sol.argmax_exact);
        Rational est = mc_quantile(inst, *sol.argmax_exact, cfg.samples, cfg.seed);
        mc_ok = est == atom;
        mc = json{{"value", to_double(est)}, {"exact", to_string(est)}, {"atom", to_string(atom)}};
    } else {
        double atom = quantile_at(inst, table, sol.argmax);
        double est = mc_quantile(inst, sol.argmax, cfg.samples, cfg.seed);
        mc_ok = std::abs(est - atom) <= 1e-12 * std::max(1.0, std::abs(atom));
        mc = json{{"value", est}, {"atom", atom}};
    }
    mc["samples"] = cfg.samples;
    mc["seed"] = cfg.seed;
    mc["pass"] = mc_ok;
    json r;
    r["instance"] = instance_json(inst);
    r["exact"] = json{{"value", sol.value},
                      {"exact", sol.exact_value ? json(to_string(*sol.exact_value)) : json()},
                      {"argmax", number_list(sol.argmax)}};
    r["grid"] = json{{"resolution", R},         {"value", grid.best_value},     {"argmax", number_list(grid.best_point)},
                     {"evaluations", grid.evaluations}, {"relative_gap", rel}, {"pass", grid_ok}};
    r["monte_carlo"] = mc;
    r["pass"] = grid_ok && mc_ok;
    Output o(cfg.out, out);
    o.stream() << r.dump(2) << "\n";
    if (!(grid_ok && mc_ok)) {
        err << "verification failed:" << (grid_ok ? "" : " grid") << (mc_ok ? "" : " monte-carlo") << "\n";
        return kVerifyFailed;
    }
    return kOk;
}

inline int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    auto base = instance_of(cfg);
    std::vector<int> horizons = cfg.horizons.empty() ? std::vector<int>{base.n} : cfg.horizons;
    check_sweep_guard(base.m, horizons);
    auto rows = asymptotic_sweep(base.p, base.q, base.alpha, horizons);
    Output o(cfg.out, out);
    auto& os = o.stream();
    os << std::setprecision(17);
    if (cfg.format == "json") {
        json a = json::array();
        for (const auto& r : rows)
            a.push_back(json{{"n", r.n}, {"scaled_log_value", r.scaled_log_value}, {"kelly_distance", r.kelly_distance},
                             {"argmax", number_list(r.argmax)}});
        os << a.dump(2) << "\n";
    } else {
        os << "n,scaled_log_value,kelly_distance";
        for (int i = 1; i <= base.m; ++i) os << ",W" << i;
        os << "\n";
        for (const auto& r : rows) {
            os << r.n << "," << r.scaled_log_value << "," << r.kelly_distance;
            for (double w : r.argmax) os << "," << w;
            os << "\n";
        }
    }
    const double L = kelly_value(base.p, base.q);
    const auto& last = rows.back();
    err << "final n=" << last.n << " |scaled_log_value - L*|=" << std::abs(last.scaled_log_value - L)
        << " kelly_distance=" << last.kelly_distance << " (L*=" << L << ")\n";
    return kOk;
}

/// Parses argv, dispatches and maps failures to exit codes.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Exact finite-horizon upper-quantile Kelly solver", "qkelly"};
    app.require_subcommand(1);
    RunConfig flags;
    std::string config_path, p_list, q_list, horizons;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON or flat TOML config file; flags override it");
        sub->add_option("--p", p_list, "probabilities, comma separated (\"0.6,0.4\" or \"3/5,2/5\")");
        sub->add_option("--q", q_list, "state prices, comma separated");
        sub->add_option("--n", flags.n, "horizon");
        sub->add_option("--alpha", flags.alpha, "quantile level in (0,1)");
        sub->add_option("--family", flags.family, "halfspace a1,...,am<=b (repeatable)");
        sub->add_option("--out", flags.out, "output path (default standard output)");
        sub->add_option("--format", flags.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };
    auto* solve_cmd = app.add_subcommand("solve", "exact optimum, argmax and descent trace as JSON");
    auto* surface_cmd = app.add_subcommand("surface", "quantile over a simplex lattice as CSV");
    auto* verify_cmd = app.add_subcommand("verify", "exact solve against grid search and Monte Carlo");
    auto* sweep_cmd = app.add_subcommand("sweep", "exact optimum across horizons as CSV");
    for (auto* s : {solve_cmd, surface_cmd, verify_cmd, sweep_cmd}) add_common(s);
    for (auto* s : {surface_cmd, verify_cmd}) s->add_option("--resolution", flags.resolution, "lattice points per unit");
    verify_cmd->add_option("--samples", flags.samples, "Monte Carlo sample count");
    verify_cmd->add_option("--seed", flags.seed, "Monte Carlo seed");
    sweep_cmd->add_option("--horizons", horizons, "list \"1,3,5\" or range \"a:b:step\"");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "qkelly: " << e.what() << "\n";
        return kConfigError;
    }
    CLI::App* sub = app.get_subcommands().front();
    try {
        RunConfig cfg;
        if (!config_path.empty()) load_config_file(config_path, cfg);
        cfg.command = sub->get_name();
        auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
        if (given("--p")) cfg.p = split(p_list, ',');
        if (given("--q")) cfg.q = split(q_list, ',');
        if (given("--n")) cfg.n = flags.n;
        if (given("--alpha")) cfg.alpha = flags.alpha;
        if (given("--family")) cfg.family = flags.family;
        if (given("--out")) cfg.out = flags.out;
        if (given("--format")) cfg.format = flags.format;
        if (given("--resolution")) cfg.resolution = flags.resolution;
        if (given("--samples")) cfg.samples = flags.samples;
        if (given("--seed")) cfg.seed = flags.seed;
        if (given("--horizons")) cfg.horizons = parse_horizons(horizons);
        if (cfg.samples < 1000) throw ConfigError("samples must be at least 1000");

        if (cfg.command == "solve") return run_solve(cfg, out, err);
        if (cfg.command == "surface") return run_surface(cfg, out, err);
        if (cfg.command == "verify") return run_verify(cfg, out, err);
        return run_sweep(cfg, out, err);
    } catch (const SolveError& e) {
        err << "qkelly: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const SolveFailure& e) {
        err << "qkelly: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const std::invalid_argument& e) {
        err << "qkelly: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::out_of_range& e) {
        err << "qkelly: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "qkelly: " << e.what() << "\n";
        return kNumericalFailure;
    }
}

} // namespace qkelly::cli

#endif // QKELLY_CLI_HPP
