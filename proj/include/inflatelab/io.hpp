#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "inflatelab/experiments.hpp"
#include "inflatelab/oracle.hpp"

namespace inflatelab {

using Json = nlohmann::json;

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {"experiment", "equation", "s",       "eps",           "delta", "N_list",
                                                  "K_list",     "J_max",    "C0",      "generation_cap", "d"};
    return keys;
}

/// Parses JSON text, rejecting duplicate keys at any depth.
inline Json parse_json_strict(const std::string& text, const std::string& origin) {
    std::vector<std::set<std::string>> seen;
    Json::parser_callback_t cb = [&](int, Json::parse_event_t ev, Json& parsed) {
        switch (ev) {
            case Json::parse_event_t::object_start:
                seen.emplace_back();
                break;
            case Json::parse_event_t::object_end:
                seen.pop_back();
                break;
            case Json::parse_event_t::key: {
                const auto key = parsed.get<std::string>();
                if (!seen.back().insert(key).second) throw ConfigError(origin + ": duplicate key '" + key + "'");
                break;
            }
            default:
                break;
        }
        return true;
    };
    try {
        return Json::parse(text, cb);
    } catch (const Json::parse_error& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
}

namespace detail {

inline double json_number(const Json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("/" + key + ": expected a number");
    return v.get<double>();
}

inline std::int64_t json_integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return v.get<std::int64_t>();
}

inline std::string json_string(const Json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError("/" + key + ": expected a string");
    return v.get<std::string>();
}

}  // namespace detail

/// Validated scan configuration. Unknown keys, duplicates, type errors and window violations are rejected.
inline ScanConfig parse_config_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("/: config must be a JSON object");
    ScanConfig cfg;
    for (const auto& [key, value] : j.items()) {
        const auto& known = config_keys();
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("/" + key + ": unknown key");
        if (key == "experiment") cfg.experiment = detail::json_string(value, key);
        else if (key == "equation") cfg.equation = detail::json_string(value, key);
        else if (key == "s") cfg.s = detail::json_number(value, key);
        else if (key == "eps") cfg.eps = detail::json_number(value, key);
        else if (key == "delta") cfg.delta = detail::json_number(value, key);
        else if (key == "C0") cfg.C0 = detail::json_number(value, key);
        else if (key == "J_max") cfg.J_max = static_cast<int>(detail::json_integer(value, "/J_max"));
        else if (key == "generation_cap") cfg.generation_cap = static_cast<int>(detail::json_integer(value, "/generation_cap"));
        else if (key == "d") cfg.d = static_cast<int>(detail::json_integer(value, "/d"));
        else if (key == "N_list" || key == "K_list") {
            if (!value.is_array()) throw ConfigError("/" + key + ": expected an array");
            for (std::size_t i = 0; i < value.size(); ++i) {
                const auto v = detail::json_integer(value[i], "/" + key + "/" + std::to_string(i));
                if (v < 2) throw ConfigError("/" + key + "/" + std::to_string(i) + ": must be at least 2");
                if (key == "N_list") cfg.N_list.push_back(v);
                else cfg.K_list.push_back(static_cast<int>(v));
            }
        }
    }
    if (cfg.generation_cap < 0) throw ConfigError("/generation_cap: must be nonnegative");
    if (cfg.d < 1) throw ConfigError("/d: must be at least 1");
    prepare_scan(cfg);
    return cfg;
}

inline ScanConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
    return parse_config_json(parse_json_strict(text, origin));
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ScanConfig parse_config(const std::filesystem::path& path) {
    return parse_config_text(read_file(path), path.string());
}

/// Effective config, all defaults filled, in a fixed key order.
inline Json config_to_json(const ScanConfig& cfg) {
    Json j;
    j["experiment"] = cfg.experiment;
    j["equation"] = cfg.effective_equation();
    j["s"] = cfg.s;
    j["eps"] = cfg.eps;
    j["delta"] = cfg.delta;
    j["N_list"] = cfg.N_list;
    j["K_list"] = cfg.K_list;
    j["J_max"] = cfg.J_max;
    j["C0"] = cfg.C0;
    j["generation_cap"] = cfg.generation_cap;
    j["d"] = cfg.d;
    return j;
}

/// results.csv -> results.config.json
inline std::filesystem::path config_echo_path(const std::filesystem::path& out) {
    auto p = out;
    p.replace_extension(".config.json");
    return p;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ResourceError("cannot write '" + path.string() + "'");
    os << text;
    if (!os) throw ResourceError("write failed for '" + path.string() + "'");
}

// ---- data specs --------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double spec_number(const std::string& v, const std::string& what) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
        throw ConfigError("data spec: bad number '" + v + "' for " + what);
    return x;
}

inline std::int64_t spec_integer(const std::string& v, const std::string& what) {
    std::size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (v.empty() || pos != v.size()) throw ConfigError("data spec: bad integer '" + v + "' for " + what);
    return x;
}

inline std::map<std::string, std::string> spec_pairs(const std::string& body, const std::set<std::string>& allowed) {
    std::map<std::string, std::string> out;
    if (body.empty()) return out;
    for (const auto& item : split(body, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("data spec: expected key=value, got '" + item + "'");
        const auto key = item.substr(0, eq);
        if (!allowed.count(key)) throw ConfigError("data spec: unknown key '" + key + "'");
        if (!out.emplace(key, item.substr(eq + 1)).second) throw ConfigError("data spec: duplicate key '" + key + "'");
    }
    return out;
}

}  // namespace detail

/**
 * Initial data from a command-line spec:
 *   nonendpoint:N=64,s=-0.8,eps=0.01[,delta=0.1][,d=1][,amp=1]
 *   endpoint:N=256,K=3[,d=1]
 *   cos:0.5@1+0.25@2        sum of amplitude@frequency cosines (components comma-separated)
 *   file:path               canonical field text
 */
inline TrigPolynomial parse_data_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("data spec '" + spec + "' lacks a kind prefix");
    const auto kind = spec.substr(0, colon);
    const auto body = spec.substr(colon + 1);
    if (kind == "nonendpoint") {
        auto kv = detail::spec_pairs(body, {"N", "s", "eps", "delta", "d", "amp"});
        NonEndpointParams p;
        if (kv.count("N")) p.N = detail::spec_integer(kv["N"], "N");
        if (kv.count("s")) p.s = detail::spec_number(kv["s"], "s");
        if (kv.count("eps")) p.eps = detail::spec_number(kv["eps"], "eps");
        if (kv.count("delta")) p.delta = detail::spec_number(kv["delta"], "delta");
        if (kv.count("d")) p.d = static_cast<int>(detail::spec_integer(kv["d"], "d"));
        if (kv.count("amp")) p.amplitude_scale = detail::spec_number(kv["amp"], "amp");
        return make_data_nonendpoint(p);
    }
    if (kind == "endpoint") {
        auto kv = detail::spec_pairs(body, {"N", "K", "delta", "d"});
        EndpointParams p;
        if (kv.count("N")) p.N = detail::spec_integer(kv["N"], "N");
        if (kv.count("K")) p.K = static_cast<int>(detail::spec_integer(kv["K"], "K"));
        if (kv.count("delta")) p.delta = detail::spec_number(kv["delta"], "delta");
        if (kv.count("d")) p.d = static_cast<int>(detail::spec_integer(kv["d"], "d"));
        return make_data_endpoint(p);
    }
    if (kind == "cos") {
        std::optional<TrigPolynomial> u;
        for (const auto& item : detail::split(body, '+')) {
            const auto at = item.find('@');
            if (at == std::string::npos) throw ConfigError("data spec: expected amplitude@frequency, got '" + item + "'");
            const double amp = detail::spec_number(item.substr(0, at), "amplitude");
            Frequency n;
            for (const auto& c : detail::split(item.substr(at + 1), ',')) n.push_back(detail::spec_integer(c, "frequency"));
            auto term = TrigPolynomial::cosine(n, amp);
            if (u && u->dimension() != term.dimension()) throw ConfigError("data spec: frequencies differ in dimension");
            u = u ? *u + term : term;
        }
        return *u;
    }
    if (kind == "file") {
        try {
            return parse_field(read_file(body));
        } catch (const ParseError& e) {
            throw ConfigError(body + ": " + e.what());
        }
    }
    throw ConfigError("unknown data spec kind '" + kind + "'");
}

// ---- CSV -------------------------------------------------------------------

inline const char* kCsvHeader =
    "equation,N,K,s,eps,delta,t,norm_u0_Cs,p0_xi1_closed,p0_xi1_pipeline,tail_bound,lower_bound,wall_ms";

inline std::string format_g15(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

inline std::string csv_row(const InflationRecord& r) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto m = [&](double v) { return format_g15(r.ok() ? v : nan); };
    std::ostringstream os;
    os << r.equation << ',' << r.N << ',' << r.K << ',' << format_g15(r.s) << ',' << format_g15(r.eps) << ','
       << format_g15(r.delta) << ',' << m(r.t) << ',' << m(r.norm_u0_Cs) << ',' << m(r.p0_xi1_closed) << ','
       << m(r.p0_xi1_pipeline) << ',' << m(r.tail_bound) << ',' << m(r.lower_bound) << ',' << format_g15(r.wall_ms);
    return os.str();
}

inline std::string records_to_csv(const std::vector<InflationRecord>& records) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : records) out += csv_row(r) + "\n";
    return out;
}

inline double parse_csv_double(const std::string& s, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ParseError("bad number '" + s + "' on line " + std::to_string(line), line);
    return v;
}

/// Reads records written by records_to_csv (fields outside the CSV columns stay default).
inline std::vector<InflationRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("missing or unexpected CSV header", 1);
    std::vector<InflationRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 13) throw ParseError("expected 13 fields on line " + std::to_string(lineno), lineno);
        InflationRecord r;
        r.equation = f[0];
        r.N = static_cast<std::int64_t>(parse_csv_double(f[1], lineno));
        r.K = static_cast<int>(parse_csv_double(f[2], lineno));
        double* dst[] = {&r.s, &r.eps, &r.delta, &r.t, &r.norm_u0_Cs, &r.p0_xi1_closed, &r.p0_xi1_pipeline,
                         &r.tail_bound, &r.lower_bound, &r.wall_ms};
        for (std::size_t i = 0; i < 10; ++i) *dst[i] = parse_csv_double(f[i + 3], lineno);
        if (std::isnan(r.t)) r.error = "failed";
        out.push_back(std::move(r));
    }
    return out;
}

// ---- JSON ------------------------------------------------------------------

// JSON has no infinities; non-finite values are written as strings.
inline Json json_double(double v) {
    if (std::isfinite(v)) return v;
    return format_g15(v);
}

inline Json record_to_json(const InflationRecord& r) {
    Json j;
    j["experiment"] = r.experiment;
    j["equation"] = r.equation;
    j["N"] = r.N;
    j["K"] = r.K;
    j["s"] = json_double(r.s);
    j["eps"] = json_double(r.eps);
    j["delta"] = json_double(r.delta);
    j["t"] = json_double(r.t);
    j["t_below_eps"] = r.eps > 0 && r.t < r.eps;
    j["norm_u0_Cs"] = json_double(r.norm_u0_Cs);
    j["p0_xi1_closed"] = json_double(r.p0_xi1_closed);
    j["p0_xi1_pipeline"] = json_double(r.p0_xi1_pipeline);
    j["p0_xi1_signed"] = json_double(r.p0_xi1_signed);
    j["u0_sup"] = json_double(r.u0_sup);
    j["tail_bound"] = json_double(r.tail_bound);
    j["lower_bound"] = json_double(r.lower_bound);
    j["wall_ms"] = json_double(r.wall_ms);
    if (r.closed_form_only) j["closed_form_only"] = true;
    if (!r.ok()) j["error"] = r.error;
    return j;
}

inline std::string records_to_jsonl(const std::vector<InflationRecord>& records) {
    std::string out;
    for (const auto& r : records) out += record_to_json(r).dump() + "\n";
    return out;
}

inline void emit_results(const std::vector<InflationRecord>& records, const std::filesystem::path& csv_path,
                         const std::filesystem::path& jsonl_path) {
    if (!csv_path.empty()) write_text(csv_path, records_to_csv(records));
    if (!jsonl_path.empty()) write_text(jsonl_path, records_to_jsonl(records));
}

inline Json report_to_json(const ComparisonReport& r) {
    Json j;
    j["t"] = json_double(r.t);
    j["J"] = r.J;
    j["truncation"] = r.truncation;
    j["mode_count"] = r.mode_count;
    j["steps"] = r.steps;
    j["dt"] = json_double(r.dt);
    j["dt_error"] = json_double(r.dt_error);
    j["dt_converged"] = r.dt_converged;
    j["u0_sup"] = json_double(r.u0_sup);
    j["within_radius"] = r.within_radius;
    Json devs = Json::array();
    for (double d : r.deviations) devs.push_back(json_double(d));
    j["deviations"] = devs;
    j["deviation"] = json_double(r.deviation);
    j["tail_bound"] = json_double(r.tail_bound);
    j["geometric_ratio"] = json_double(r.geometric_ratio);
    j["fit_points"] = r.fit_points;
    j["pass"] = r.pass;
    return j;
}

// ---- SVG -------------------------------------------------------------------

struct PlotOptions {
    std::string x_field = "N";
    std::string y_field = "p0_xi1_pipeline";
    std::string title;
    int width = 640;
    int height = 440;
};

/// Self-contained log-log scatter with the least-squares line and its slope.
inline std::string render_plot(const std::vector<InflationRecord>& records, const PlotOptions& opt = {}) {
    std::vector<double> xs, ys;
    for (const auto& r : records) {
        if (!r.ok()) continue;
        const double x = opt.x_field == "K" ? r.K : opt.x_field == "t" ? r.t : static_cast<double>(r.N);
        double y = 0;
        if (opt.y_field == "p0_xi1_pipeline") y = r.p0_xi1_pipeline;
        else if (opt.y_field == "p0_xi1_closed") y = r.p0_xi1_closed;
        else if (opt.y_field == "norm_u0_Cs") y = r.norm_u0_Cs;
        else if (opt.y_field == "lower_bound") y = r.lower_bound;
        else throw UsageError("cannot plot field '" + opt.y_field + "'");
        if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y)) {
            xs.push_back(x);
            ys.push_back(y);
        }
    }
    const double W = opt.width, H = opt.height, ml = 70, mr = 20, mt = 40, mb = 50;
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
       << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    const std::string title = opt.title.empty() ? opt.y_field + " vs " + opt.x_field : opt.title;
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << title << "</text>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">log "
       << opt.x_field << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 "
       << H / 2 << ")\">log " << opt.y_field << "</text>\n";
    if (xs.empty()) {
        os << "</svg>\n";
        return os.str();
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        lx.push_back(std::log10(xs[i]));
        ly.push_back(std::log10(ys[i]));
    }
    auto [xmin_it, xmax_it] = std::minmax_element(lx.begin(), lx.end());
    auto [ymin_it, ymax_it] = std::minmax_element(ly.begin(), ly.end());
    double xlo = *xmin_it, xhi = *xmax_it, ylo = *ymin_it, yhi = *ymax_it;
    if (xhi - xlo < 1e-12) { xlo -= 0.5; xhi += 0.5; }
    if (yhi - ylo < 1e-12) { ylo -= 0.5; yhi += 0.5; }
    const double px = 0.05 * (xhi - xlo), py = 0.08 * (yhi - ylo);
    xlo -= px; xhi += px; ylo -= py; yhi += py;
    auto sx = [&](double v) { return ml + (v - xlo) / (xhi - xlo) * (W - ml - mr); };
    auto sy = [&](double v) { return H - mb - (v - ylo) / (yhi - ylo) * (H - mt - mb); };
    for (double tick = std::ceil(xlo); tick <= xhi; tick += 1.0)
        os << "<text x=\"" << sx(tick) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">1e"
           << tick << "</text>\n";
    for (std::size_t i = 0; i < lx.size(); ++i)
        os << "<circle cx=\"" << sx(lx[i]) << "\" cy=\"" << sy(ly[i]) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    if (xs.size() >= 2) {
        const auto fit = fit_scaling(xs, ys);
        // slope is the same in log10 coordinates; intercept converts by 1/ln 10
        const double b = fit.intercept / std::log(10.0);
        const double xa = xlo + px, xb = xhi - px;
        os << "<line class=\"fit\" x1=\"" << sx(xa) << "\" y1=\"" << sy(b + fit.slope * xa) << "\" x2=\"" << sx(xb)
           << "\" y2=\"" << sy(b + fit.slope * xb) << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
        os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 18 << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#d62728\">slope = "
           << std::setprecision(4) << fit.slope;
        if (fit.stderr_defined) os << " ± " << std::setprecision(2) << fit.stderr_slope;
        os << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline void emit_plot(const std::vector<InflationRecord>& records, const std::filesystem::path& svg_path,
                      const PlotOptions& opt = {}) {
    write_text(svg_path, render_plot(records, opt));
}

}  // namespace inflatelab
