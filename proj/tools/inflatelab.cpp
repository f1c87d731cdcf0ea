// inflatelab command-line front end.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "inflatelab/experiments.hpp"
#include "inflatelab/io.hpp"
#include "inflatelab/norms.hpp"
#include "inflatelab/oracle.hpp"
#include "inflatelab/picard.hpp"
#include "inflatelab/trees.hpp"

namespace il = inflatelab;

namespace {

int run_inflate(const std::string& experiment, const std::string& config_path, const std::string& out,
                const std::string& plot, const std::string& jsonl, bool no_timing) {
    il::ScanConfig cfg;
    if (!config_path.empty()) {
        auto j = il::parse_json_strict(il::read_file(config_path), config_path);
        if (!experiment.empty()) j["experiment"] = experiment;
        cfg = il::parse_config_json(j);
    } else {
        cfg.experiment = experiment.empty() ? "nonendpoint" : experiment;
        il::prepare_scan(cfg);
    }
    cfg.timing = !no_timing;
    std::filesystem::path out_path(out);
    il::write_text(il::config_echo_path(out_path), il::config_to_json(cfg).dump(2) + "\n");

    // Rows go to the CSV as soon as their prefix of the scan is complete.
    std::ofstream csv(out_path, std::ios::binary);
    if (!csv) throw il::ResourceError("cannot write '" + out + "'");
    csv << il::kCsvHeader << '\n' << std::flush;
    auto records = il::run_inflation_scan(cfg, [&](const il::InflationRecord& r) {
        csv << il::csv_row(r) << '\n' << std::flush;
        if (!r.ok()) std::cerr << "point N=" << r.N << " K=" << r.K << " failed: " << r.error << '\n';
    });
    csv.close();
    if (!csv) throw il::ResourceError("write failed for '" + out + "'");

    auto jsonl_path = jsonl.empty() ? std::filesystem::path(out_path).replace_extension(".jsonl") : std::filesystem::path(jsonl);
    il::write_text(jsonl_path, il::records_to_jsonl(records));

    il::PlotOptions popt;
    popt.x_field = cfg.experiment == "endpoint" ? "K" : "N";
    popt.title = cfg.experiment + " (" + cfg.effective_equation() + ")";
    if (!plot.empty()) il::emit_plot(records, plot, popt);

    std::size_t ok = 0;
    for (const auto& r : records) ok += r.ok();
    std::printf("%zu/%zu points -> %s\n", ok, records.size(), out.c_str());
    if (ok >= 2) {
        const auto fit = il::fit_scaling(records, popt.x_field, "p0_xi1_pipeline");
        std::printf("fit log|P0 Xi1| vs log %s: slope %.6f", popt.x_field.c_str(), fit.slope);
        if (fit.stderr_defined) std::printf(" +- %.2g", fit.stderr_slope);
        else std::printf(" (stderr undefined: two points)");
        std::printf("\n");
    }
    return ok == records.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inflatelab: tree-indexed Picard series and norm inflation for cubic heat-type equations"};
    app.set_version_flag("--version", std::string("inflatelab ") + INFLATELAB_VERSION);
    app.require_subcommand(1);

    // inflate
    auto* inflate = app.add_subcommand("inflate", "run an inflation scan");
    std::string experiment, config_path, out = "results.csv", plot, jsonl;
    bool no_timing = false;
    inflate->add_option("--experiment", experiment, "nonendpoint|endpoint|allen-cahn|ch-var1|ch-var2");
    inflate->add_option("--config", config_path, "JSON config file");
    inflate->add_option("--out", out, "CSV output path")->capture_default_str();
    inflate->add_option("--plot", plot, "SVG output path");
    inflate->add_option("--jsonl", jsonl, "JSONL output path (default: CSV path with .jsonl)");
    inflate->add_flag("--no-timing", no_timing, "write wall_ms as 0 for byte-stable output");

    // iterate
    auto* iterate = app.add_subcommand("iterate", "print Xi_j as a canonical field");
    std::string equation = "nlh", data;
    int generation = 1, cap = il::kDefaultEnumerationCap, dim = 1;
    double time = -1;
    iterate->add_option("--equation", equation, "equation id")->capture_default_str();
    iterate->add_option("--data", data, "initial data spec")->required();
    iterate->add_option("--generation", generation, "generation j")->capture_default_str();
    iterate->add_option("--time", time, "evaluate at this time instead of printing the symbolic field");
    iterate->add_option("--cap", cap, "generation cap")->capture_default_str();

    // trees
    auto* trees = app.add_subcommand("trees", "enumerate or count trees");
    int tree_gen = 0;
    std::string arity = "3";
    bool count_only = false;
    trees->add_option("--generation", tree_gen, "generation j")->required();
    trees->add_option("--arity", arity, "3 or 13")->check(CLI::IsMember({"3", "13"}))->capture_default_str();
    trees->add_flag("--count-only", count_only, "print the count only");
    trees->add_option("--cap", cap, "enumeration cap")->capture_default_str();

    // norm
    auto* norm = app.add_subcommand("norm", "Besov norm of static data");
    double s = 0, p = il::kInfinity, q = il::kInfinity;
    norm->add_option("--s", s, "regularity")->required();
    norm->add_option("--p", p, "integrability (default inf)");
    norm->add_option("--q", q, "summability (default inf)");
    norm->add_option("--data", data, "data spec")->required();

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Galerkin oracle, optionally compared with the series");
    double t_end = 0.1, dt = 0, c0 = 6.75, tol = 1e-8;
    int truncation = 0, compare_J = -1;
    oracle->add_option("--equation", equation, "equation id")->capture_default_str();
    oracle->add_option("--data", data, "initial data spec")->required();
    oracle->add_option("--t-end", t_end, "final time")->capture_default_str();
    oracle->add_option("--dt", dt, "time step (default 1e-5 t_end; initial step for --compare-J)");
    oracle->add_option("--truncation", truncation, "mode truncation M (default from data)");
    oracle->add_option("--compare-J", compare_J, "compare with partial sums up to J");
    oracle->add_option("--C0", c0, "constant in the radius check")->capture_default_str();
    oracle->add_option("--tol", tol, "Richardson self-consistency target for --compare-J")->capture_default_str();

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "log-log plot from a results CSV");
    std::string in_csv, svg_out = "plot.svg", x_field = "N", y_field = "p0_xi1_pipeline";
    plot_cmd->add_option("--in", in_csv, "results CSV")->required();
    plot_cmd->add_option("--out", svg_out, "SVG output")->capture_default_str();
    plot_cmd->add_option("--x", x_field, "N|K|t")->capture_default_str();
    plot_cmd->add_option("--y", y_field, "p0_xi1_pipeline|p0_xi1_closed|norm_u0_Cs|lower_bound")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(il::ExitCode::config_error);
    }

    try {
        if (*inflate) return run_inflate(experiment, config_path, out, plot, jsonl, no_timing);
        if (*iterate) {
            const auto u0 = il::parse_data_spec(data);
            dim = u0.dimension();
            il::PicardExpansion expansion(u0, il::make_equation(equation, dim), cap);
            const auto& x = expansion.xi(generation);
            std::cout << il::serialize_field(time >= 0 ? il::evaluate_at(x, time) : x);
            return 0;
        }
        if (*trees) {
            const auto a = arity == "3" ? il::AritySet::ternary : il::AritySet::unary_ternary;
            if (count_only) {
                std::cout << il::count(tree_gen, a) << '\n';
                return 0;
            }
            for (const auto& t : il::enumerate(tree_gen, a, cap)) std::cout << il::serialize(t) << '\n';
            return 0;
        }
        if (*norm) {
            const auto u0 = il::parse_data_spec(data);
            const auto est = il::besov_norm(u0, {s, p, q});
            std::printf("%.15g %.3g\n", est.value, est.error_bound);
            return 0;
        }
        if (*oracle) {
            const auto u0 = il::parse_data_spec(data);
            const auto eq = il::make_equation(equation, u0.dimension());
            il::OracleOptions opt;
            opt.dt = dt;
            opt.truncation = truncation;
            opt.c0 = c0;
            if (compare_J >= 0) {
                opt.J_hint = compare_J;
                const auto r = il::compare_with_series(u0, eq, t_end, compare_J, opt, tol);
                std::cout << il::report_to_json(r).dump(2) << '\n';
                return r.pass ? 0 : 1;
            }
            const auto u = il::integrate(u0, eq, t_end, opt);
            il::Json j;
            j["t_end"] = t_end;
            j["dt"] = dt > 0 ? dt : 1e-5 * t_end;
            j["field"] = il::serialize_field(u);
            std::cout << j.dump(2) << '\n';
            return 0;
        }
        if (*plot_cmd) {
            const auto records = il::records_from_csv(il::read_file(in_csv));
            il::PlotOptions popt;
            popt.x_field = x_field;
            popt.y_field = y_field;
            il::emit_plot(records, svg_out, popt);
            return 0;
        }
    } catch (const il::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(il::ExitCode::failure);
    }
    return 0;
}
