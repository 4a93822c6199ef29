// Command-line surface: single-metric evaluation, sweeps with CSV/JSON
// output, Monte Carlo simulation and validation, truncation reports, and the
// product-integral figure analysis.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mftr/sweep.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string report_path;
    std::int64_t samples = -1;
    std::int64_t seed = -1;
    std::string trunc;
    bool no_mc = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "scenario config (JSON)");
    if (needs_config) c->required();
    cmd->add_option("--out", opts.out_path, "CSV output path");
    cmd->add_option("--report", opts.report_path, "JSON run-report path");
    cmd->add_option("--samples", opts.samples, "Monte Carlo samples per point");
    cmd->add_option("--seed", opts.seed, "Monte Carlo seed");
    cmd->add_option("--trunc", opts.trunc, "truncation: T (fixed) or auto:TOL");
    cmd->add_flag("--no-mc", opts.no_mc, "disable Monte Carlo columns");
}

mftr::RunConfig load(const CommonOpts& opts) {
    mftr::RunConfig cfg = mftr::parse_config(read_file(opts.config_path));
    if (opts.samples >= 0) cfg.sampler.samples = opts.samples;
    if (opts.seed >= 0) cfg.sampler.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.no_mc) cfg.mc_enabled = false;
    if (!opts.trunc.empty()) {
        if (opts.trunc.rfind("auto", 0) == 0) {
            cfg.trunc.mode = mftr::TruncationSetting::Mode::automatic;
            const auto colon = opts.trunc.find(':');
            if (colon != std::string::npos)
                cfg.trunc.target = std::stod(opts.trunc.substr(colon + 1));
        } else {
            cfg.trunc.mode = mftr::TruncationSetting::Mode::fixed;
            cfg.trunc.T = std::stoi(opts.trunc);
        }
    }
    return cfg;
}

void emit_report(const CommonOpts& opts, const mftr::RunReport& report) {
    if (!opts.report_path.empty())
        mftr::write_file(opts.report_path, mftr::report_to_json(report).dump(2) + "\n");
}

// Single-point run (ignores any sweep section in the config).
mftr::RunReport run_single(mftr::RunConfig cfg) {
    cfg.sweep.reset();
    return mftr::run_sweep(cfg);
}

int print_metrics(const CommonOpts& opts, const std::vector<std::string>& keys) {
    mftr::RunConfig cfg = load(opts);
    const mftr::RunReport report = run_single(cfg);
    const mftr::json row = mftr::report_to_json(report)["rows"][0];
    mftr::json out;
    for (const auto& k : keys)
        if (row.contains(k)) out[k] = row[k];
    if (row.contains("mc") && cfg.mc_enabled) out["mc"] = row["mc"];
    out["status"] = row["status"];
    std::cout << out.dump(2) << "\n";
    emit_report(opts, report);
    return row["status"] == "ok" ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partial-secrecy metrics for MRC wiretap systems over MFTR fading"};
    app.require_subcommand(1);

    CommonOpts o_gsop, o_afe, o_ailr, o_sop, o_sweep, o_sim, o_val, o_trunc, o_fig5;

    auto* c_gsop = app.add_subcommand("gsop", "generalized secrecy outage probability");
    add_common(c_gsop, o_gsop);
    auto* c_afe = app.add_subcommand("afe", "average fractional equivocation");
    add_common(c_afe, o_afe);
    auto* c_ailr = app.add_subcommand("ailr", "average information leakage rate");
    add_common(c_ailr, o_ailr);
    auto* c_sop = app.add_subcommand("sop", "classical SOP (theta = 1) with product-integral cross-check");
    add_common(c_sop, o_sop);
    auto* c_sweep = app.add_subcommand("sweep", "evaluate the configured sweep; CSV + report");
    add_common(c_sweep, o_sweep);
    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo estimates only");
    add_common(c_sim, o_sim);
    auto* c_val = app.add_subcommand("validate", "analytic vs Monte Carlo at 3 standard errors");
    add_common(c_val, o_val);
    auto* c_trunc = app.add_subcommand("truncation-report", "ratio-bound report at T or auto:TOL");
    add_common(c_trunc, o_trunc);
    auto* c_fig5 = app.add_subcommand("fig5", "CDF/PDF product curves and cumulative area");
    add_common(c_fig5, o_fig5);
    double fig5_zmax = 0.0;
    int fig5_points = 2001;
    c_fig5->add_option("--zmax", fig5_zmax, "grid upper limit (default: auto)");
    c_fig5->add_option("--points", fig5_points, "grid size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_gsop->parsed())
            return print_metrics(o_gsop, {"gsop_exact", "gsop_approx", "gsop_asymptotic"});
        if (c_afe->parsed()) return print_metrics(o_afe, {"afe_exact", "afe_approx"});
        if (c_ailr->parsed()) return print_metrics(o_ailr, {"ailr_exact", "ailr_approx"});

        if (c_sop->parsed()) {
            mftr::RunConfig cfg = load(o_sop);
            cfg.scenario.theta = 1.0;
            cfg.sweep.reset();
            mftr::RunReport report = run_single(cfg);
            const auto& row = report.rows.at(0);
            mftr::json out{{"sop_exact", row.metrics.gsop_exact
                                             ? mftr::metric_to_json(*row.metrics.gsop_exact)
                                             : mftr::json()},
                           {"status", row.metrics.status}};
            if (row.metrics.status == "ok") {
                const int T = row.metrics.gsop_exact->T_used;
                const auto caches = mftr::build_caches(cfg.scenario, T);
                out["sop_product_integral"] = mftr::metric_to_json(
                    mftr::sop_product_integral(cfg.scenario, caches.bob, caches.eve));
            }
            if (row.metrics.mc) out["mc_sop"] = mftr::metric_to_json(row.metrics.mc->sop);
            std::cout << out.dump(2) << "\n";
            emit_report(o_sop, report);
            return row.metrics.status == "ok" ? 0 : 1;
        }

        if (c_sweep->parsed()) {
            mftr::RunConfig cfg = load(o_sweep);
            mftr::RunReport report = mftr::run_sweep(cfg);
            const std::string csv = mftr::to_csv(report);
            if (!o_sweep.out_path.empty())
                mftr::write_file(o_sweep.out_path, csv);
            else
                std::cout << csv;
            emit_report(o_sweep, report);
            return 0;
        }

        if (c_sim->parsed()) {
            mftr::RunConfig cfg = load(o_sim);
            const mftr::McEstimates est = mftr::estimate_metrics(cfg.scenario, cfg.sampler);
            mftr::json out{{"gsop", mftr::metric_to_json(est.gsop)},
                           {"afe", mftr::metric_to_json(est.afe)},
                           {"ailr", mftr::metric_to_json(est.ailr)},
                           {"sop", mftr::metric_to_json(est.sop)},
                           {"samples", est.samples}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }

        if (c_val->parsed()) {
            mftr::RunConfig cfg = load(o_val);
            mftr::RunReport report = mftr::validate(cfg);
            if (!o_val.out_path.empty()) mftr::write_file(o_val.out_path, mftr::to_csv(report));
            emit_report(o_val, report);
            std::cout << "verdict: " << report.verdict << " (" << report.flags << " flagged of "
                      << report.rows.size() << " points)\n";
            return report.verdict == "pass" ? 0 : 1;
        }

        if (c_trunc->parsed()) {
            mftr::RunConfig cfg = load(o_trunc);
            const mftr::SecrecyScenario& sc = cfg.scenario;
            int T = cfg.trunc.T;
            auto caches = mftr::build_caches(sc, T + 2);
            if (cfg.trunc.mode == mftr::TruncationSetting::Mode::automatic) {
                T = mftr::choose_truncation(sc, caches.bob, caches.eve, cfg.trunc.target,
                                            {.T_max = 2048});
                caches.eve = caches.eve.extended(T + 2);
            }
            const mftr::TruncationReport rep = mftr::ratio_bound(sc, caches.bob, caches.eve, T);
            std::cout << mftr::truncation_to_json(rep).dump(2) << "\n";
            return 0;
        }

        if (c_fig5->parsed()) {
            mftr::RunConfig cfg = load(o_fig5);
            if (cfg.scenario.theta != 1.0)
                throw std::invalid_argument("fig5: requires a theta = 1 scenario");
            const int T = cfg.trunc.mode == mftr::TruncationSetting::Mode::fixed ? cfg.trunc.T : 400;
            const auto caches = mftr::build_caches(cfg.scenario, T);
            double zmax = fig5_zmax;
            if (zmax <= 0.0) {
                // cover the shifted Eve density support until its tail mass is negligible
                zmax = std::exp2(cfg.scenario.rs) *
                           (1.0 + 40.0 * cfg.scenario.eve.L * cfg.scenario.eve.gamma_bar) -
                       1.0;
            }
            const auto rows = mftr::figure5_analysis(cfg.scenario, caches.bob, caches.eve,
                                                     zmax, fig5_points);
            const std::string csv = mftr::fig5_to_csv(rows);
            if (!o_fig5.out_path.empty())
                mftr::write_file(o_fig5.out_path, csv);
            else
                std::cout << csv;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
