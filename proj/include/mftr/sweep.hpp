#pragma once

// Sweep orchestration: grid construction from a SweepSpec, per-point metric
// evaluation under the configured truncation policy, CSV and JSON report
// emission, the product-integral figure analysis, and the Monte Carlo
// validation gate.

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mftr/monte_carlo.hpp"
#include "mftr/parallel.hpp"
#include "mftr/scenario_io.hpp"
#include "mftr/series_control.hpp"

namespace mftr {

struct PointMetrics {
    std::optional<MetricResult> gsop_exact, gsop_approx, gsop_asymptotic;
    std::optional<MetricResult> afe_exact, afe_approx, ailr_exact, ailr_approx;
    std::optional<TruncationReport> truncation;
    std::optional<McEstimates> mc;
    std::string status = "ok";
};

struct SweepRow {
    std::string overlay;
    SecrecyScenario scenario;
    PointMetrics metrics;
};

struct RunReport {
    RunConfig config;
    std::vector<SweepRow> rows;
    double analytic_seconds = 0.0;
    double mc_seconds = 0.0;
    double total_seconds = 0.0;
    std::string verdict = "n/a";
    int flags = 0;  // validate: points failing the 3-sigma gate
};

// Evaluates metrics for successive points of one overlay, reusing and
// extending the coefficient caches (omega/phi depend only on the fading
// parameters and L, never on the swept SNR/rate/threshold).
class PointEvaluator {
  public:
    PointEvaluator(const SecrecyScenario& base, const TruncationSetting& trunc)
        : base_(base), trunc_(trunc) {}

    PointMetrics evaluate(const SecrecyScenario& sc, bool with_mc,
                          const SamplerConfig& sampler) {
        PointMetrics out;
        try {
            evaluate_analytic(sc, out);
        } catch (const std::exception& e) {
            out.status = e.what();
            return out;
        }
        if (with_mc) {
            auto mc_sc = sc;
            out.mc = estimate_metrics(mc_sc, sampler);
        }
        return out;
    }

  private:
    void ensure_caches(const SecrecyScenario& sc, int T) {
        if (!have_caches_) {
            bob_ = SeriesCache(sc.bob, T);
            eve_ = SeriesCache(sc.eve, T);
            have_caches_ = true;
            return;
        }
        if (bob_.T() < T) bob_ = bob_.extended(T);
        if (eve_.T() < T) eve_ = eve_.extended(T);
    }

    struct Snapshot {
        double gsop, afe;
        PointMetrics m;
    };

    Snapshot evaluate_at(const SecrecyScenario& sc, int T) {
        ensure_caches(sc, T);
        // rebind rho to this point's SNRs and truncate the shared
        // coefficients to exactly T
        SeriesCache bob = bob_.with_gamma_bar(sc.bob.gamma_bar).truncated(T);
        SeriesCache eve = eve_.with_gamma_bar(sc.eve.gamma_bar).truncated(T);
        Snapshot s;
        s.m.gsop_exact = gsop_exact(sc, bob, eve);
        s.m.gsop_approx = gsop_approx(sc, bob, eve);
        s.m.gsop_asymptotic = gsop_asymptotic(sc, bob, eve);
        const EquivocationResult eq = exact_equivocation(sc, bob, eve);
        s.m.afe_exact = eq.afe;
        s.m.ailr_exact = eq.ailr;
        const ApproxEquivocationResult aeq = approx_equivocation(sc, bob, eve);
        s.m.afe_approx = aeq.afe;
        s.m.ailr_approx = aeq.ailr;
        s.gsop = s.m.gsop_exact->value;
        s.afe = s.m.afe_exact->value;
        return s;
    }

    void attach_bound(const SecrecyScenario& sc, int T, PointMetrics& out) {
        if (eve_.T() < T + 2) eve_ = eve_.extended(T + 2);
        SeriesCache bob = bob_.with_gamma_bar(sc.bob.gamma_bar);
        SeriesCache eve = eve_.with_gamma_bar(sc.eve.gamma_bar);
        out.truncation = ratio_bound(sc, bob, eve, T);
    }

    void evaluate_analytic(const SecrecyScenario& sc, PointMetrics& out) {
        if (trunc_.mode == TruncationSetting::Mode::fixed) {
            Snapshot s = evaluate_at(sc, trunc_.T);
            out = std::move(s.m);
            attach_bound(sc, trunc_.T, out);
            set_T(out, trunc_.T);
            return;
        }
        // automatic: double T until both headline metrics stabilize
        int T = std::max(50, last_T_ / 2);
        Snapshot prev = evaluate_at(sc, T);
        for (;;) {
            const int T2 = 2 * T;
            if (T2 > trunc_.T_max) {
                out = std::move(prev.m);
                out.status = "truncation budget exceeded (T_max=" +
                             std::to_string(trunc_.T_max) + ")";
                set_T(out, T);
                attach_bound(sc, T, out);
                return;
            }
            Snapshot cur = evaluate_at(sc, T2);
            const double d_gsop = std::abs(cur.gsop - prev.gsop);
            const double d_afe = std::abs(cur.afe - prev.afe);
            const bool ok_gsop =
                d_gsop <= std::max(trunc_.target, 1e-4 * std::abs(cur.gsop));
            const bool ok_afe = d_afe <= std::max(trunc_.target, 1e-4);
            if (ok_gsop && ok_afe) {
                cur.m.gsop_exact->error_estimate = d_gsop;
                cur.m.afe_exact->error_estimate = d_afe;
                cur.m.ailr_exact->error_estimate = d_afe * sc.rs;
                out = std::move(cur.m);
                set_T(out, T2);
                attach_bound(sc, T2, out);
                last_T_ = T2;
                return;
            }
            prev = std::move(cur);
            T = T2;
        }
    }

    static void set_T(PointMetrics& m, int T) {
        for (auto* r : {&m.gsop_exact, &m.gsop_approx, &m.gsop_asymptotic, &m.afe_exact,
                        &m.afe_approx, &m.ailr_exact, &m.ailr_approx})
            if (*r) (*r)->T_used = T;
    }

    SecrecyScenario base_;
    TruncationSetting trunc_;
    SeriesCache bob_, eve_;
    bool have_caches_ = false;
    int last_T_ = 100;
};

// One row per (overlay, x), overlays in config order, x ascending.
inline RunReport run_sweep(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.config = cfg;

    SweepSpec spec;
    if (cfg.sweep) {
        spec = *cfg.sweep;
    } else {
        spec.overlays.push_back({"base", {}});
        spec.start = spec.stop = 0.0;
        spec.step = 1.0;
        // single point at the scenario's own values
    }
    const std::vector<double> xs = cfg.sweep ? spec.grid() : std::vector<double>{0.0};

    std::vector<std::vector<SweepRow>> per_overlay(spec.overlays.size());
    parallel_for(static_cast<std::int64_t>(spec.overlays.size()), [&](std::int64_t oi) {
        const Overlay& ov = spec.overlays[static_cast<std::size_t>(oi)];
        SecrecyScenario base = scenario_with_overrides(cfg.scenario, ov);
        PointEvaluator eval(base, cfg.trunc);
        for (double x : xs) {
            SecrecyScenario sc = base;
            if (cfg.sweep) set_sweep_variable(sc, spec.variable, x);
            SweepRow row;
            row.overlay = ov.name;
            row.scenario = sc;
            row.metrics = eval.evaluate(sc, cfg.mc_enabled, cfg.sampler);
            per_overlay[static_cast<std::size_t>(oi)].push_back(std::move(row));
        }
    });
    for (auto& rows : per_overlay)
        for (auto& r : rows) report.rows.push_back(std::move(r));

    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// ---------------------------------------------------------------------------
// CSV emission

namespace detail {

inline void csv_cell(std::string& out, const std::optional<MetricResult>& m) {
    out += ',';
    if (m) out += format_double(m->value);
}

}  // namespace detail

inline std::string to_csv(const RunReport& report) {
    std::string out =
        "gamma_b_db,gamma_e_db,rs,theta,gsop_exact,gsop_approx,gsop_asymptotic,"
        "afe_exact,afe_approx,ailr_exact,ailr_approx,trunc_T,trunc_bound";
    const bool mc = report.config.mc_enabled;
    if (mc) out += ",mc_gsop,mc_afe,mc_ailr,mc_se_gsop,mc_se_afe,mc_se_ailr";
    out += ",status\n";
    for (const SweepRow& row : report.rows) {
        const auto& m = row.metrics;
        out += format_double(linear_to_db(row.scenario.bob.gamma_bar));
        out += ',';
        out += format_double(linear_to_db(row.scenario.eve.gamma_bar));
        out += ',';
        out += format_double(row.scenario.rs);
        out += ',';
        out += format_double(row.scenario.theta);
        detail::csv_cell(out, m.gsop_exact);
        detail::csv_cell(out, m.gsop_approx);
        detail::csv_cell(out, m.gsop_asymptotic);
        detail::csv_cell(out, m.afe_exact);
        detail::csv_cell(out, m.afe_approx);
        detail::csv_cell(out, m.ailr_exact);
        detail::csv_cell(out, m.ailr_approx);
        out += ',';
        if (m.gsop_exact) out += std::to_string(m.gsop_exact->T_used);
        out += ',';
        if (m.truncation && m.truncation->bound) out += format_double(*m.truncation->bound);
        if (mc) {
            auto mc_cell = [&](const MetricResult& r, bool se) {
                out += ',';
                out += format_double(se ? r.error_estimate.value_or(0.0) : r.value);
            };
            if (m.mc) {
                mc_cell(m.mc->gsop, false);
                mc_cell(m.mc->afe, false);
                mc_cell(m.mc->ailr, false);
                mc_cell(m.mc->gsop, true);
                mc_cell(m.mc->afe, true);
                mc_cell(m.mc->ailr, true);
            } else {
                out += ",,,,,,";
            }
        }
        out += ',';
        out += (m.status == "ok") ? "ok" : m.status;
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON report

inline json metric_to_json(const MetricResult& m) {
    json j{{"value", m.value}, {"method", method_name(m.method)}, {"T_used", m.T_used}};
    if (m.error_estimate) j["error_estimate"] = *m.error_estimate;
    return j;
}

inline json truncation_to_json(const TruncationReport& t) {
    json j{{"T", t.T}, {"a_next", t.a_next}};
    j["ratio"] = t.ratio ? json(*t.ratio) : json();
    j["bound"] = t.bound ? json(*t.bound) : json();
    j["stabilized_at"] = t.stabilized_at ? json(*t.stabilized_at) : json();
    return j;
}

inline json report_to_json(const RunReport& report) {
    json rows = json::array();
    json truncs = json::array();
    for (const SweepRow& row : report.rows) {
        const auto& m = row.metrics;
        json r{{"overlay", row.overlay},
               {"gamma_b_db", linear_to_db(row.scenario.bob.gamma_bar)},
               {"gamma_e_db", linear_to_db(row.scenario.eve.gamma_bar)},
               {"rs", row.scenario.rs},
               {"theta", row.scenario.theta},
               {"status", m.status}};
        auto put = [&r](const char* key, const std::optional<MetricResult>& v) {
            if (v) r[key] = metric_to_json(*v);
        };
        put("gsop_exact", m.gsop_exact);
        put("gsop_approx", m.gsop_approx);
        put("gsop_asymptotic", m.gsop_asymptotic);
        put("afe_exact", m.afe_exact);
        put("afe_approx", m.afe_approx);
        put("ailr_exact", m.ailr_exact);
        put("ailr_approx", m.ailr_approx);
        if (m.mc) {
            r["mc"] = json{{"gsop", metric_to_json(m.mc->gsop)},
                           {"afe", metric_to_json(m.mc->afe)},
                           {"ailr", metric_to_json(m.mc->ailr)},
                           {"sop", metric_to_json(m.mc->sop)},
                           {"samples", m.mc->samples}};
        }
        rows.push_back(std::move(r));
        if (m.truncation) {
            json t = truncation_to_json(*m.truncation);
            t["overlay"] = row.overlay;
            truncs.push_back(std::move(t));
        }
    }
    json sweep = json();
    if (report.config.sweep) {
        const SweepSpec& s = *report.config.sweep;
        json overlays = json::array();
        for (const auto& ov : s.overlays) overlays.push_back(ov.name);
        sweep = json{{"variable", sweep_variable_name(s.variable)},
                     {"start", s.start},
                     {"stop", s.stop},
                     {"step", s.step},
                     {"overlays", overlays}};
    }
    return json{{"scenario",
                 json{{"bob", link_to_json(report.config.scenario.bob)},
                      {"eve", link_to_json(report.config.scenario.eve)},
                      {"rs", report.config.scenario.rs},
                      {"theta", report.config.scenario.theta}}},
                {"sweep", sweep},
                {"rows", rows},
                {"truncation", truncs},
                {"timings", json{{"total_seconds", report.total_seconds},
                                 {"analytic_seconds", report.analytic_seconds},
                                 {"mc_seconds", report.mc_seconds}}},
                {"verdict", report.verdict}};
}

// ---------------------------------------------------------------------------
// Product-integral figure analysis (theta = 1 semantics)

struct Fig5Row {
    double z, cdf_bob, pdf_eve_eq, product, cumulative_area;
};

inline std::vector<Fig5Row> figure5_analysis(const SecrecyScenario& sc,
                                             const SeriesCache& bob, const SeriesCache& eve,
                                             double z_max, int points) {
    if (points < 3) throw std::invalid_argument("figure5_analysis: need at least 3 points");
    std::vector<Fig5Row> rows(static_cast<std::size_t>(points));
    const double h = z_max / (points - 1);
    double area = 0.0;
    double prev = 0.0;
    for (int k = 0; k < points; ++k) {
        const double z = k * h;
        Fig5Row& r = rows[static_cast<std::size_t>(k)];
        r.z = z;
        r.cdf_bob = mrc_snr_cdf(bob, z);
        r.pdf_eve_eq = eve_eq_pdf(eve, sc.rs, z);
        r.product = r.cdf_bob * r.pdf_eve_eq;
        if (k > 0) area += 0.5 * h * (prev + r.product);
        r.cumulative_area = area;
        prev = r.product;
    }
    return rows;
}

inline std::string fig5_to_csv(const std::vector<Fig5Row>& rows) {
    std::string out = "z,cdf_bob,pdf_eve_eq,product,cumulative_area\n";
    for (const Fig5Row& r : rows) {
        out += format_double(r.z);
        out += ',';
        out += format_double(r.cdf_bob);
        out += ',';
        out += format_double(r.pdf_eve_eq);
        out += ',';
        out += format_double(r.product);
        out += ',';
        out += format_double(r.cumulative_area);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation gate: analytic vs Monte Carlo at 3 standard errors, plus the
// theta=1 product-integral equivalence.

inline RunReport validate(RunConfig cfg) {
    cfg.mc_enabled = true;
    RunReport report = run_sweep(cfg);
    int flags = 0;
    for (SweepRow& row : report.rows) {
        PointMetrics& m = row.metrics;
        if (m.status != "ok" || !m.mc) {
            ++flags;
            continue;
        }
        auto check = [&](const std::optional<MetricResult>& analytic, const MetricResult& mc) {
            if (!analytic) return;
            const double se = mc.error_estimate.value_or(0.0);
            if (std::abs(analytic->value - mc.value) > 3.0 * se) {
                ++flags;
                m.status = "3-sigma flag";
            }
        };
        check(m.gsop_exact, m.mc->gsop);
        check(m.afe_exact, m.mc->afe);
        check(m.ailr_exact, m.mc->ailr);
        // theta = 1 route equivalence on this point's parameters
        SecrecyScenario sop_sc = row.scenario;
        sop_sc.theta = 1.0;
        const int T = m.gsop_exact ? m.gsop_exact->T_used : cfg.trunc.T;
        const CachePair caches = build_caches(sop_sc, T);
        const double lhs = gsop_exact(sop_sc, caches.bob, caches.eve).value;
        const double rhs = sop_product_integral(sop_sc, caches.bob, caches.eve).value;
        if (std::abs(lhs - rhs) > 1e-6) {
            ++flags;
            m.status = "product-integral mismatch";
        }
    }
    report.flags = flags;
    report.verdict = flags == 0 ? "pass" : "fail";
    return report;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

}  // namespace mftr
