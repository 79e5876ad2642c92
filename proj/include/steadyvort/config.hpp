#pragma once

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "steadyvort/diagnostics.hpp"
#include "steadyvort/io.hpp"

namespace steadyvort {

// Background-flow source description as it appears in configs.
struct QSpec {
    enum class Source { analytic, flux, dirichlet };
    Source source = Source::analytic;
    std::string name = "x1";        // analytic function, or a named flux
    std::vector<double> table_s;    // arclength fractions in [0,1]
    std::vector<double> table_v;
    double shift = 0.0;
};

enum class RunMode { single, sweep, multi, multi_sweep };

struct RunConfig {
    RunMode mode = RunMode::single;
    DomainSpec domain;
    QSpec q;
    Profile profile = Profile::power(1.0);
    StrengthSchedule schedule = StrengthSchedule::constant(1.0);
    double kappa = 0.0;
    std::vector<double> sweep_kappas;
    std::vector<SiteSetup> sites;
    double alpha = 0.0;
    std::vector<double> sweep_scales;
    SolverControls controls;
    SweepOptions diag;
    std::string output_dir = ".";
    bool parallel_sweep = false;
};

namespace detail {

inline int edit_distance(const std::string& a, const std::string& b) {
    std::vector<int> row(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
    for (size_t i = 1; i <= a.size(); ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (size_t j = 1; j <= b.size(); ++j) {
            int ins = std::min(row[j], row[j - 1]) + 1;
            int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min(ins, sub);
        }
    }
    return row[b.size()];
}

inline void reject_unknown_keys(const nlohmann::json& j, const char* ctx,
                                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        bool known = false;
        for (const char* a : allowed)
            if (key == a) { known = true; break; }
        if (known) continue;
        std::string msg =
            "unknown key '" + key + "' in " + ctx;
        int best = 1 + static_cast<int>(key.size()) / 3;
        const char* hint = nullptr;
        for (const char* a : allowed) {
            int dd = edit_distance(key, a);
            if (dd <= best) { best = dd; hint = a; }
        }
        if (hint) msg += "; did you mean '" + std::string(hint) + "'?";
        throw ParseError(msg);
    }
}

inline const nlohmann::json* find_key(const nlohmann::json& j,
                                      const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline double num_at(const nlohmann::json& j, const char* key,
                     const char* ctx) {
    const auto* v = find_key(j, key);
    if (!v || !v->is_number())
        throw ParseError(std::string(ctx) + "." + key + " must be a number");
    return v->get<double>();
}

inline std::string str_at(const nlohmann::json& j, const char* key,
                          const char* ctx) {
    const auto* v = find_key(j, key);
    if (!v || !v->is_string())
        throw ParseError(std::string(ctx) + "." + key + " must be a string");
    return v->get<std::string>();
}

inline std::vector<double> num_array_at(const nlohmann::json& j,
                                        const char* key, const char* ctx) {
    const auto* v = find_key(j, key);
    if (!v || !v->is_array())
        throw ParseError(std::string(ctx) + "." + key + " must be an array");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number())
            throw ParseError(std::string(ctx) + "." + key +
                             " must hold numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

inline Profile parse_profile(const nlohmann::json& j, const char* ctx,
                             std::vector<std::string>& issues) {
    reject_unknown_keys(j, ctx, {"kind", "p", "s", "f"});
    std::string kind = str_at(j, "kind", ctx);
    try {
        if (kind == "power") return Profile::power(num_at(j, "p", ctx));
        if (kind == "table")
            return Profile::tabulated(num_array_at(j, "s", ctx),
                                      num_array_at(j, "f", ctx));
        throw ParseError(std::string(ctx) +
                         ".kind must be 'power' or 'table'");
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        issues.push_back(std::string(ctx) + ": " + e.what());
        return Profile::power(1.0);
    }
}

inline StrengthSchedule parse_schedule(const nlohmann::json& j,
                                       const char* ctx,
                                       std::vector<std::string>& issues) {
    reject_unknown_keys(j, ctx, {"kind", "a", "beta"});
    std::string kind = str_at(j, "kind", ctx);
    try {
        if (kind == "constant")
            return StrengthSchedule::constant(num_at(j, "a", ctx));
        if (kind == "power") {
            double beta = num_at(j, "beta", ctx);
            if (!(beta >= 0.0) || !(beta < 1.0))
                issues.push_back(std::string(ctx) +
                                 ": beta must lie in [0,1) for solver runs");
            return StrengthSchedule::power(num_at(j, "a", ctx), beta);
        }
        throw ParseError(std::string(ctx) +
                         ".kind must be 'constant' or 'power'");
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        issues.push_back(std::string(ctx) + ": " + e.what());
        return StrengthSchedule::constant(1.0);
    }
}

} // namespace detail

// Builds the background flow a config asks for. Flux and Dirichlet tables
// are piecewise linear in the arclength fraction s/perimeter.
inline BackgroundFlow make_background(const EllipticSolver& solver,
                                      const QSpec& spec) {
    const Domain& d = solver.domain();
    BackgroundFlow q;
    auto table_values = [&]() {
        std::vector<double> vals(d.boundary.size());
        for (size_t k = 0; k < d.boundary.size(); ++k) {
            double t = d.boundary[k].s / d.perimeter;
            auto hi = std::upper_bound(spec.table_s.begin(),
                                       spec.table_s.end(), t);
            if (hi == spec.table_s.begin())
                vals[k] = spec.table_v.front();
            else if (hi == spec.table_s.end())
                vals[k] = spec.table_v.back();
            else {
                size_t u = hi - spec.table_s.begin();
                double w = (t - spec.table_s[u - 1]) /
                           (spec.table_s[u] - spec.table_s[u - 1]);
                vals[k] = spec.table_v[u - 1] +
                          w * (spec.table_v[u] - spec.table_v[u - 1]);
            }
        }
        return vals;
    };
    switch (spec.source) {
    case QSpec::Source::analytic:
        q = make_analytic_q(d, spec.name);
        break;
    case QSpec::Source::flux: {
        BoundaryFlux flux;
        if (!spec.table_s.empty()) {
            flux.g = table_values();
        } else if (spec.name == "neg_sin_theta") {
            if (d.kind != DomainKind::disk)
                throw InvalidSpec("flux 'neg_sin_theta' needs the unit disk");
            flux.g.resize(d.boundary.size());
            for (size_t k = 0; k < d.boundary.size(); ++k)
                flux.g[k] = -d.boundary[k].pos.y;
        } else {
            throw InvalidSpec("unknown named flux '" + spec.name + "'");
        }
        q = make_flux_q(solver, flux);
        break;
    }
    case QSpec::Source::dirichlet:
        if (spec.table_s.empty())
            throw InvalidSpec("dirichlet source needs a table");
        q = make_dirichlet_q(solver, table_values());
        break;
    }
    if (spec.shift != 0.0) q.shift(spec.shift);
    return q;
}

namespace detail {

inline QSpec parse_q(const nlohmann::json& j,
                     std::vector<std::string>& issues) {
    reject_unknown_keys(j, "q", {"source", "name", "table", "shift"});
    QSpec q;
    std::string source = find_key(j, "source")
                             ? str_at(j, "source", "q")
                             : std::string("analytic");
    if (source == "analytic")
        q.source = QSpec::Source::analytic;
    else if (source == "flux")
        q.source = QSpec::Source::flux;
    else if (source == "dirichlet")
        q.source = QSpec::Source::dirichlet;
    else
        throw ParseError("q.source must be analytic, flux, or dirichlet");
    if (find_key(j, "name")) q.name = str_at(j, "name", "q");
    if (find_key(j, "shift")) q.shift = num_at(j, "shift", "q");
    if (const auto* t = find_key(j, "table")) {
        reject_unknown_keys(*t, "q.table", {"s", "value"});
        q.table_s = num_array_at(*t, "s", "q.table");
        q.table_v = num_array_at(*t, "value", "q.table");
        if (q.table_s.size() != q.table_v.size() || q.table_s.size() < 2)
            issues.push_back("q.table needs two equal columns, >= 2 rows");
        for (size_t k = 0; k < q.table_s.size(); ++k) {
            if (q.table_s[k] < 0.0 || q.table_s[k] > 1.0)
                issues.push_back("q.table.s must be arclength fractions in [0,1]");
            if (k > 0 && q.table_s[k] <= q.table_s[k - 1])
                issues.push_back("q.table.s must be strictly increasing");
        }
    }
    if (q.source == QSpec::Source::analytic) {
        try {
            analytic_q_function(q.name);
        } catch (const Error& e) {
            issues.push_back(e.what());
        }
    }
    if (q.source != QSpec::Source::analytic && q.table_s.empty() &&
        q.source == QSpec::Source::dirichlet)
        issues.push_back("q.source dirichlet needs q.table");
    return q;
}

} // namespace detail

// Strict parse of a JSON config document: unknown keys are rejected with a
// suggestion, all value-level violations are collected and reported together.
inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw ParseError(std::string("config parse: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config root must be an object");
    detail::reject_unknown_keys(
        doc, "top level",
        {"domain", "q", "profile", "lambda", "kappa", "sweep_kappas", "sites",
         "alpha", "sweep_scales", "solver", "diagnostics", "output_dir",
         "parallel_sweep"});

    RunConfig cfg;
    std::vector<std::string> issues;

    if (const auto* jd = detail::find_key(doc, "domain")) {
        detail::reject_unknown_keys(
            *jd, "domain", {"kind", "h", "x0", "y0", "width", "height"});
        std::string kind = detail::str_at(*jd, "kind", "domain");
        if (kind == "disk")
            cfg.domain.kind = DomainKind::disk;
        else if (kind == "rectangle")
            cfg.domain.kind = DomainKind::rectangle;
        else
            throw ParseError("domain.kind must be 'disk' or 'rectangle'");
        cfg.domain.h = detail::num_at(*jd, "h", "domain");
        if (cfg.domain.kind == DomainKind::rectangle) {
            cfg.domain.x0 = detail::num_at(*jd, "x0", "domain");
            cfg.domain.y0 = detail::num_at(*jd, "y0", "domain");
            cfg.domain.width = detail::num_at(*jd, "width", "domain");
            cfg.domain.height = detail::num_at(*jd, "height", "domain");
            if (!(cfg.domain.width > 0.0) || !(cfg.domain.height > 0.0))
                issues.push_back("domain extents must be positive");
        }
        if (!(cfg.domain.h > 0.0))
            issues.push_back("domain.h must be positive");
    } else {
        issues.push_back("config needs a domain section");
    }

    if (const auto* jq = detail::find_key(doc, "q"))
        cfg.q = detail::parse_q(*jq, issues);
    if (const auto* jp = detail::find_key(doc, "profile"))
        cfg.profile = detail::parse_profile(*jp, "profile", issues);
    if (const auto* jl = detail::find_key(doc, "lambda"))
        cfg.schedule = detail::parse_schedule(*jl, "lambda", issues);

    if (const auto* js = detail::find_key(doc, "solver")) {
        detail::reject_unknown_keys(*js, "solver",
                                    {"max_iters", "theta0", "fp_tol",
                                     "bisect_tol", "backend", "seed"});
        if (detail::find_key(*js, "max_iters")) {
            cfg.controls.max_iters =
                static_cast<int>(detail::num_at(*js, "max_iters", "solver"));
            if (cfg.controls.max_iters < 1)
                issues.push_back("solver.max_iters must be >= 1");
        }
        if (detail::find_key(*js, "theta0")) {
            cfg.controls.theta0 = detail::num_at(*js, "theta0", "solver");
            if (!(cfg.controls.theta0 > 0.0) || cfg.controls.theta0 > 1.0)
                issues.push_back("solver.theta0 must lie in (0,1]");
        }
        if (detail::find_key(*js, "fp_tol")) {
            cfg.controls.fp_tol = detail::num_at(*js, "fp_tol", "solver");
            if (!(cfg.controls.fp_tol > 0.0))
                issues.push_back("solver.fp_tol must be positive");
        }
        if (detail::find_key(*js, "bisect_tol")) {
            cfg.controls.bisect_tol =
                detail::num_at(*js, "bisect_tol", "solver");
            if (!(cfg.controls.bisect_tol > 0.0))
                issues.push_back("solver.bisect_tol must be positive");
        }
        if (detail::find_key(*js, "backend")) {
            std::string b = detail::str_at(*js, "backend", "solver");
            if (b == "fd")
                cfg.controls.backend = Backend::fd;
            else if (b == "disk_kernel")
                cfg.controls.backend = Backend::disk_kernel;
            else
                throw ParseError("solver.backend must be 'fd' or 'disk_kernel'");
            if (cfg.controls.backend == Backend::disk_kernel &&
                cfg.domain.kind != DomainKind::disk)
                issues.push_back("solver.backend disk_kernel needs a disk domain");
        }
        if (detail::find_key(*js, "seed"))
            cfg.controls.seed = static_cast<std::uint64_t>(
                detail::num_at(*js, "seed", "solver"));
    }

    if (const auto* jg = detail::find_key(doc, "diagnostics")) {
        detail::reject_unknown_keys(*jg, "diagnostics",
                                    {"n_test", "threshold_fraction"});
        if (detail::find_key(*jg, "n_test")) {
            cfg.diag.n_test =
                static_cast<int>(detail::num_at(*jg, "n_test", "diagnostics"));
            if (cfg.diag.n_test < 1)
                issues.push_back("diagnostics.n_test must be >= 1");
        }
        if (detail::find_key(*jg, "threshold_fraction")) {
            cfg.diag.threshold_fraction =
                detail::num_at(*jg, "threshold_fraction", "diagnostics");
            if (!(cfg.diag.threshold_fraction > 0.0) ||
                !(cfg.diag.threshold_fraction < 1.0))
                issues.push_back(
                    "diagnostics.threshold_fraction must lie in (0,1)");
        }
    }

    if (const auto* jo = detail::find_key(doc, "output_dir")) {
        if (!jo->is_string())
            throw ParseError("output_dir must be a string");
        cfg.output_dir = jo->get<std::string>();
    }
    if (const auto* jpar = detail::find_key(doc, "parallel_sweep")) {
        if (!jpar->is_boolean())
            throw ParseError("parallel_sweep must be a boolean");
        cfg.parallel_sweep = jpar->get<bool>();
    }

    const bool has_kappa = detail::find_key(doc, "kappa") != nullptr;
    const bool has_sweep = detail::find_key(doc, "sweep_kappas") != nullptr;
    const bool has_sites = detail::find_key(doc, "sites") != nullptr;
    if (has_kappa + has_sweep + has_sites != 1)
        issues.push_back(
            "config needs exactly one of kappa, sweep_kappas, sites");

    double cont_area = cfg.domain.kind == DomainKind::disk
                           ? std::acos(-1.0)
                           : cfg.domain.width * cfg.domain.height;
    auto check_kappa = [&](double kappa, const std::string& label) {
        if (!std::isfinite(kappa) || kappa <= 0.0) {
            issues.push_back(label + ": kappa must be positive");
            return;
        }
        try {
            if (kappa > cfg.schedule.value(kappa) * cont_area)
                issues.push_back(label + ": kappa " + std::to_string(kappa) +
                                 " exceeds Lambda(kappa) * domain area");
        } catch (const Error&) {
            // schedule errors already recorded
        }
    };

    if (has_kappa) {
        cfg.mode = RunMode::single;
        if (!detail::find_key(doc, "kappa")->is_number())
            throw ParseError("kappa must be a number");
        cfg.kappa = doc["kappa"].get<double>();
        check_kappa(cfg.kappa, "kappa");
    }
    if (has_sweep) {
        cfg.mode = RunMode::sweep;
        cfg.sweep_kappas = detail::num_array_at(doc, "sweep_kappas", "config");
        if (cfg.sweep_kappas.empty())
            issues.push_back("sweep_kappas must be non-empty");
        for (size_t k = 0; k < cfg.sweep_kappas.size(); ++k) {
            check_kappa(cfg.sweep_kappas[k],
                        "sweep_kappas[" + std::to_string(k) + "]");
            if (k > 0 && !(cfg.sweep_kappas[k] < cfg.sweep_kappas[k - 1]))
                issues.push_back("sweep_kappas must be strictly decreasing");
        }
    }
    if (has_sites) {
        cfg.mode = RunMode::multi;
        const auto* ja = detail::find_key(doc, "alpha");
        if (!ja) {
            issues.push_back("multi-site configs need alpha");
        } else if (!ja->is_number()) {
            throw ParseError("alpha must be a number");
        } else {
            cfg.alpha = ja->get<double>();
            if (!(cfg.alpha >= 1.0)) issues.push_back("alpha must be >= 1");
        }
        const auto& jsites = doc["sites"];
        if (!jsites.is_array() || jsites.empty())
            throw ParseError("sites must be a non-empty array");
        for (size_t i = 0; i < jsites.size(); ++i) {
            std::string ctx = "sites[" + std::to_string(i) + "]";
            const auto& je = jsites[i];
            if (!je.is_object()) throw ParseError(ctx + " must be an object");
            detail::reject_unknown_keys(
                je, ctx.c_str(), {"center", "r0", "kappa", "profile", "lambda"});
            SiteSetup s;
            s.f = cfg.profile;
            s.L = cfg.schedule;
            auto center = detail::num_array_at(je, "center", ctx.c_str());
            if (center.size() != 2)
                throw ParseError(ctx + ".center must be [x, y]");
            s.site.center = {center[0], center[1]};
            s.site.r0 = detail::num_at(je, "r0", ctx.c_str());
            if (!(s.site.r0 > 0.0))
                issues.push_back(ctx + ".r0 must be positive");
            s.kappa = detail::num_at(je, "kappa", ctx.c_str());
            if (!(s.kappa > 0.0))
                issues.push_back(ctx + ": kappa must be positive");
            if (const auto* jp = detail::find_key(je, "profile"))
                s.f = detail::parse_profile(*jp, ctx.c_str(), issues);
            if (const auto* jl = detail::find_key(je, "lambda"))
                s.L = detail::parse_schedule(*jl, ctx.c_str(), issues);
            cfg.sites.push_back(std::move(s));
        }
        try {
            validate_sites(cfg.sites, cfg.alpha >= 1.0 ? cfg.alpha : 1.0);
        } catch (const ValidationError& e) {
            for (const auto& iss : e.issues) issues.push_back(iss);
        }
        if (const auto* jsc = detail::find_key(doc, "sweep_scales")) {
            (void)jsc;
            cfg.mode = RunMode::multi_sweep;
            cfg.sweep_scales =
                detail::num_array_at(doc, "sweep_scales", "config");
            if (cfg.sweep_scales.empty())
                issues.push_back("sweep_scales must be non-empty");
            for (size_t k = 0; k < cfg.sweep_scales.size(); ++k) {
                if (!(cfg.sweep_scales[k] > 0.0))
                    issues.push_back("sweep_scales must be positive");
                if (k > 0 &&
                    !(cfg.sweep_scales[k] < cfg.sweep_scales[k - 1]))
                    issues.push_back("sweep_scales must be strictly decreasing");
            }
        }
    } else if (detail::find_key(doc, "sweep_scales")) {
        issues.push_back("sweep_scales needs sites");
    }
    if (detail::find_key(doc, "alpha") && !has_sites)
        issues.push_back("alpha needs sites");

    if (!issues.empty()) throw ValidationError(std::move(issues));
    return cfg;
}

// Domain, elliptic operator, and background flow built from one config.
struct Problem {
    std::unique_ptr<Domain> domain;
    std::unique_ptr<EllipticSolver> solver;
    BackgroundFlow q;
};

inline Problem assemble(const RunConfig& cfg) {
    Problem p;
    p.domain = std::make_unique<Domain>(build_domain(cfg.domain));
    p.solver = std::make_unique<EllipticSolver>(*p.domain);
    p.q = make_background(*p.solver, cfg.q);
    return p;
}

} // namespace steadyvort
