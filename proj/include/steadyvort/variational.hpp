#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "steadyvort/background.hpp"
#include "steadyvort/elliptic.hpp"
#include "steadyvort/profiles.hpp"

namespace steadyvort {

struct SolverControls {
    int max_iters = 500;
    double theta0 = 0.5;        // initial damping weight
    double fp_tol = 1e-8;       // fixed-point tolerance, relative to Lambda
    double bisect_tol = 1e-12;  // multiplier bisection tolerance on mu
    Backend backend = Backend::fd;
    std::uint64_t seed = 12345; // oracle and random feasible fields only
};

// ---------------------------------------------------------------------------
// functionals
// ---------------------------------------------------------------------------

inline double mass(const ScalarField& omega) { return integral(omega); }

inline void require_box(const ScalarField& omega, double lambda) {
    for (double w : omega.v)
        if (w < -1e-12 * lambda || w > lambda * (1.0 + 1e-12))
            throw BoxViolation("field leaves [0, Lambda]: value " +
                               std::to_string(w) + " vs Lambda " +
                               std::to_string(lambda));
}

// Penalty term Lambda * int F(omega / Lambda) dx. Convex in omega.
inline double penalty(const ScalarField& omega, double lambda,
                      const Profile& f) {
    require_box(omega, lambda);
    double acc = 0.0;
    for (double w : omega.v) acc += f.F(w / lambda);
    return lambda * acc * omega.dom->cell_area;
}

// E(omega) with the Green part already solved: 0.5 <omega, psi> + <q, omega>
// minus the penalty.
inline double energy_given_psi(const ScalarField& omega, const ScalarField& psi,
                               const ScalarField& q, double lambda,
                               const Profile& f) {
    return 0.5 * inner_h2(omega, psi) + inner_h2(q, omega) -
           penalty(omega, lambda, f);
}

inline double energy(const EllipticSolver& solver, const ScalarField& omega,
                     const ScalarField& q, double lambda, const Profile& f,
                     Backend backend = Backend::fd) {
    ScalarField psi = solver.green_apply(omega, backend);
    return energy_given_psi(omega, psi, q, lambda, f);
}

// ---------------------------------------------------------------------------
// bathtub update and multiplier
// ---------------------------------------------------------------------------

// omega = min(Lambda f((u - mu)_+), Lambda), optionally restricted to a mask.
inline ScalarField bathtub_update(const ScalarField& u, double mu,
                                  double lambda, const Profile& f,
                                  const std::vector<int>* mask = nullptr) {
    ScalarField w(*u.dom);
    auto set = [&](int n) {
        double s = u[n] - mu;
        if (s <= 0.0) return;
        w[n] = std::min(lambda * f.f(s), lambda);
    };
    if (mask)
        for (int n : *mask) set(n);
    else
        for (int n = 0; n < static_cast<int>(u.size()); ++n) set(n);
    return w;
}

namespace detail {

inline double bathtub_mass(const ScalarField& u, double mu, double lambda,
                           const Profile& f, const std::vector<int>* mask) {
    double acc = 0.0;
    auto add = [&](int n) {
        double s = u[n] - mu;
        if (s <= 0.0) return;
        acc += std::min(lambda * f.f(s), lambda);
    };
    if (mask)
        for (int n : *mask) add(n);
    else
        for (int n = 0; n < static_cast<int>(u.size()); ++n) add(n);
    return acc * u.dom->cell_area;
}

} // namespace detail

struct MultiplierResult {
    double mu = 0.0;
    bool degenerate = false;   // mass stayed flat near the root (flat-max input)
};

// Finds mu with mass(bathtub_update(u, mu)) = kappa by bisection on the
// monotone mass map. The bracket [min u - f^{-1}(1) - 1, max u] pins mass
// above kappa at the low end (full saturation) and zero at the high end.
inline MultiplierResult multiplier_solve(const ScalarField& u, double kappa,
                                         double lambda, const Profile& f,
                                         double bisect_tol = 1e-12,
                                         const std::vector<int>* mask = nullptr) {
    if (!std::isfinite(kappa) || kappa <= 0.0)
        throw InvalidKappa("kappa must be positive");
    size_t count = mask ? mask->size() : u.size();
    double area = static_cast<double>(count) * u.dom->cell_area;
    if (kappa > lambda * area * (1.0 + 1e-12))
        throw Infeasible("kappa " + std::to_string(kappa) +
                         " exceeds box capacity " + std::to_string(lambda * area));

    double umin = std::numeric_limits<double>::infinity();
    double umax = -umin;
    auto see = [&](int n) {
        umin = std::min(umin, u[n]);
        umax = std::max(umax, u[n]);
    };
    if (mask)
        for (int n : *mask) see(n);
    else
        for (int n = 0; n < static_cast<int>(u.size()); ++n) see(n);

    double lo = umin - f.f_inv(1.0) - 1.0;
    double hi = umax;
    int expand = 0;
    while (detail::bathtub_mass(u, lo, lambda, f, mask) < kappa) {
        lo = hi - 2.0 * (hi - lo);
        if (++expand > 64)
            throw NoRoot("multiplier bracket expansion failed");
    }
    while (hi - lo > bisect_tol) {
        double mid = 0.5 * (lo + hi);
        if (detail::bathtub_mass(u, mid, lambda, f, mask) >= kappa)
            lo = mid;
        else
            hi = mid;
    }
    MultiplierResult res;
    res.mu = 0.5 * (lo + hi);
    double m = detail::bathtub_mass(u, res.mu, lambda, f, mask);
    res.degenerate = std::abs(m - kappa) > 1e-6 * kappa;
    return res;
}

// ---------------------------------------------------------------------------
// solutions and feasibility
// ---------------------------------------------------------------------------

struct Solution {
    ScalarField omega;                     // combined vorticity
    double mu = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> mus;               // per-site multipliers (multi)
    std::vector<ScalarField> site_omegas;  // per-site fields (multi)
    std::vector<double> energy_trace;      // accepted energies, initial first
    double energy = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    double fixed_point_residual = std::numeric_limits<double>::infinity();
    int patch_nodes = 0;
    std::vector<int> site_patch_nodes;
    bool damping_floor_hit = false;
    bool multiplier_degenerate = false;
};

struct FeasibilityEntry {
    std::string name;
    bool pass = false;
    double violation = 0.0;
};

struct FeasibilityReport {
    std::vector<FeasibilityEntry> entries;
    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }
    double worst() const {
        double w = 0.0;
        for (const auto& e : entries) w = std::max(w, e.violation);
        return w;
    }
};

inline FeasibilityReport feasibility_check(const ScalarField& omega,
                                           double kappa, double lambda,
                                           double tol = 1e-8) {
    FeasibilityReport rep;
    double lo = 0.0, hi = 0.0;
    for (double w : omega.v) {
        lo = std::max(lo, -w);
        hi = std::max(hi, w - lambda);
    }
    rep.entries.push_back({"box_lower", lo <= 1e-12 * lambda, lo});
    rep.entries.push_back({"box_upper", hi <= 1e-12 * lambda, hi});
    double dm = std::abs(mass(omega) - kappa);
    rep.entries.push_back({"mass", dm <= tol * kappa, dm});
    return rep;
}

// ---------------------------------------------------------------------------
// mass restoration
// ---------------------------------------------------------------------------

namespace detail {

// Multiplicative rescale to mass kappa; if clipping at Lambda moves mass by
// more than tol*kappa, correct the scale with a short bisection on the
// clipped rescale (monotone in the factor).
inline void restore_mass(ScalarField& w, double kappa, double lambda,
                         double tol) {
    double m = mass(w);
    if (!(m > 0.0)) throw Infeasible("iterate lost all mass");
    double s = kappa / m;
    if (s <= 1.0) {
        for (double& v : w.v) v *= s;
        return;
    }
    std::vector<double> base = w.v;
    auto clipped_mass = [&](double t) {
        double acc = 0.0;
        for (double v : base) acc += std::min(v * t, lambda);
        return acc * w.dom->cell_area;
    };
    auto apply = [&](double t) {
        for (size_t n = 0; n < base.size(); ++n)
            w.v[n] = std::min(base[n] * t, lambda);
    };
    if (clipped_mass(s) >= kappa * (1.0 - tol)) {
        apply(s);
        if (std::abs(mass(w) - kappa) <= tol * kappa) return;
    }
    double t_lo = s, t_hi = s;
    int doubling = 0;
    while (clipped_mass(t_hi) < kappa) {
        t_hi *= 2.0;
        if (++doubling > 200) throw NoRoot("mass restoration failed");
    }
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (t_lo + t_hi);
        (clipped_mass(mid) < kappa ? t_lo : t_hi) = mid;
    }
    apply(0.5 * (t_lo + t_hi));
}

inline int patch_count(const ScalarField& u, double mu, double finv1,
                       const std::vector<int>* mask) {
    int c = 0;
    auto tally = [&](int n) {
        if (u[n] - mu >= finv1) ++c;
    };
    if (mask)
        for (int n : *mask) tally(n);
    else
        for (int n = 0; n < static_cast<int>(u.size()); ++n) tally(n);
    return c;
}

} // namespace detail

// ---------------------------------------------------------------------------
// single-class maximization
// ---------------------------------------------------------------------------

// Damped bathtub fixed-point iteration with an energy-ascent safeguard.
// Each pass solves for the multiplier at the current induced field
// u = G omega + q, forms the bathtub target, and blends toward it; a step is
// accepted only if the energy does not drop beyond roundoff slack, halving
// the blend weight otherwise (floor 1/64, then forced acceptance with a
// warning flag). Convergence requires both the sup-norm fixed-point residual
// (relative to Lambda) and the mass defect (relative to kappa) to fall below
// fp_tol.
inline Solution maximize(const EllipticSolver& solver, const BackgroundFlow& q,
                         const Profile& f, const StrengthSchedule& L,
                         double kappa, const SolverControls& ctl = {},
                         const ScalarField* warm_start = nullptr) {
    const Domain& d = solver.domain();
    if (!std::isfinite(kappa) || kappa <= 0.0)
        throw InvalidKappa("kappa must be positive");
    const double lambda = L.value(kappa);
    const double area = d.interior_area();
    if (kappa > lambda * area * (1.0 + 1e-12))
        throw Infeasible("kappa " + std::to_string(kappa) +
                         " exceeds discrete capacity " +
                         std::to_string(lambda * area));

    Solution sol;
    ScalarField omega(d, kappa / area);
    if (warm_start && warm_start->dom == &d) {
        omega = *warm_start;
        for (double& v : omega.v) v = std::clamp(v, 0.0, lambda);
        detail::restore_mass(omega, kappa, lambda, ctl.fp_tol);
    }

    const double finv1 = f.f_inv(1.0);
    ScalarField psi = solver.green_apply(omega, ctl.backend);
    double E = energy_given_psi(omega, psi, q.interior, lambda, f);
    sol.energy_trace.push_back(E);

    int updates = 0;
    while (true) {
        ScalarField u = psi;
        for (size_t n = 0; n < u.size(); ++n) u[n] += q.interior[n];
        MultiplierResult mr =
            multiplier_solve(u, kappa, lambda, f, ctl.bisect_tol);
        sol.multiplier_degenerate |= mr.degenerate;
        ScalarField target = bathtub_update(u, mr.mu, lambda, f);
        double resid = sup_diff(omega, target);
        double mass_err = std::abs(mass(omega) - kappa);

        sol.mu = mr.mu;
        sol.fixed_point_residual = resid;
        sol.patch_nodes = detail::patch_count(u, mr.mu, finv1, nullptr);
        if (resid <= ctl.fp_tol * lambda && mass_err <= ctl.fp_tol * kappa) {
            sol.converged = true;
            break;
        }
        if (updates >= ctl.max_iters) break;

        double theta = ctl.theta0;
        ScalarField cand(d);
        ScalarField cand_psi(d);
        double E_cand = 0.0;
        while (true) {
            for (size_t n = 0; n < cand.size(); ++n)
                cand[n] = (1.0 - theta) * omega[n] + theta * target[n];
            detail::restore_mass(cand, kappa, lambda, ctl.fp_tol);
            cand_psi = solver.green_apply(cand, ctl.backend);
            E_cand = energy_given_psi(cand, cand_psi, q.interior, lambda, f);
            if (E_cand >= E - 1e-14 * (1.0 + std::abs(E))) break;
            if (theta * 0.5 < 1.0 / 64.0 - 1e-15) {
                sol.damping_floor_hit = true;
                break;
            }
            theta *= 0.5;
        }
        omega = std::move(cand);
        psi = std::move(cand_psi);
        E = E_cand;
        sol.energy_trace.push_back(E);
        ++updates;
    }
    sol.iterations = updates;
    sol.omega = std::move(omega);
    sol.energy = sol.energy_trace.back();
    return sol;
}

// ---------------------------------------------------------------------------
// multi-site maximization
// ---------------------------------------------------------------------------

struct SiteSetup {
    VortexSite site;
    Profile f;
    StrengthSchedule L;
    double kappa = 0.0;
};

inline void validate_sites(const std::vector<SiteSetup>& sites, double alpha) {
    std::vector<std::string> issues;
    if (sites.empty()) issues.push_back("no vortex sites given");
    for (size_t i = 0; i < sites.size(); ++i) {
        if (!(sites[i].kappa > 0.0))
            issues.push_back("site " + std::to_string(i) +
                             ": kappa must be positive");
        for (size_t j = i + 1; j < sites.size(); ++j) {
            double dd = dist(sites[i].site.center, sites[j].site.center);
            if (dd < sites[i].site.r0 + sites[j].site.r0)
                issues.push_back("sites " + std::to_string(i) + " and " +
                                 std::to_string(j) + " have overlapping balls");
        }
    }
    if (!(alpha >= 1.0)) issues.push_back("alpha must be >= 1");
    double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
    for (const auto& s : sites) {
        kmin = std::min(kmin, s.kappa);
        kmax = std::max(kmax, s.kappa);
    }
    if (!sites.empty() && kmax > alpha * kmin * (1.0 + 1e-12))
        issues.push_back("mass ratio " + std::to_string(kmax / kmin) +
                         " exceeds alpha " + std::to_string(alpha));
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

// Coupled per-site bathtub iteration: one Green solve on the summed field per
// pass, then an independent multiplier and bathtub target on each site ball.
inline Solution maximize_multi(const EllipticSolver& solver,
                               const BackgroundFlow& q,
                               const std::vector<SiteSetup>& sites,
                               double alpha, const SolverControls& ctl = {},
                               const std::vector<ScalarField>* warm = nullptr) {
    const Domain& d = solver.domain();
    validate_sites(sites, alpha);
    const size_t ns = sites.size();

    std::vector<std::vector<int>> masks(ns);
    std::vector<double> lambda(ns), finv1(ns);
    for (size_t i = 0; i < ns; ++i) {
        masks[i] = ball_mask(d, sites[i].site);
        lambda[i] = sites[i].L.value(sites[i].kappa);
        finv1[i] = sites[i].f.f_inv(1.0);
        double cap = lambda[i] * static_cast<double>(masks[i].size()) *
                     d.cell_area;
        if (sites[i].kappa > cap * (1.0 + 1e-12))
            throw SiteInfeasible("site " + std::to_string(i) + ": kappa " +
                                 std::to_string(sites[i].kappa) +
                                 " exceeds ball capacity " +
                                 std::to_string(cap));
    }

    std::vector<ScalarField> w(ns, ScalarField(d));
    for (size_t i = 0; i < ns; ++i) {
        if (warm && warm->size() == ns && (*warm)[i].dom == &d) {
            w[i] = (*warm)[i];
            for (double& v : w[i].v) v = std::clamp(v, 0.0, lambda[i]);
            detail::restore_mass(w[i], sites[i].kappa, lambda[i], ctl.fp_tol);
        } else {
            double fill = sites[i].kappa /
                          (static_cast<double>(masks[i].size()) * d.cell_area);
            for (int n : masks[i]) w[i][n] = fill;
        }
    }

    auto combine = [&](const std::vector<ScalarField>& parts) {
        ScalarField sum(d);
        for (const auto& part : parts)
            for (size_t n = 0; n < sum.size(); ++n) sum[n] += part[n];
        return sum;
    };
    auto penalty_multi = [&](const std::vector<ScalarField>& parts) {
        double acc = 0.0;
        for (size_t i = 0; i < ns; ++i)
            acc += penalty(parts[i], lambda[i], sites[i].f);
        return acc;
    };

    Solution sol;
    sol.mus.assign(ns, 0.0);
    sol.site_patch_nodes.assign(ns, 0);

    ScalarField omega = combine(w);
    ScalarField psi = solver.green_apply(omega, ctl.backend);
    double E = 0.5 * inner_h2(omega, psi) + inner_h2(q.interior, omega) -
               penalty_multi(w);
    sol.energy_trace.push_back(E);

    int updates = 0;
    while (true) {
        ScalarField u = psi;
        for (size_t n = 0; n < u.size(); ++n) u[n] += q.interior[n];
        std::vector<ScalarField> target(ns, ScalarField(d));
        double resid = 0.0, mass_rel = 0.0;
        for (size_t i = 0; i < ns; ++i) {
            MultiplierResult mr =
                multiplier_solve(u, sites[i].kappa, lambda[i], sites[i].f,
                                 ctl.bisect_tol, &masks[i]);
            sol.multiplier_degenerate |= mr.degenerate;
            sol.mus[i] = mr.mu;
            target[i] =
                bathtub_update(u, mr.mu, lambda[i], sites[i].f, &masks[i]);
            resid = std::max(resid, sup_diff(w[i], target[i]) / lambda[i]);
            mass_rel = std::max(mass_rel, std::abs(mass(w[i]) - sites[i].kappa) /
                                              sites[i].kappa);
            sol.site_patch_nodes[i] =
                detail::patch_count(u, mr.mu, finv1[i], &masks[i]);
        }
        sol.fixed_point_residual = resid;
        if (resid <= ctl.fp_tol && mass_rel <= ctl.fp_tol) {
            sol.converged = true;
            break;
        }
        if (updates >= ctl.max_iters) break;

        double theta = ctl.theta0;
        std::vector<ScalarField> cand(ns, ScalarField(d));
        ScalarField cand_sum(d), cand_psi(d);
        double E_cand = 0.0;
        while (true) {
            for (size_t i = 0; i < ns; ++i) {
                for (int n : masks[i])
                    cand[i][n] =
                        (1.0 - theta) * w[i][n] + theta * target[i][n];
                detail::restore_mass(cand[i], sites[i].kappa, lambda[i],
                                     ctl.fp_tol);
            }
            cand_sum = combine(cand);
            cand_psi = solver.green_apply(cand_sum, ctl.backend);
            E_cand = 0.5 * inner_h2(cand_sum, cand_psi) +
                     inner_h2(q.interior, cand_sum) - penalty_multi(cand);
            if (E_cand >= E - 1e-14 * (1.0 + std::abs(E))) break;
            if (theta * 0.5 < 1.0 / 64.0 - 1e-15) {
                sol.damping_floor_hit = true;
                break;
            }
            theta *= 0.5;
        }
        w = std::move(cand);
        omega = std::move(cand_sum);
        psi = std::move(cand_psi);
        E = E_cand;
        sol.energy_trace.push_back(E);
        ++updates;
    }
    sol.iterations = updates;
    sol.omega = std::move(omega);
    sol.site_omegas = std::move(w);
    sol.energy = sol.energy_trace.back();
    sol.patch_nodes = 0;
    for (int c : sol.site_patch_nodes) sol.patch_nodes += c;
    return sol;
}

inline FeasibilityReport feasibility_check_multi(
    const Solution& sol, const std::vector<SiteSetup>& sites,
    const Domain& d, double tol = 1e-8) {
    FeasibilityReport rep;
    for (size_t i = 0; i < sites.size(); ++i) {
        const auto& wi = sol.site_omegas[i];
        double lam = sites[i].L.value(sites[i].kappa);
        auto sub = feasibility_check(wi, sites[i].kappa, lam, tol);
        for (auto e : sub.entries) {
            e.name = "site" + std::to_string(i) + "_" + e.name;
            rep.entries.push_back(e);
        }
        auto msk = ball_mask(d, sites[i].site);
        std::vector<char> inside(d.nodes.size(), 0);
        for (int n : msk) inside[n] = 1;
        double leak = 0.0;
        for (size_t n = 0; n < wi.size(); ++n)
            if (!inside[n]) leak = std::max(leak, std::abs(wi[n]));
        rep.entries.push_back(
            {"site" + std::to_string(i) + "_support", leak <= 1e-12 * lam,
             leak});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// brute-force oracle (small grids)
// ---------------------------------------------------------------------------

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Alternating box-clip / mass-shift projection onto the constraint set.
inline void project_feasible(std::vector<double>& w, double kappa,
                             double lambda, double cell_area,
                             int alternations = 50) {
    const double area = static_cast<double>(w.size()) * cell_area;
    for (int it = 0; it < alternations; ++it) {
        for (double& v : w) v = std::clamp(v, 0.0, lambda);
        double m = 0.0;
        for (double v : w) m += v;
        m *= cell_area;
        double shift = (kappa - m) / area;
        for (double& v : w) v += shift;
    }
}

} // namespace detail

// Uniformly random box values projected onto {0 <= w <= Lambda, mass = kappa}.
inline ScalarField random_feasible_field(const Domain& d, double kappa,
                                         double lambda,
                                         std::mt19937_64& rng) {
    ScalarField w(d);
    for (double& v : w.v) v = lambda * detail::uniform01(rng);
    detail::project_feasible(w.v, kappa, lambda, d.cell_area);
    for (double& v : w.v) v = std::clamp(v, 0.0, lambda);
    detail::restore_mass(w, kappa, lambda, 1e-12);
    return w;
}

// Projected-gradient ascent cross-check, independent of the bathtub
// iteration. Restricted to tiny grids; energies are what get compared.
inline Solution oracle_maximize(const EllipticSolver& solver,
                                const BackgroundFlow& q, const Profile& f,
                                const StrengthSchedule& L, double kappa,
                                const SolverControls& ctl = {}) {
    const Domain& d = solver.domain();
    const int n = static_cast<int>(d.nodes.size());
    if (n > 100)
        throw GridTooLarge("oracle_maximize limited to 100 nodes, got " +
                           std::to_string(n));
    const double lambda = L.value(kappa);
    if (kappa > lambda * d.interior_area() * (1.0 + 1e-12))
        throw Infeasible("kappa exceeds discrete capacity");

    // Dense Green matrix from unit impulses.
    std::vector<std::vector<double>> G(n, std::vector<double>(n, 0.0));
    for (int j = 0; j < n; ++j) {
        ScalarField e(d);
        e[j] = 1.0;
        ScalarField col = solver.green_apply(e, Backend::fd);
        for (int i = 0; i < n; ++i) G[i][j] = col[i];
    }
    auto apply_G = [&](const std::vector<double>& w, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += G[i][j] * w[j];
            out[i] = acc;
        }
    };
    auto score = [&](const std::vector<double>& w) {
        std::vector<double> gw(n);
        apply_G(w, gw);
        double e2 = 0.0, e1 = 0.0, pen = 0.0;
        for (int i = 0; i < n; ++i) {
            e2 += w[i] * gw[i];
            e1 += q.interior[i] * w[i];
            pen += f.F(std::clamp(w[i], 0.0, lambda) / lambda);
        }
        return (0.5 * e2 + e1 - lambda * pen) * d.cell_area;
    };

    std::mt19937_64 rng(ctl.seed);
    const int restarts = 10;
    const int steps = 100000;
    std::vector<double> best;
    double best_E = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> w(n);
        for (double& v : w) v = lambda * detail::uniform01(rng);
        detail::project_feasible(w, kappa, lambda, d.cell_area);
        std::vector<double> gw(n);
        for (int t = 0; t < steps; ++t) {
            double eta = lambda / std::sqrt(static_cast<double>(t) + 1.0);
            apply_G(w, gw);
            for (int i = 0; i < n; ++i) {
                double grad = gw[i] + q.interior[i] -
                              f.f_inv(std::clamp(w[i], 0.0, lambda) / lambda);
                w[i] += eta * grad;
            }
            detail::project_feasible(w, kappa, lambda, d.cell_area);
        }
        double E = score(w);
        if (E > best_E) {
            best_E = E;
            best = w;
        }
    }

    Solution sol;
    sol.omega = ScalarField(d, best);
    for (double& v : sol.omega.v) v = std::clamp(v, 0.0, lambda);
    detail::restore_mass(sol.omega, kappa, lambda, 1e-12);
    ScalarField psi = solver.green_apply(sol.omega, Backend::fd);
    sol.energy = energy_given_psi(sol.omega, psi, q.interior, lambda, f);
    sol.energy_trace = {sol.energy};
    ScalarField u = psi;
    for (size_t m = 0; m < u.size(); ++m) u[m] += q.interior[m];
    sol.mu = multiplier_solve(u, kappa, lambda, f, ctl.bisect_tol).mu;
    sol.converged = true;
    sol.iterations = restarts * steps;
    sol.fixed_point_residual =
        sup_diff(sol.omega, bathtub_update(u, sol.mu, lambda, f));
    sol.patch_nodes = detail::patch_count(u, sol.mu, f.f_inv(1.0), nullptr);
    return sol;
}

} // namespace steadyvort
