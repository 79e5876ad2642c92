#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "steadyvort/variational.hpp"

namespace steadyvort {

// ---------------------------------------------------------------------------
// weak-form residual
// ---------------------------------------------------------------------------

namespace detail {

// C_c^infty bump on (0,1), zero outside.
inline double bump(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp(-1.0 / (t * (1.0 - t)));
}

inline double bump_deriv(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double g = t * (1.0 - t);
    return bump(t) * (1.0 - 2.0 * t) / (g * g);
}

struct BumpRect {
    double a, b, c, d;   // [a,b] x [c,d]
    double grad_sup;     // sup |grad phi| before normalization
};

inline bool corner_inside(const Domain& dom, double x, double y) {
    if (dom.kind == DomainKind::disk) return x * x + y * y < 1.0;
    return x > dom.x0 && x < dom.x0 + dom.width && y > dom.y0 &&
           y < dom.y0 + dom.height;
}

// sup |grad (B x B)| over the rectangle, sampled on a 129x129 lattice.
inline double bump_grad_sup(double lx, double ly) {
    static std::vector<double> bv, bd;
    if (bv.empty()) {
        bv.resize(129);
        bd.resize(129);
        for (int k = 0; k <= 128; ++k) {
            double t = k / 128.0;
            bv[k] = bump(t);
            bd[k] = bump_deriv(t);
        }
    }
    double sup = 0.0;
    for (int i = 0; i <= 128; ++i)
        for (int j = 0; j <= 128; ++j) {
            double gx = bd[i] * bv[j] / lx;
            double gy = bv[i] * bd[j] / ly;
            sup = std::max(sup, std::hypot(gx, gy));
        }
    return sup;
}

// Deterministic test family: dyadic subrectangles of the domain bounding
// box, levels 1..5, level-major and then row-major, keeping only cells with
// all four corners strictly inside D, truncated to n_test members.
inline std::vector<BumpRect> bump_family(const Domain& dom, int n_test) {
    if (n_test < 1) throw InvalidSpec("n_test must be >= 1");
    double bx0 = dom.x0, by0 = dom.y0, bw = dom.width, bh = dom.height;
    if (dom.kind == DomainKind::disk) {
        bx0 = -1.0;
        by0 = -1.0;
        bw = 2.0;
        bh = 2.0;
    }
    std::vector<BumpRect> fam;
    for (int level = 1; level <= 5; ++level) {
        int cells = 1 << level;
        double lx = bw / cells, ly = bh / cells;
        double grad_sup = bump_grad_sup(lx, ly);
        for (int j = 0; j < cells; ++j)
            for (int i = 0; i < cells; ++i) {
                double a = bx0 + i * lx, c = by0 + j * ly;
                double b = a + lx, d = c + ly;
                if (!corner_inside(dom, a, c) || !corner_inside(dom, b, c) ||
                    !corner_inside(dom, a, d) || !corner_inside(dom, b, d))
                    continue;
                fam.push_back({a, b, c, d, grad_sup});
                if (static_cast<int>(fam.size()) == n_test) return fam;
            }
    }
    return fam;
}

} // namespace detail

// Max over the bump family of |h^2 sum omega v . grad phi| with v the
// central-difference velocity and phi scaled to unit sup gradient. Zero
// vorticity gives zero exactly; for a discrete weak solution the value
// shrinks under grid refinement.
inline double weak_residual_given_velocity(const ScalarField& omega,
                                           const VectorField& v,
                                           int n_test) {
    const Domain& dom = *omega.dom;
    auto fam = detail::bump_family(dom, n_test);
    double worst = 0.0;
    for (const auto& r : fam) {
        double acc = 0.0;
        for (size_t n = 0; n < omega.size(); ++n) {
            if (omega[n] == 0.0) continue;
            const Point& pt = dom.nodes[n];
            if (pt.x <= r.a || pt.x >= r.b || pt.y <= r.c || pt.y >= r.d)
                continue;
            double tx = (pt.x - r.a) / (r.b - r.a);
            double ty = (pt.y - r.c) / (r.d - r.c);
            double gx = detail::bump_deriv(tx) * detail::bump(ty) / (r.b - r.a);
            double gy = detail::bump(tx) * detail::bump_deriv(ty) / (r.d - r.c);
            acc += omega[n] * (v.vx[n] * gx + v.vy[n] * gy);
        }
        worst = std::max(worst, std::abs(acc) * dom.cell_area / r.grad_sup);
    }
    return worst;
}

inline double weak_residual(const EllipticSolver& solver,
                            const ScalarField& omega, const BackgroundFlow& q,
                            int n_test, Backend backend = Backend::fd) {
    VectorField v = solver.velocity_field(omega, q.interior, backend);
    return weak_residual_given_velocity(omega, v, n_test);
}

// ---------------------------------------------------------------------------
// support localization
// ---------------------------------------------------------------------------

struct SupportMetrics {
    int node_count = 0;
    double diameter = 0.0;
    double dist_to_S = std::numeric_limits<double>::quiet_NaN();
    bool empty = true;   // dist_to_S undefined when set
};

namespace detail {

inline double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew monotone chain; used only to cut the pairwise diameter scan down
// for large supports.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& u, const Point& w) {
        return u.x < w.x || (u.x == w.x && u.y < w.y);
    });
    size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Point> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

inline double point_set_diameter(std::vector<Point> pts) {
    if (pts.size() > 4000) pts = convex_hull(std::move(pts));
    double d = 0.0;
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            d = std::max(d, dist(pts[i], pts[j]));
    return d;
}

} // namespace detail

// Near-argmax set of q over the closed domain: boundary samples plus
// interior nodes within 1e-9 * osc(q) of the closure maximum.
inline std::vector<Point> argmax_set(const Domain& dom,
                                     const BackgroundFlow& q) {
    double qmax = q.max_closure();
    double tol = 1e-9 * q.osc();
    std::vector<Point> s;
    for (size_t k = 0; k < dom.boundary.size(); ++k)
        if (q.boundary[k] >= qmax - tol) s.push_back(dom.boundary[k].pos);
    for (size_t n = 0; n < dom.nodes.size(); ++n)
        if (q.interior[n] >= qmax - tol) s.push_back(dom.nodes[n]);
    return s;
}

// Support = {omega > threshold_fraction * max omega}; invariant under
// positive rescaling of omega. dist_to_S is the worst distance from the
// support to the near-argmax set (or to explicit target points).
inline SupportMetrics support_metrics(const ScalarField& omega,
                                      const BackgroundFlow& q,
                                      double threshold_fraction = 1e-6,
                                      const std::vector<Point>* targets =
                                          nullptr) {
    if (!(threshold_fraction > 0.0) || !(threshold_fraction < 1.0))
        throw InvalidSpec("threshold_fraction must lie in (0,1)");
    SupportMetrics m;
    double wmax = max_value(omega);
    if (!(wmax > 0.0)) return m;
    std::vector<Point> supp;
    for (size_t n = 0; n < omega.size(); ++n)
        if (omega[n] > threshold_fraction * wmax)
            supp.push_back(omega.dom->nodes[n]);
    m.node_count = static_cast<int>(supp.size());
    if (supp.empty()) return m;
    m.empty = false;
    m.diameter = detail::point_set_diameter(supp);
    std::vector<Point> s = targets ? *targets : argmax_set(*omega.dom, q);
    if (s.empty()) return m;
    double worst = 0.0;
    for (const auto& pt : supp) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : s) best = std::min(best, dist(pt, t));
        worst = std::max(worst, best);
    }
    m.dist_to_S = worst;
    return m;
}

// |<omega, G omega + q - mu>| by quadrature, with u = G omega + q supplied.
inline double pairing_term_given_u(const ScalarField& omega,
                                   const ScalarField& u, double mu) {
    double acc = 0.0;
    for (size_t n = 0; n < omega.size(); ++n)
        acc += omega[n] * (u[n] - mu);
    return std::abs(acc) * omega.dom->cell_area;
}

inline double pairing_term(const EllipticSolver& solver,
                           const ScalarField& omega, const BackgroundFlow& q,
                           double mu, Backend backend = Backend::fd) {
    ScalarField u = solver.green_apply(omega, backend);
    for (size_t n = 0; n < u.size(); ++n) u[n] += q.interior[n];
    return pairing_term_given_u(omega, u, mu);
}

// ---------------------------------------------------------------------------
// kappa sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
    double kappa = 0.0;
    double mu = 0.0;
    double qmax_minus_mu = 0.0;
    double supp_diameter = 0.0;
    double supp_dist_to_S = std::numeric_limits<double>::quiet_NaN();
    int patch_nodes = 0;
    double penalty_over_kappa = 0.0;
    double pairing_over_kappa = 0.0;
    double weak_residual = 0.0;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
    bool solved = false;          // false: the solve threw; error holds why
    std::string error;
};

struct TrendFlags {
    bool qmax_minus_mu_decreasing = false;
    bool penalty_decreasing = false;
    bool pairing_decreasing = false;
    bool dist_decreasing = false;
    bool patch_free_tail = false;
    bool all_rows_converged = false;
    bool all() const {
        return qmax_minus_mu_decreasing && penalty_decreasing &&
               pairing_decreasing && dist_decreasing && patch_free_tail &&
               all_rows_converged;
    }
};

struct SweepOptions {
    int n_test = 64;
    double threshold_fraction = 1e-6;
    bool warm_start = true;
    std::vector<Point> argmax_override;   // empty: detect from q
};

namespace detail {

inline bool strictly_decreasing(const std::vector<double>& v) {
    for (size_t k = 1; k < v.size(); ++k)
        if (!(v[k] < v[k - 1])) return false;
    return true;
}

} // namespace detail

// Trend flags over the converged rows only; the patch-free check covers the
// final half of the list (small-kappa regime).
inline TrendFlags sweep_trends(const std::vector<SweepRow>& rows) {
    TrendFlags t;
    std::vector<double> gap, pen, pair, dst;
    for (const auto& r : rows) {
        if (!r.solved || !r.converged) continue;
        gap.push_back(r.qmax_minus_mu);
        pen.push_back(r.penalty_over_kappa);
        pair.push_back(r.pairing_over_kappa);
        if (std::isfinite(r.supp_dist_to_S)) dst.push_back(r.supp_dist_to_S);
    }
    t.qmax_minus_mu_decreasing = detail::strictly_decreasing(gap);
    t.penalty_decreasing = detail::strictly_decreasing(pen);
    t.pairing_decreasing = detail::strictly_decreasing(pair);
    t.dist_decreasing = detail::strictly_decreasing(dst);
    t.patch_free_tail = true;
    size_t tail = (rows.size() + 1) / 2;
    for (size_t k = rows.size() - tail; k < rows.size(); ++k)
        if (rows[k].solved && rows[k].converged && rows[k].patch_nodes != 0)
            t.patch_free_tail = false;
    t.all_rows_converged = true;
    for (const auto& r : rows)
        if (!r.solved || !r.converged) t.all_rows_converged = false;
    return t;
}

struct SweepResult {
    std::vector<SweepRow> rows;
    TrendFlags trends;
    std::vector<Solution> solutions;   // aligned with rows; empty omega if unsolved
};

inline SweepRow make_row(const EllipticSolver& solver, const BackgroundFlow& q,
                         const Profile& f, double lambda, double kappa,
                         const Solution& sol, const SweepOptions& opts,
                         double qref, const std::vector<Point>* targets) {
    SweepRow row;
    row.kappa = kappa;
    row.solved = true;
    row.mu = sol.mu;
    row.qmax_minus_mu = qref - sol.mu;
    row.patch_nodes = sol.patch_nodes;
    row.energy = sol.energy;
    row.iterations = sol.iterations;
    row.converged = sol.converged;
    SupportMetrics sm =
        support_metrics(sol.omega, q, opts.threshold_fraction, targets);
    row.supp_diameter = sm.diameter;
    row.supp_dist_to_S = sm.dist_to_S;
    row.penalty_over_kappa = penalty(sol.omega, lambda, f) / kappa;
    ScalarField u = solver.green_apply(sol.omega, Backend::fd);
    for (size_t n = 0; n < u.size(); ++n) u[n] += q.interior[n];
    row.pairing_over_kappa = pairing_term_given_u(sol.omega, u, sol.mu) / kappa;
    VectorField v = solver.perp_gradient(u);
    row.weak_residual = weak_residual_given_velocity(sol.omega, v, opts.n_test);
    return row;
}

// One warm-started solve per kappa, metrics per row, trend flags at the end.
// A row that throws (e.g. infeasible kappa) is recorded and skipped; later
// rows proceed from the last good iterate.
inline SweepResult kappa_sweep(const EllipticSolver& solver,
                               const BackgroundFlow& q, const Profile& f,
                               const StrengthSchedule& L,
                               const std::vector<double>& kappas,
                               const SolverControls& ctl = {},
                               const SweepOptions& opts = {}) {
    if (kappas.empty()) throw InvalidSpec("kappa list is empty");
    for (size_t k = 1; k < kappas.size(); ++k)
        if (!(kappas[k] < kappas[k - 1]))
            throw InvalidSpec("kappa list must be strictly decreasing");

    const std::vector<Point>* targets =
        opts.argmax_override.empty() ? nullptr : &opts.argmax_override;
    double qref = q.max_closure();

    SweepResult out;
    std::optional<ScalarField> warm;
    for (double kappa : kappas) {
        SweepRow row;
        row.kappa = kappa;
        Solution sol;
        try {
            sol = maximize(solver, q, f, L, kappa, ctl,
                           opts.warm_start && warm ? &*warm : nullptr);
            row = make_row(solver, q, f, L.value(kappa), kappa, sol, opts,
                           qref, targets);
        } catch (const Error& e) {
            row.error = e.what();
        }
        if (row.solved) warm = sol.omega;
        out.rows.push_back(std::move(row));
        out.solutions.push_back(std::move(sol));
    }
    out.trends = sweep_trends(out.rows);
    return out;
}

struct MultiSweepResult {
    std::vector<std::vector<SweepRow>> site_rows;   // [site][scale]
    std::vector<TrendFlags> site_trends;
    std::vector<Solution> solutions;                // one per scale
};

// Scales the base circulation vector by each factor, re-solving with warm
// starts; each site gets its own row list with q(center) as the reference
// value and {center} as the localization target.
inline MultiSweepResult sweep_multi(const EllipticSolver& solver,
                                    const BackgroundFlow& q,
                                    const std::vector<SiteSetup>& base,
                                    double alpha,
                                    const std::vector<double>& scales,
                                    const SolverControls& ctl = {},
                                    const SweepOptions& opts = {}) {
    if (scales.empty()) throw InvalidSpec("scale list is empty");
    for (size_t k = 1; k < scales.size(); ++k)
        if (!(scales[k] < scales[k - 1]))
            throw InvalidSpec("scale list must be strictly decreasing");
    const Domain& d = solver.domain();

    MultiSweepResult out;
    out.site_rows.resize(base.size());
    std::optional<std::vector<ScalarField>> warm;
    for (double scale : scales) {
        std::vector<SiteSetup> sites = base;
        for (auto& s : sites) s.kappa *= scale;
        Solution sol;
        std::string err;
        try {
            sol = maximize_multi(solver, q, sites, alpha, ctl,
                                 opts.warm_start && warm ? &*warm : nullptr);
        } catch (const Error& e) {
            err = e.what();
        }
        if (err.empty()) {
            ScalarField u = solver.green_apply(sol.omega, Backend::fd);
            for (size_t n = 0; n < u.size(); ++n) u[n] += q.interior[n];
            VectorField v = solver.perp_gradient(u);
            double wres =
                weak_residual_given_velocity(sol.omega, v, opts.n_test);
            for (size_t i = 0; i < sites.size(); ++i) {
                SweepRow row;
                row.kappa = sites[i].kappa;
                row.solved = true;
                row.mu = sol.mus[i];
                row.qmax_minus_mu =
                    q.value_at(d, sites[i].site.center) - sol.mus[i];
                row.patch_nodes = sol.site_patch_nodes[i];
                row.energy = sol.energy;
                row.iterations = sol.iterations;
                row.converged = sol.converged;
                std::vector<Point> target = {sites[i].site.center};
                SupportMetrics sm = support_metrics(
                    sol.site_omegas[i], q, opts.threshold_fraction, &target);
                row.supp_diameter = sm.diameter;
                row.supp_dist_to_S = sm.dist_to_S;
                double lam = sites[i].L.value(sites[i].kappa);
                row.penalty_over_kappa =
                    penalty(sol.site_omegas[i], lam, sites[i].f) /
                    sites[i].kappa;
                row.pairing_over_kappa =
                    pairing_term_given_u(sol.site_omegas[i], u, sol.mus[i]) /
                    sites[i].kappa;
                row.weak_residual = wres;
                out.site_rows[i].push_back(std::move(row));
            }
        } else {
            for (size_t i = 0; i < sites.size(); ++i) {
                SweepRow row;
                row.kappa = sites[i].kappa;
                row.error = err;
                out.site_rows[i].push_back(std::move(row));
            }
        }
        if (err.empty() && sol.site_omegas.size() == base.size())
            warm = sol.site_omegas;
        out.solutions.push_back(std::move(sol));
    }
    for (const auto& rows : out.site_rows)
        out.site_trends.push_back(sweep_trends(rows));
    return out;
}

} // namespace steadyvort
