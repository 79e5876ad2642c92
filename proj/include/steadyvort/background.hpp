#pragma once

#include <functional>
#include <string>
#include <vector>

#include "steadyvort/elliptic.hpp"

namespace steadyvort {

// Background flow potential q, known at interior nodes and at the boundary
// samples. Analytic sources also carry the closed form so point evaluations
// (site centers, argmax overrides) are exact.
struct BackgroundFlow {
    ScalarField interior;
    std::vector<double> boundary;
    std::function<double(Point)> exact;

    double max_closure() const {
        double m = max_value(interior);
        for (double b : boundary) m = std::max(m, b);
        return m;
    }

    double min_closure() const {
        double m = min_value(interior);
        for (double b : boundary) m = std::min(m, b);
        return m;
    }

    double osc() const { return max_closure() - min_closure(); }

    void shift(double c) {
        for (double& v : interior.v) v += c;
        for (double& b : boundary) b += c;
        if (exact) {
            auto base = exact;
            exact = [base, c](Point p) { return base(p) + c; };
        }
    }

    // Point evaluation: exact when available, otherwise the nearer of the
    // closest node value and the interpolated boundary trace.
    double value_at(const Domain& d, Point p) const {
        if (exact) return exact(p);
        double best = 0.0, best_d = std::numeric_limits<double>::infinity();
        for (size_t n = 0; n < d.nodes.size(); ++n) {
            double dd = dist(d.nodes[n], p);
            if (dd < best_d) {
                best_d = dd;
                best = interior[n];
            }
        }
        double bd_dist;
        if (d.kind == DomainKind::disk)
            bd_dist = std::abs(1.0 - std::hypot(p.x, p.y));
        else {
            double cx = std::clamp(p.x, d.x0, d.x0 + d.width);
            double cy = std::clamp(p.y, d.y0, d.y0 + d.height);
            double inner = std::min(std::min(cx - d.x0, d.x0 + d.width - cx),
                                    std::min(cy - d.y0, d.y0 + d.height - cy));
            bd_dist = std::max(std::hypot(p.x - cx, p.y - cy), inner);
        }
        if (bd_dist < best_d)
            return interp_boundary(d, boundary,
                                   detail::boundary_arclength_of(d, p));
        return best;
    }
};

inline std::function<double(Point)> analytic_q_function(const std::string& name) {
    if (name == "x1") return [](Point p) { return p.x; };
    if (name == "x2") return [](Point p) { return p.y; };
    if (name == "x1sq_minus_x2sq")
        return [](Point p) { return p.x * p.x - p.y * p.y; };
    if (name == "two_x1x2") return [](Point p) { return 2.0 * p.x * p.y; };
    throw InvalidSpec("unknown analytic background '" + name +
                      "' (whitelist: x1, x2, x1sq_minus_x2sq, two_x1x2)");
}

inline BackgroundFlow make_analytic_q(const Domain& d, const std::string& name) {
    BackgroundFlow q;
    q.exact = analytic_q_function(name);
    q.interior = ScalarField(d);
    for (size_t n = 0; n < d.nodes.size(); ++n) q.interior[n] = q.exact(d.nodes[n]);
    q.boundary.resize(d.boundary.size());
    for (size_t k = 0; k < d.boundary.size(); ++k)
        q.boundary[k] = q.exact(d.boundary[k].pos);
    return q;
}

inline BackgroundFlow make_flux_q(const EllipticSolver& solver,
                                  const BoundaryFlux& flux) {
    const Domain& d = solver.domain();
    BackgroundFlow q;
    q.boundary = boundary_antiderivative(d, flux);
    q.interior = solver.dirichlet_extend(q.boundary);
    return q;
}

inline BackgroundFlow make_dirichlet_q(const EllipticSolver& solver,
                                       std::vector<double> bdata) {
    const Domain& d = solver.domain();
    if (bdata.size() != d.boundary.size())
        throw InvalidSpec("Dirichlet data size does not match boundary samples");
    BackgroundFlow q;
    q.boundary = std::move(bdata);
    q.interior = solver.dirichlet_extend(q.boundary);
    return q;
}

} // namespace steadyvort
