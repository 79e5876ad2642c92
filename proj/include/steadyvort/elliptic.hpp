#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "steadyvort/domain.hpp"
#include "steadyvort/field.hpp"

namespace steadyvort {

enum class Backend { fd, disk_kernel };

inline const char* backend_name(Backend b) {
    return b == Backend::fd ? "fd" : "disk-kernel";
}

// Tangential boundary data g at the domain's boundary samples (one value per
// sample, including the closing sample). Compatibility requires the loop
// integral of g to vanish.
struct BoundaryFlux {
    std::vector<double> g;
};

namespace detail {

inline double rect_boundary_arclength(const Domain& d, Point p) {
    double px = std::clamp(p.x, d.x0, d.x0 + d.width);
    double py = std::clamp(p.y, d.y0, d.y0 + d.height);
    double db = py - d.y0;
    double dr = d.x0 + d.width - px;
    double dt = d.y0 + d.height - py;
    double dl = px - d.x0;
    double m = std::min(std::min(db, dr), std::min(dt, dl));
    if (m == db) return px - d.x0;
    if (m == dr) return d.width + (py - d.y0);
    if (m == dt) return d.width + d.height + (d.x0 + d.width - px);
    return 2.0 * d.width + d.height + (d.y0 + d.height - py);
}

inline double boundary_arclength_of(const Domain& d, Point p) {
    if (d.kind == DomainKind::rectangle) return rect_boundary_arclength(d, p);
    double th = std::atan2(p.y, p.x);
    if (th < 0.0) th += 2.0 * std::numbers::pi;
    return th;
}

} // namespace detail

// Linear interpolation of per-sample boundary data at arclength s.
inline double interp_boundary(const Domain& d, const std::vector<double>& data,
                              double s) {
    const auto& bd = d.boundary;
    if (s <= bd.front().s) return data.front();
    if (s >= bd.back().s) return data.back();
    size_t lo = 0, hi = bd.size() - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        (bd[mid].s <= s ? lo : hi) = mid;
    }
    double t = (s - bd[lo].s) / (bd[lo + 1].s - bd[lo].s);
    return data[lo] + t * (data[lo + 1] - data[lo]);
}

// Cumulative antiderivative of a boundary flux along arclength, normalized to
// zero mean over the boundary. This is the Dirichlet trace of the harmonic
// background field whose rotated gradient has normal trace g.
inline std::vector<double> boundary_antiderivative(const Domain& d,
                                                   const BoundaryFlux& flux) {
    const auto& bd = d.boundary;
    if (flux.g.size() != bd.size())
        throw InvalidSpec("flux sample count does not match boundary");
    double gmax = 0.0;
    for (double g : flux.g) {
        if (!std::isfinite(g)) throw InvalidSpec("flux values must be finite");
        gmax = std::max(gmax, std::abs(g));
    }
    std::vector<double> data(bd.size(), 0.0);
    for (size_t k = 1; k < bd.size(); ++k)
        data[k] = data[k - 1] + 0.5 * (flux.g[k - 1] + flux.g[k]) *
                                    (bd[k].s - bd[k - 1].s);
    double loop = data.back();
    if (std::abs(loop) > 1e-10 * d.perimeter * std::max(gmax, 1e-300))
        throw CompatibilityViolation(
            "flux has nonzero circulation: loop integral = " +
            std::to_string(loop));
    double mean = 0.0;
    for (size_t k = 0; k + 1 < bd.size(); ++k)
        mean += 0.5 * (data[k] + data[k + 1]) * (bd[k + 1].s - bd[k].s);
    mean /= d.perimeter;
    for (double& v : data) v -= mean;
    data.back() = data.front();   // closing sample carries the same point
    return data;
}

// Zero-Dirichlet 5-point Laplacian solver with a cached factorization, plus
// the dense method-of-images kernel for the unit disk. Construct once per
// Domain and reuse; apply methods are const.
class EllipticSolver {
  public:
    explicit EllipticSolver(const Domain& d) : dom_(&d) {
        const int n = static_cast<int>(d.nodes.size());
        const double ih2 = 1.0 / (d.h * d.h);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(n) * 5);
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int m = 0; m < n; ++m) {
            auto [i, j] = d.node_ij[m];
            trip.emplace_back(m, m, 4.0 * ih2);
            for (int k = 0; k < 4; ++k) {
                int nb = d.node_at(i + di[k], j + dj[k]);
                if (nb >= 0) {
                    trip.emplace_back(m, nb, -ih2);
                } else {
                    Point p = d.lattice_point(i + di[k], j + dj[k]);
                    ghosts_.push_back({m, detail::boundary_arclength_of(d, p)});
                }
            }
        }
        A_.resize(n, n);
        A_.setFromTriplets(trip.begin(), trip.end());
        for (int j = 0; j < A_.outerSize(); ++j) {
            double col = 0.0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
                col += std::abs(it.value());
            anorm_ = std::max(anorm_, col);
        }
        ldlt_.compute(A_);
        if (ldlt_.info() != Eigen::Success)
            throw SolveFailure("Laplacian factorization failed");
        if (d.kind == DomainKind::disk) selfcell_ = log_selfcell(d.h);
    }

    const Domain& domain() const { return *dom_; }

    // psi = G omega: -Lap psi = omega, psi = 0 on the boundary.
    ScalarField green_apply(const ScalarField& omega,
                            Backend backend = Backend::fd) const {
        require_field(omega);
        if (backend == Backend::disk_kernel) return kernel_apply(omega);
        Eigen::VectorXd b(omega.size());
        for (size_t m = 0; m < omega.size(); ++m) b[m] = omega[m];
        return solve_checked(b);
    }

    // Discrete harmonic extension of Dirichlet data given at boundary samples.
    ScalarField dirichlet_extend(const std::vector<double>& bdata) const {
        if (bdata.size() != dom_->boundary.size())
            throw InvalidSpec("boundary data size does not match sample count");
        for (double v : bdata)
            if (!std::isfinite(v))
                throw InvalidSpec("boundary data must be finite");
        Eigen::VectorXd b = Eigen::VectorXd::Zero(dom_->nodes.size());
        const double ih2 = 1.0 / (dom_->h * dom_->h);
        for (const auto& g : ghosts_)
            b[g.node] += ih2 * interp_boundary(*dom_, bdata, g.s);
        return solve_checked(b);
    }

    ScalarField harmonic_from_flux(const BoundaryFlux& flux) const {
        return dirichlet_extend(boundary_antiderivative(*dom_, flux));
    }

    // Rotated gradient (d2 U, -d1 U) by central differences, one-sided where a
    // neighbor is missing.
    VectorField perp_gradient(const ScalarField& U) const {
        require_field(U);
        const Domain& d = *dom_;
        VectorField v(d);
        for (size_t m = 0; m < U.size(); ++m) {
            auto [i, j] = d.node_ij[m];
            double dx = one_dim_deriv(U, static_cast<int>(m), d.node_at(i - 1, j),
                                      d.node_at(i + 1, j));
            double dy = one_dim_deriv(U, static_cast<int>(m), d.node_at(i, j - 1),
                                      d.node_at(i, j + 1));
            v.vx[m] = dy;
            v.vy[m] = -dx;
        }
        return v;
    }

    // v = perp-grad(q + G omega).
    VectorField velocity_field(const ScalarField& omega, const ScalarField& q,
                               Backend backend = Backend::fd) const {
        ScalarField u = green_apply(omega, backend);
        for (size_t m = 0; m < u.size(); ++m) u[m] += q[m];
        return perp_gradient(u);
    }

  private:
    struct Ghost {
        int node;
        double s;
    };

    void require_field(const ScalarField& f) const {
        if (f.dom != dom_)
            throw InvalidSpec("field belongs to a different domain");
        if (!f.all_finite()) throw InvalidSpec("field values must be finite");
    }

    // r = b - A x accumulated in extended precision. A double-precision
    // residual bottoms out near eps*|A||x|, which masks whether refinement
    // actually worked once the grid passes ~100k nodes.
    Eigen::VectorXd residual_ext(const Eigen::VectorXd& b,
                                 const Eigen::VectorXd& x) const {
        std::vector<long double> acc(b.size());
        for (Eigen::Index m = 0; m < b.size(); ++m) acc[m] = b[m];
        for (int j = 0; j < A_.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
                acc[it.row()] -= static_cast<long double>(it.value()) * x[j];
        Eigen::VectorXd r(b.size());
        for (Eigen::Index m = 0; m < b.size(); ++m)
            r[m] = static_cast<double>(acc[m]);
        return r;
    }

    // Relative residual in the normwise backward-error sense,
    // |b - Ax| / (|A||x| + |b|). Normalizing by |b| alone is unattainable in
    // double precision past ~1e5 nodes: rounding x itself already leaves
    // |b - Ax| near eps |A||x|, which outgrows 1e-12 |b| for concentrated
    // vorticity on fine grids.
    double rel_residual(const Eigen::VectorXd& b,
                        const Eigen::VectorXd& x) const {
        return residual_ext(b, x).norm() / (anorm_ * x.norm() + b.norm());
    }

    ScalarField solve_checked(const Eigen::VectorXd& b) const {
        Eigen::VectorXd x = ldlt_.solve(b);
        if (b.norm() > 0.0) {
            // A single factored solve leaves a residual near eps * cond(A);
            // iterative refinement brings it down to eps level.
            double rel = rel_residual(b, x);
            for (int pass = 0; pass < 3 && rel > 1e-15; ++pass) {
                x += ldlt_.solve(residual_ext(b, x));
                rel = rel_residual(b, x);
            }
            if (!(rel <= 1e-12)) {
                char msg[96];
                std::snprintf(msg, sizeof msg,
                              "solve residual %.3e exceeds 1e-12", rel);
                throw SolveFailure(msg);
            }
        }
        ScalarField out(*dom_);
        for (size_t m = 0; m < out.size(); ++m) out[m] = x[m];
        return out;
    }

    double one_dim_deriv(const ScalarField& U, int m, int lo, int hi) const {
        const double h = dom_->h;
        if (lo >= 0 && hi >= 0) return (U[hi] - U[lo]) / (2.0 * h);
        if (hi >= 0) return (U[hi] - U[m]) / h;
        if (lo >= 0) return (U[m] - U[lo]) / h;
        return 0.0;
    }

    // Midpoint 16x16 quadrature of -(1/2pi) ln|z| over one centered cell.
    static double log_selfcell(double h) {
        const int q = 16;
        double acc = 0.0;
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                double zx = ((a + 0.5) / q - 0.5) * h;
                double zy = ((b + 0.5) / q - 0.5) * h;
                acc += -std::log(std::hypot(zx, zy));
            }
        return acc / (2.0 * std::numbers::pi) * (h / q) * (h / q);
    }

    // Dense image-kernel sum, diagonal from the cell quadrature plus the
    // smooth image term at the node.
    ScalarField kernel_apply(const ScalarField& omega) const {
        const Domain& d = *dom_;
        if (d.kind != DomainKind::disk)
            throw BackendMismatch("disk-kernel backend requires the unit disk");
        const int n = static_cast<int>(d.nodes.size());
        const double c = -1.0 / (4.0 * std::numbers::pi);
        const double h2 = d.cell_area;
        std::vector<double> r2(n);
        for (int m = 0; m < n; ++m) {
            const Point& p = d.nodes[m];
            r2[m] = p.x * p.x + p.y * p.y;
        }
        ScalarField psi(d);
        for (int i = 0; i < n; ++i) {
            const Point pi = d.nodes[i];
            double acc = 0.0;
            for (int j = 0; j < i; ++j) {
                const Point pj = d.nodes[j];
                double ddx = pi.x - pj.x;
                double ddy = pi.y - pj.y;
                double dd = ddx * ddx + ddy * ddy;
                double mm = 1.0 - 2.0 * (pi.x * pj.x + pi.y * pj.y) +
                            r2[i] * r2[j];
                double k = c * std::log(dd / mm);
                acc += k * omega[j];
                psi[j] += k * omega[i] * h2;
            }
            psi[i] += acc * h2 +
                      omega[i] * (selfcell_ +
                                  h2 / (2.0 * std::numbers::pi) *
                                      std::log(1.0 - r2[i]));
        }
        return psi;
    }

    const Domain* dom_;
    Eigen::SparseMatrix<double> A_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    std::vector<Ghost> ghosts_;
    double anorm_ = 0.0;
    double selfcell_ = 0.0;
};

} // namespace steadyvort
