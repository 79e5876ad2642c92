#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "steadyvort/background.hpp"
#include "steadyvort/elliptic.hpp"

using namespace steadyvort;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

DomainSpec rect01(double h) {
    DomainSpec s;
    s.kind = DomainKind::rectangle;
    s.x0 = 0.0;
    s.y0 = 0.0;
    s.width = 1.0;
    s.height = 1.0;
    s.h = h;
    return s;
}

DomainSpec disk_spec(double h) {
    DomainSpec s;
    s.kind = DomainKind::disk;
    s.h = h;
    return s;
}

// Eigenvalue of the 5-point Laplacian for sin(pi x) sin(pi y) on the unit
// square with spacing h.
double lambda_h(double h) {
    return 4.0 * (1.0 - std::cos(pi * h)) / (h * h);
}

double sinsin_error(double h) {
    Domain d = build_domain(rect01(h));
    EllipticSolver solver(d);
    ScalarField w(d);
    for (size_t n = 0; n < d.nodes.size(); ++n)
        w[n] = 2.0 * pi * pi * std::sin(pi * d.nodes[n].x) *
               std::sin(pi * d.nodes[n].y);
    ScalarField psi = solver.green_apply(w);
    double err = 0.0;
    for (size_t n = 0; n < d.nodes.size(); ++n)
        err = std::max(err, std::abs(psi[n] - std::sin(pi * d.nodes[n].x) *
                                                  std::sin(pi * d.nodes[n].y)));
    return err;
}

} // namespace

TEST_CASE("discrete eigenfunction is reproduced exactly", "[elliptic]") {
    Domain d = build_domain(rect01(1.0 / 16));
    EllipticSolver solver(d);
    ScalarField w(d);
    for (size_t n = 0; n < d.nodes.size(); ++n)
        w[n] = 2.0 * pi * pi * std::sin(pi * d.nodes[n].x) *
               std::sin(pi * d.nodes[n].y);
    ScalarField psi = solver.green_apply(w);
    // G_h maps the discrete eigenvector to itself scaled by 1/lambda_h, so
    // the only error left is the linear solve itself.
    double scale = 2.0 * pi * pi / lambda_h(d.h);
    double err = 0.0;
    for (size_t n = 0; n < d.nodes.size(); ++n)
        err = std::max(err, std::abs(psi[n] - scale * w[n] / (2.0 * pi * pi)));
    CHECK(err <= 1e-10);
}

TEST_CASE("green operator is second order on the square", "[elliptic]") {
    double e16 = sinsin_error(1.0 / 16);
    double e32 = sinsin_error(1.0 / 32);
    CAPTURE(e16, e32);
    CHECK(e16 / e32 >= 3.5);
    CHECK(e16 / e32 <= 4.5);
    CHECK(e16 <= 1.5 * pi * pi / 12.0 / 256.0);   // ~ (pi h)^2 / 12 with slack
}

TEST_CASE("dirichlet extension of constant and linear data is exact",
          "[elliptic]") {
    Domain d = build_domain(rect01(1.0 / 8));
    EllipticSolver solver(d);

    std::vector<double> cdata(d.boundary.size(), 3.25);
    ScalarField u = solver.dirichlet_extend(cdata);
    for (size_t n = 0; n < d.nodes.size(); ++n)
        CHECK(std::abs(u[n] - 3.25) <= 1e-12);

    // x + 2y is discrete harmonic and its trace is piecewise linear along
    // each edge, so the extension reproduces it to solver precision
    std::vector<double> ldata(d.boundary.size());
    for (size_t k = 0; k < d.boundary.size(); ++k)
        ldata[k] = d.boundary[k].pos.x + 2.0 * d.boundary[k].pos.y;
    ScalarField v = solver.dirichlet_extend(ldata);
    double err = 0.0;
    for (size_t n = 0; n < d.nodes.size(); ++n)
        err = std::max(err, std::abs(v[n] - (d.nodes[n].x + 2.0 * d.nodes[n].y)));
    CHECK(err <= 1e-11);

    CHECK_THROWS_AS(solver.dirichlet_extend(std::vector<double>(3, 0.0)),
                    InvalidSpec);
}

TEST_CASE("dirichlet extension obeys the maximum principle", "[elliptic]") {
    Domain d = build_domain(disk_spec(0.2));
    EllipticSolver solver(d);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 2.0);
    std::vector<double> data(d.boundary.size());
    for (auto& x : data) x = unif(rng);
    data.back() = data.front();
    ScalarField u = solver.dirichlet_extend(data);
    double lo = *std::min_element(data.begin(), data.end());
    double hi = *std::max_element(data.begin(), data.end());
    for (size_t n = 0; n < d.nodes.size(); ++n) {
        CHECK(u[n] >= lo - 1e-12);
        CHECK(u[n] <= hi + 1e-12);
    }
}

TEST_CASE("disk kernel matches the quadratic bowl", "[elliptic]") {
    Domain d = build_domain(disk_spec(1.0 / 16));
    EllipticSolver solver(d);
    ScalarField one(d, 1.0);

    ScalarField psi_k = solver.green_apply(one, Backend::disk_kernel);
    double err_k = 0.0;
    for (size_t n = 0; n < d.nodes.size(); ++n) {
        double r2 = d.nodes[n].x * d.nodes[n].x + d.nodes[n].y * d.nodes[n].y;
        err_k = std::max(err_k, std::abs(psi_k[n] - 0.25 * (1.0 - r2)));
    }
    CAPTURE(err_k);
    CHECK(err_k <= 2e-2);

    ScalarField psi_fd = solver.green_apply(one, Backend::fd);
    CHECK(sup_diff(psi_fd, psi_k) <= 5.0 * d.h);
}

TEST_CASE("both backends are symmetric", "[elliptic]") {
    Domain d = build_domain(disk_spec(0.2));
    EllipticSolver solver(d);
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    ScalarField w1(d), w2(d);
    for (size_t n = 0; n < d.nodes.size(); ++n) {
        w1[n] = unif(rng);
        w2[n] = unif(rng);
    }
    for (Backend b : {Backend::fd, Backend::disk_kernel}) {
        double a12 = inner_h2(solver.green_apply(w1, b), w2);
        double a21 = inner_h2(w1, solver.green_apply(w2, b));
        CHECK(std::abs(a12 - a21) <= 1e-12 * (std::abs(a12) + 1.0));
    }
}

TEST_CASE("kernel backend rejects rectangles", "[elliptic]") {
    Domain d = build_domain(rect01(0.25));
    EllipticSolver solver(d);
    ScalarField w(d, 1.0);
    CHECK_THROWS_AS(solver.green_apply(w, Backend::disk_kernel),
                    BackendMismatch);
}

TEST_CASE("field checks on the solver entry points", "[elliptic]") {
    Domain d1 = build_domain(rect01(0.25));
    Domain d2 = build_domain(rect01(0.25));
    EllipticSolver solver(d1);
    ScalarField wrong(d2, 1.0);
    CHECK_THROWS_AS(solver.green_apply(wrong), InvalidSpec);
    ScalarField bad(d1, 1.0);
    bad[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(solver.green_apply(bad), InvalidSpec);
}

TEST_CASE("flux antiderivative is zero mean and closes", "[elliptic]") {
    Domain d = build_domain(rect01(1.0 / 8));
    BoundaryFlux flux;
    flux.g.resize(d.boundary.size());
    for (size_t k = 0; k < d.boundary.size(); ++k)
        flux.g[k] = std::sin(2.0 * pi * d.boundary[k].s / d.perimeter);
    auto data = boundary_antiderivative(d, flux);
    REQUIRE(data.size() == d.boundary.size());
    CHECK(data.back() == data.front());
    double mean = 0.0;
    for (size_t k = 0; k + 1 < data.size(); ++k)
        mean += 0.5 * (data[k] + data[k + 1]) *
                (d.boundary[k + 1].s - d.boundary[k].s);
    CHECK(std::abs(mean / d.perimeter) <= 1e-12);
}

TEST_CASE("nonzero circulation is rejected", "[background]") {
    Domain d = build_domain(disk_spec(0.25));
    EllipticSolver solver(d);
    BoundaryFlux flux;
    flux.g.assign(d.boundary.size(), 1.0);
    CHECK_THROWS_AS(make_flux_q(solver, flux), CompatibilityViolation);
    BoundaryFlux bad;
    bad.g.assign(3, 0.0);
    CHECK_THROWS_AS(make_flux_q(solver, bad), InvalidSpec);
}

TEST_CASE("tangential flux -sin(theta) recovers q = x1", "[background]") {
    Domain d = build_domain(disk_spec(1.0 / 16));
    EllipticSolver solver(d);
    BoundaryFlux flux;
    flux.g.resize(d.boundary.size());
    for (size_t k = 0; k < d.boundary.size(); ++k)
        flux.g[k] = -d.boundary[k].pos.y;   // -sin(theta) on the unit circle
    BackgroundFlow q = make_flux_q(solver, flux);

    double err = 0.0;
    for (size_t n = 0; n < d.nodes.size(); ++n)
        err = std::max(err, std::abs(q.interior[n] - d.nodes[n].x));
    CAPTURE(err);
    CHECK(err <= 0.05);

    // velocity of the background alone is perp-grad q ~ (0, -1); check away
    // from the boundary where central differences are clean
    VectorField v = solver.perp_gradient(q.interior);
    double verr = 0.0;
    for (size_t n = 0; n < d.nodes.size(); ++n) {
        double r = std::hypot(d.nodes[n].x, d.nodes[n].y);
        if (r > 1.0 - 3.0 * d.h) continue;
        verr = std::max(verr, std::hypot(v.vx[n] - 0.0, v.vy[n] + 1.0));
    }
    CAPTURE(verr);
    CHECK(verr <= 0.05);

    // boundary trace is cos(theta) up to the quadrature of the antiderivative
    double berr = 0.0;
    for (size_t k = 0; k < d.boundary.size(); ++k)
        berr = std::max(berr, std::abs(q.boundary[k] - d.boundary[k].pos.x));
    CAPTURE(berr);
    CHECK(berr <= 5e-3);
}

TEST_CASE("analytic backgrounds", "[background]") {
    Domain d = build_domain(disk_spec(0.25));
    BackgroundFlow q = make_analytic_q(d, "x1");
    for (size_t n = 0; n < d.nodes.size(); ++n)
        CHECK(q.interior[n] == d.nodes[n].x);
    CHECK(q.max_closure() == Approx(1.0).margin(1e-15));
    CHECK(q.min_closure() == Approx(-1.0).margin(1e-15));
    CHECK(q.osc() == Approx(2.0).margin(1e-15));
    CHECK(q.value_at(d, {0.3, 0.4}) == Approx(0.3));

    q.shift(3.0);
    CHECK(q.max_closure() == Approx(4.0).margin(1e-15));
    CHECK(q.value_at(d, {0.3, 0.4}) == Approx(3.3));

    CHECK(analytic_q_function("x1sq_minus_x2sq")({0.5, -0.25}) ==
          Approx(0.1875));
    CHECK(analytic_q_function("two_x1x2")({0.5, -0.25}) == Approx(-0.25));
    CHECK(analytic_q_function("x2")({0.5, -0.25}) == Approx(-0.25));
    CHECK_THROWS_AS(analytic_q_function("xx"), InvalidSpec);

    EllipticSolver solver(d);
    CHECK_THROWS_AS(make_dirichlet_q(solver, std::vector<double>(2, 0.0)),
                    InvalidSpec);
}

TEST_CASE("value_at falls back to nodes and boundary trace", "[background]") {
    Domain d = build_domain(disk_spec(1.0 / 16));
    EllipticSolver solver(d);
    BoundaryFlux flux;
    flux.g.resize(d.boundary.size());
    for (size_t k = 0; k < d.boundary.size(); ++k)
        flux.g[k] = -d.boundary[k].pos.y;
    BackgroundFlow q = make_flux_q(solver, flux);
    REQUIRE_FALSE(static_cast<bool>(q.exact));
    CHECK(q.value_at(d, {0.999, 0.0}) == Approx(1.0).margin(0.05));
    CHECK(q.value_at(d, {0.0, 0.0}) == Approx(0.0).margin(0.05));
    CHECK(q.value_at(d, {-0.999, 0.0}) == Approx(-1.0).margin(0.05));
}
