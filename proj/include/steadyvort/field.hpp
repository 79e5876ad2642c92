#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "steadyvort/domain.hpp"

namespace steadyvort {

// Real-valued grid function: one value per interior node of a Domain.
struct ScalarField {
    const Domain* dom = nullptr;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Domain& d, double fill = 0.0)
        : dom(&d), v(d.nodes.size(), fill) {}
    ScalarField(const Domain& d, std::vector<double> values)
        : dom(&d), v(std::move(values)) {
        if (v.size() != d.nodes.size())
            throw InvalidSpec("field length does not match node count");
    }

    size_t size() const { return v.size(); }
    double& operator[](size_t n) { return v[n]; }
    double operator[](size_t n) const { return v[n]; }

    bool all_finite() const {
        return std::all_of(v.begin(), v.end(),
                           [](double x) { return std::isfinite(x); });
    }
};

struct VectorField {
    const Domain* dom = nullptr;
    std::vector<double> vx, vy;

    VectorField() = default;
    explicit VectorField(const Domain& d)
        : dom(&d), vx(d.nodes.size(), 0.0), vy(d.nodes.size(), 0.0) {}
};

// Midpoint-rule integral over the interior nodes.
inline double integral(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s * f.dom->cell_area;
}

// h^2-weighted inner product <a, b>.
inline double inner_h2(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (size_t n = 0; n < a.v.size(); ++n) s += a.v[n] * b.v[n];
    return s * a.dom->cell_area;
}

inline double sup_norm(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

inline double sup_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (size_t n = 0; n < a.v.size(); ++n)
        m = std::max(m, std::abs(a.v[n] - b.v[n]));
    return m;
}

inline double max_value(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : f.v) m = std::max(m, x);
    return m;
}

inline double min_value(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : f.v) m = std::min(m, x);
    return m;
}

} // namespace steadyvort
