#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "steadyvort/errors.hpp"

namespace steadyvort {

enum class ProfileKind { power, table };

// Vorticity profile f together with its inverse and the primitive
// F(y) = integral of f^{-1} from 0 to y. The power family is
// f(s) = max(s,0)^p; tabulated profiles are piecewise linear in s
// (clamped below the table, extrapolated with the last slope above it)
// and inverted by swapping columns.
struct Profile {
    ProfileKind kind = ProfileKind::power;
    double p = 1.0;
    std::vector<double> ts, tf;   // table breakpoints, ts strictly increasing
    double delta0 = std::numeric_limits<double>::quiet_NaN();
    double delta1 = std::numeric_limits<double>::quiet_NaN();

    static Profile power(double p) {
        if (!std::isfinite(p) || p <= 0.0)
            throw InvalidSpec("power profile needs p > 0");
        Profile f;
        f.kind = ProfileKind::power;
        f.p = p;
        f.delta0 = 1.0 / (p + 1.0);
        f.delta1 = p / (p + 1.0);
        return f;
    }

    static Profile tabulated(std::vector<double> s, std::vector<double> fv) {
        if (s.size() != fv.size() || s.size() < 2)
            throw InvalidSpec("profile table needs two equal columns, >= 2 rows");
        for (size_t k = 0; k < s.size(); ++k) {
            if (!std::isfinite(s[k]) || !std::isfinite(fv[k]))
                throw InvalidSpec("profile table has non-finite entries");
            if (k > 0 && s[k] <= s[k - 1])
                throw InvalidSpec("profile table s column must be strictly increasing");
        }
        Profile f;
        f.kind = ProfileKind::table;
        f.ts = std::move(s);
        f.tf = std::move(fv);
        return f;
    }

    double f(double s) const {
        if (kind == ProfileKind::power)
            return s <= 0.0 ? 0.0 : std::pow(s, p);
        return eval_table(ts, tf, s);
    }

    double f_inv(double y) const {
        if (kind == ProfileKind::power)
            return y <= 0.0 ? 0.0 : std::pow(y, 1.0 / p);
        return eval_table(tf, ts, y);
    }

    // F(y) = \int_0^y f^{-1}; for the power family equals
    // (p/(p+1)) y^{(p+1)/p} on y >= 0.
    double F(double y) const {
        if (kind == ProfileKind::power)
            return y <= 0.0 ? 0.0 : p / (p + 1.0) * std::pow(y, (p + 1.0) / p);
        return integral_table(tf, ts, y);
    }

    // \int_0^s f, used by the hypothesis checks.
    double integral_f(double s) const {
        if (kind == ProfileKind::power)
            return s <= 0.0 ? 0.0 : std::pow(s, p + 1.0) / (p + 1.0);
        return integral_table(ts, tf, s);
    }

  private:
    // Piecewise-linear evaluation of y(x) through points (xs, ys):
    // clamped below xs.front(), last-slope extrapolation above xs.back().
    static double eval_table(const std::vector<double>& xs,
                             const std::vector<double>& ys, double x) {
        if (x <= xs.front()) return ys.front();
        size_t n = xs.size();
        if (x >= xs.back()) {
            double slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
            return ys[n - 1] + slope * (x - xs[n - 1]);
        }
        size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            size_t mid = (lo + hi) / 2;
            (xs[mid] <= x ? lo : hi) = mid;
        }
        double t = (x - xs[lo]) / (xs[lo + 1] - xs[lo]);
        return ys[lo] + t * (ys[lo + 1] - ys[lo]);
    }

    // Exact integral (trapezoid on breakpoints, exact for piecewise linear)
    // of the eval_table interpolant from 0 to x.
    static double integral_table(const std::vector<double>& xs,
                                 const std::vector<double>& ys, double x) {
        if (x <= 0.0) return 0.0;
        double acc = 0.0;
        double prev_x = 0.0;
        double prev_y = eval_table(xs, ys, 0.0);
        for (size_t k = 0; k < xs.size(); ++k) {
            if (xs[k] <= prev_x) continue;
            double seg_x = std::min(xs[k], x);
            double seg_y = eval_table(xs, ys, seg_x);
            acc += 0.5 * (prev_y + seg_y) * (seg_x - prev_x);
            prev_x = seg_x;
            prev_y = seg_y;
            if (seg_x >= x) return acc;
        }
        double end_y = eval_table(xs, ys, x);
        acc += 0.5 * (prev_y + end_y) * (x - prev_x);
        return acc;
    }
};

struct HypothesisCheck {
    bool pass = false;
    double worst = 0.0;
    std::string detail;
};

struct HypothesisReport {
    HypothesisCheck h1, h2, h3, h3prime;
    // Sampled bounds: delta0 is the largest ratio int_0^s f / (s f(s)),
    // delta1 the smallest ratio F(s) / (s f^{-1}(s)).
    double delta0 = std::numeric_limits<double>::quiet_NaN();
    double delta1 = std::numeric_limits<double>::quiet_NaN();
    bool exact_constants = false;   // power profiles: delta0, delta1 closed-form
    bool all_pass() const {
        return h1.pass && h2.pass && h3.pass && h3prime.pass;
    }
};

// Samples the profile hypotheses on (0, s_max]:
//   H1: f vanishes on (-inf, 0];
//   H2: f strictly increasing on [0, s_max];
//   H3: int_0^s f <= delta0 * s f(s) with delta0 < 1;
//   H3': F(s) >= delta1 * s f^{-1}(s) with delta1 > 0.
inline HypothesisReport check_hypotheses(const Profile& f, double s_max = 1.0,
                                         int n_samples = 64) {
    if (!std::isfinite(s_max) || s_max <= 0.0)
        throw InvalidSpec("s_max must be positive");
    n_samples = std::max(n_samples, 10);
    HypothesisReport rep;

    double scale = std::max(1.0, std::abs(f.f(s_max)));
    double worst1 = 0.0;
    for (int k = 0; k <= n_samples; ++k) {
        double s = -s_max * k / n_samples;   // includes s = 0
        worst1 = std::max(worst1, std::abs(f.f(s)));
    }
    rep.h1.pass = worst1 <= 1e-12 * scale;
    rep.h1.worst = worst1;
    rep.h1.detail = "max |f(s)| on s <= 0";

    double worst_inc = std::numeric_limits<double>::infinity();
    bool increasing = true;
    double prev = f.f(0.0);
    for (int k = 1; k <= n_samples; ++k) {
        double cur = f.f(s_max * k / n_samples);
        double inc = cur - prev;
        worst_inc = std::min(worst_inc, inc);
        if (inc <= 0.0) increasing = false;
        prev = cur;
    }
    rep.h2.pass = increasing;
    rep.h2.worst = worst_inc;
    rep.h2.detail = "min increment of f on [0, s_max]";

    double max_ratio0 = 0.0;
    double min_ratio1 = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= n_samples; ++k) {
        double s = s_max * k / n_samples;
        double fs = f.f(s);
        if (fs > 0.0)
            max_ratio0 = std::max(max_ratio0, f.integral_f(s) / (s * fs));
        double fi = f.f_inv(s);
        if (fi > 0.0)
            min_ratio1 = std::min(min_ratio1, f.F(s) / (s * fi));
    }
    rep.h3.pass = max_ratio0 > 0.0 && max_ratio0 < 1.0 - 1e-9;
    rep.h3.worst = max_ratio0;
    rep.h3.detail = "max ratio int f / (s f(s))";
    rep.h3prime.pass = std::isfinite(min_ratio1) && min_ratio1 > 1e-9;
    rep.h3prime.worst = min_ratio1;
    rep.h3prime.detail = "min ratio F / (s f^{-1}(s))";

    if (f.kind == ProfileKind::power) {
        rep.delta0 = f.delta0;
        rep.delta1 = f.delta1;
        rep.exact_constants = true;
    } else {
        rep.delta0 = max_ratio0;
        rep.delta1 = min_ratio1;
    }
    return rep;
}

enum class ScheduleKind { constant, power };

// Box-height schedule Lambda(kappa). The power family is a*kappa^(-beta);
// solver configurations require 0 <= beta < 1, but arbitrary beta can be
// constructed so the proxy checks can watch bad schedules fail.
struct StrengthSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    double a = 1.0;
    double beta = 0.0;
    double gamma0 = 1.0;   // witness exponent for the decay proxy

    static StrengthSchedule constant(double a) {
        if (!std::isfinite(a) || a <= 0.0)
            throw InvalidSpec("constant schedule needs a > 0");
        StrengthSchedule L;
        L.kind = ScheduleKind::constant;
        L.a = a;
        L.gamma0 = 1.0;
        return L;
    }

    static StrengthSchedule power(double a, double beta) {
        if (!std::isfinite(a) || a <= 0.0 || !std::isfinite(beta))
            throw InvalidSpec("power schedule needs a > 0 and finite beta");
        StrengthSchedule L;
        L.kind = ScheduleKind::power;
        L.a = a;
        L.beta = beta;
        L.gamma0 = 0.5 * (std::max(beta, 0.0) + 1.0);
        return L;
    }

    double value(double kappa) const {
        if (!std::isfinite(kappa) || kappa <= 0.0)
            throw InvalidKappa("kappa must be positive, got " +
                               std::to_string(kappa));
        if (kind == ScheduleKind::constant) return a;
        return a * std::pow(kappa, -beta);
    }
};

struct ScheduleReport {
    bool growth_pass = false;   // Lambda(k)/k increasing as kappa decreases
    bool decay_pass = false;    // Lambda(k)*k^gamma0 decreasing as kappa decreases
    double gamma0 = 0.0;
    std::string detail;
    bool all_pass() const { return growth_pass && decay_pass; }
};

// Dyadic proxy for the schedule limits: along kappa_j = 2^{-j},
// Lambda/kappa must rise and Lambda*kappa^gamma0 must fall, strictly.
inline ScheduleReport check_schedule(const StrengthSchedule& L, int depth = 20) {
    depth = std::max(depth, 2);
    ScheduleReport rep;
    rep.gamma0 = L.gamma0;
    bool growth = true, decay = true;
    double prev_growth = 0.0, prev_decay = 0.0;
    for (int j = 1; j <= depth; ++j) {
        double kappa = std::pow(0.5, j);
        double lam = L.value(kappa);
        double g = lam / kappa;
        double d = lam * std::pow(kappa, L.gamma0);
        if (j > 1) {
            if (g <= prev_growth) growth = false;
            if (d >= prev_decay) decay = false;
        }
        prev_growth = g;
        prev_decay = d;
    }
    rep.growth_pass = growth;
    rep.decay_pass = decay;
    rep.detail = "dyadic sweep j=1.." + std::to_string(depth);
    return rep;
}

} // namespace steadyvort
