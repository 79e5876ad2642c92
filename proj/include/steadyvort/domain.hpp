#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "steadyvort/errors.hpp"

namespace steadyvort {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double dist(Point a, Point b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

enum class DomainKind { rectangle, disk };

inline const char* kind_name(DomainKind k) {
    return k == DomainKind::rectangle ? "rectangle" : "disk";
}

// One sample of the boundary curve, ordered counterclockwise.
// s is arclength from the starting point; normal is the outward unit normal.
struct BoundarySample {
    double s = 0.0;
    Point pos;
    Point normal;
};

struct DomainSpec {
    DomainKind kind = DomainKind::rectangle;
    double x0 = 0.0, y0 = 0.0;      // rectangle corner
    double width = 1.0, height = 1.0;
    double h = 0.1;                  // lattice spacing
};

// Discretized domain: interior lattice nodes plus a closed boundary polyline.
//
// Rectangle nodes sit at (x0 + i*h, y0 + j*h) strictly inside; the unit disk
// uses lattice points strictly inside radius 1 - h/2 so the 5-point stencil
// stays within one cell of the true boundary. Nodes are ordered row-major,
// y ascending then x ascending. The boundary sample list closes on itself:
// the last sample repeats the first position at s = perimeter.
struct Domain {
    DomainKind kind = DomainKind::rectangle;
    double h = 0.0;
    double cell_area = 0.0;          // h*h
    double x0 = 0.0, y0 = 0.0, width = 0.0, height = 0.0;

    double ox = 0.0, oy = 0.0;       // lattice origin: position = (ox + i*h, oy + j*h)
    int i_lo = 0, i_hi = 0, j_lo = 0, j_hi = 0;

    std::vector<Point> nodes;
    std::vector<std::pair<int, int>> node_ij;   // lattice coords per node
    std::vector<int> grid;                      // window lookup, -1 where no node

    std::vector<BoundarySample> boundary;
    double perimeter = 0.0;

    int window_nx() const { return i_hi - i_lo + 1; }
    int window_ny() const { return j_hi - j_lo + 1; }

    // Node index at lattice coordinates, or -1.
    int node_at(int i, int j) const {
        if (i < i_lo || i > i_hi || j < j_lo || j > j_hi) return -1;
        return grid[static_cast<size_t>(j - j_lo) * window_nx() + (i - i_lo)];
    }

    Point lattice_point(int i, int j) const {
        return {ox + i * h, oy + j * h};
    }

    double interior_area() const {
        return static_cast<double>(nodes.size()) * cell_area;
    }
};

struct VortexSite {
    Point center;
    double r0 = 0.0;
};

namespace detail {

// Count of lattice steps strictly inside a length, robust to the usual
// floating-point noise in len/h (aligned grids must not gain or drop a node).
inline int interior_count(double len, double h) {
    double m = len / h;
    return static_cast<int>(std::floor(m - 1e-9 * std::max(1.0, m)));
}

inline void build_rectangle(Domain& d, const DomainSpec& spec) {
    int nx = interior_count(spec.width, spec.h);
    int ny = interior_count(spec.height, spec.h);
    if (nx < 1 || ny < 1)
        throw SpacingTooCoarse("rectangle admits no interior node at h=" +
                               std::to_string(spec.h));
    d.ox = spec.x0;
    d.oy = spec.y0;
    d.i_lo = 1;
    d.i_hi = nx;
    d.j_lo = 1;
    d.j_hi = ny;
    d.grid.assign(static_cast<size_t>(nx) * ny, -1);
    for (int j = 1; j <= ny; ++j)
        for (int i = 1; i <= nx; ++i) {
            d.grid[static_cast<size_t>(j - 1) * nx + (i - 1)] =
                static_cast<int>(d.nodes.size());
            d.nodes.push_back(d.lattice_point(i, j));
            d.node_ij.emplace_back(i, j);
        }

    // Boundary: four edges counterclockwise from (x0, y0), closing sample at
    // s = perimeter repeating the start.
    const Point corner[4] = {{spec.x0, spec.y0},
                             {spec.x0 + spec.width, spec.y0},
                             {spec.x0 + spec.width, spec.y0 + spec.height},
                             {spec.x0, spec.y0 + spec.height}};
    const Point nrm[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
    const double elen[4] = {spec.width, spec.height, spec.width, spec.height};
    double s = 0.0;
    for (int e = 0; e < 4; ++e) {
        Point a = corner[e];
        Point b = corner[(e + 1) % 4];
        int nseg = std::max(1, static_cast<int>(
                                   std::ceil(elen[e] / spec.h - 1e-9)));
        for (int k = 0; k < nseg; ++k) {
            double t = static_cast<double>(k) / nseg;
            BoundarySample bs;
            bs.s = s + t * elen[e];
            bs.pos = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
            bs.normal = nrm[e];
            d.boundary.push_back(bs);
        }
        s += elen[e];
    }
    d.perimeter = 2.0 * (spec.width + spec.height);
    BoundarySample closing;
    closing.s = d.perimeter;
    closing.pos = corner[0];
    closing.normal = nrm[0];
    d.boundary.push_back(closing);
}

inline void build_disk(Domain& d, const DomainSpec& spec) {
    const double h = spec.h;
    const double r_in = 1.0 - 0.5 * h;
    if (r_in <= 0.0)
        throw SpacingTooCoarse("disk margin empty at h=" + std::to_string(h));
    const int M = static_cast<int>(std::floor(r_in / h));
    const double t = (r_in / h) * (r_in / h) * (1.0 - 1e-12);
    d.ox = 0.0;
    d.oy = 0.0;
    d.i_lo = -M;
    d.i_hi = M;
    d.j_lo = -M;
    d.j_hi = M;
    d.x0 = -1.0;
    d.y0 = -1.0;
    d.width = 2.0;
    d.height = 2.0;
    const int w = 2 * M + 1;
    d.grid.assign(static_cast<size_t>(w) * w, -1);
    for (int j = -M; j <= M; ++j)
        for (int i = -M; i <= M; ++i) {
            if (static_cast<double>(i) * i + static_cast<double>(j) * j >= t)
                continue;
            d.grid[static_cast<size_t>(j + M) * w + (i + M)] =
                static_cast<int>(d.nodes.size());
            d.nodes.push_back(d.lattice_point(i, j));
            d.node_ij.emplace_back(i, j);
        }
    if (d.nodes.empty())
        throw SpacingTooCoarse("disk admits no interior node at h=" +
                               std::to_string(h));

    const double two_pi = 2.0 * std::numbers::pi;
    int N = static_cast<int>(std::ceil(two_pi / h - 1e-9));
    d.perimeter = two_pi;
    for (int k = 0; k < N; ++k) {
        double th = two_pi * k / N;
        BoundarySample bs;
        bs.s = th;   // unit radius: arclength equals angle
        bs.pos = {std::cos(th), std::sin(th)};
        bs.normal = bs.pos;
        d.boundary.push_back(bs);
    }
    BoundarySample closing;
    closing.s = two_pi;
    closing.pos = {1.0, 0.0};
    closing.normal = {1.0, 0.0};
    d.boundary.push_back(closing);
}

} // namespace detail

inline Domain build_domain(const DomainSpec& spec) {
    if (!std::isfinite(spec.h) || spec.h <= 0.0)
        throw InvalidSpec("spacing h must be positive and finite");
    if (spec.kind == DomainKind::rectangle) {
        if (!std::isfinite(spec.width) || !std::isfinite(spec.height) ||
            !std::isfinite(spec.x0) || !std::isfinite(spec.y0) ||
            spec.width <= 0.0 || spec.height <= 0.0)
            throw InvalidSpec("rectangle needs finite corner and positive extents");
    }
    Domain d;
    d.kind = spec.kind;
    d.h = spec.h;
    d.cell_area = spec.h * spec.h;
    d.x0 = spec.x0;
    d.y0 = spec.y0;
    d.width = spec.width;
    d.height = spec.height;
    if (spec.kind == DomainKind::rectangle)
        detail::build_rectangle(d, spec);
    else
        detail::build_disk(d, spec);
    return d;
}

// Rebuild a domain from the parameters stored in a field-file header.
// For rectangles the interior node counts are authoritative (the node set is
// nx-by-ny regardless of how width/h round), so extents are reconstructed as
// (count+1)*h. Disks are determined by h alone.
inline Domain domain_from_grid(DomainKind kind, int nx, int ny, double h,
                               double x0, double y0) {
    DomainSpec spec;
    spec.kind = kind;
    spec.h = h;
    if (kind == DomainKind::rectangle) {
        if (nx < 1 || ny < 1) throw InvalidSpec("grid counts must be positive");
        spec.x0 = x0;
        spec.y0 = y0;
        spec.width = (nx + 1) * h;
        spec.height = (ny + 1) * h;
    }
    return build_domain(spec);
}

// Indices of nodes strictly inside the site's ball, ascending.
inline std::vector<int> ball_mask(const Domain& d, const VortexSite& site) {
    std::vector<int> out;
    const double r2 = site.r0 * site.r0;
    for (size_t n = 0; n < d.nodes.size(); ++n) {
        double dx = d.nodes[n].x - site.center.x;
        double dy = d.nodes[n].y - site.center.y;
        if (dx * dx + dy * dy < r2) out.push_back(static_cast<int>(n));
    }
    return out;
}

} // namespace steadyvort
