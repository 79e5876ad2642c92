#pragma once

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "steadyvort/diagnostics.hpp"

namespace steadyvort {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline double parse_double(const std::string& tok, const std::string& where) {
    try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size())
            throw ParseError("trailing characters in number '" + tok +
                             "' (" + where + ")");
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("bad number '" + tok + "' (" + where + ")");
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// field files: header `nx ny h x0 y0 kind`, then one node value per line in
// domain node order, 17 significant digits throughout.
// ---------------------------------------------------------------------------

inline std::string field_to_text(const ScalarField& f) {
    const Domain& d = *f.dom;
    std::ostringstream out;
    out << d.window_nx() << ' ' << d.window_ny() << ' ' << fmt_g17(d.h) << ' '
        << fmt_g17(d.x0) << ' ' << fmt_g17(d.y0) << ' ' << kind_name(d.kind)
        << '\n';
    for (double v : f.v) out << fmt_g17(v) << '\n';
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << body;
    if (!out) throw IoError("write failed: " + path);
}

inline void write_field(const std::string& path, const ScalarField& f) {
    write_text_file(path, field_to_text(f));
}

struct FieldFile {
    std::unique_ptr<Domain> domain;
    ScalarField field;
};

inline FieldFile read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header))
        throw ParseError("empty field file: " + path);
    std::istringstream hs(header);
    std::string snx, sny, sh, sx0, sy0, skind;
    if (!(hs >> snx >> sny >> sh >> sx0 >> sy0 >> skind))
        throw ParseError("bad field header '" + header + "' in " + path);
    int nx = static_cast<int>(detail::parse_double(snx, "header nx"));
    int ny = static_cast<int>(detail::parse_double(sny, "header ny"));
    double h = detail::parse_double(sh, "header h");
    double x0 = detail::parse_double(sx0, "header x0");
    double y0 = detail::parse_double(sy0, "header y0");
    DomainKind kind;
    if (skind == "rectangle")
        kind = DomainKind::rectangle;
    else if (skind == "disk")
        kind = DomainKind::disk;
    else
        throw ParseError("unknown domain kind '" + skind + "' in " + path);

    FieldFile out;
    out.domain = std::make_unique<Domain>(
        domain_from_grid(kind, nx, ny, h, x0, y0));
    if (out.domain->window_nx() != nx || out.domain->window_ny() != ny)
        throw ParseError("field header grid " + std::to_string(nx) + "x" +
                         std::to_string(ny) + " does not match rebuilt domain");
    std::vector<double> vals;
    vals.reserve(out.domain->nodes.size());
    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        vals.push_back(detail::parse_double(
            line, path + ":" + std::to_string(lineno)));
    }
    if (vals.size() != out.domain->nodes.size())
        throw ParseError("field file has " + std::to_string(vals.size()) +
                         " values, domain has " +
                         std::to_string(out.domain->nodes.size()) + " nodes");
    out.field = ScalarField(*out.domain, std::move(vals));
    return out;
}

inline std::string field_to_csv(const ScalarField& f) {
    std::ostringstream out;
    out << "x,y,value\n";
    for (size_t n = 0; n < f.size(); ++n)
        out << fmt_g17(f.dom->nodes[n].x) << ',' << fmt_g17(f.dom->nodes[n].y)
            << ',' << fmt_g17(f[n]) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// sidecar and CSV
// ---------------------------------------------------------------------------

inline std::string sidecar_text(const Solution& sol, double kappa) {
    std::ostringstream out;
    if (sol.mus.empty())
        out << "mu=" << fmt_g17(sol.mu) << '\n';
    else
        for (size_t i = 0; i < sol.mus.size(); ++i)
            out << "mu_" << i << '=' << fmt_g17(sol.mus[i]) << '\n';
    out << "kappa=" << fmt_g17(kappa) << '\n';
    out << "iterations=" << sol.iterations << '\n';
    out << "converged=" << (sol.converged ? 1 : 0) << '\n';
    out << "patch_nodes=" << sol.patch_nodes << '\n';
    return out.str();
}

// Rows that failed to solve are omitted; converged=0 rows stay visible.
inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "kappa,mu,qmax_minus_mu,supp_diameter,supp_dist_to_S,patch_nodes,"
           "penalty_over_kappa,pairing_over_kappa,weak_residual,energy,"
           "iterations,converged\n";
    for (const auto& r : rows) {
        if (!r.solved) continue;
        out << fmt_g17(r.kappa) << ',' << fmt_g17(r.mu) << ','
            << fmt_g17(r.qmax_minus_mu) << ',' << fmt_g17(r.supp_diameter)
            << ',' << fmt_g17(r.supp_dist_to_S) << ',' << r.patch_nodes << ','
            << fmt_g17(r.penalty_over_kappa) << ','
            << fmt_g17(r.pairing_over_kappa) << ','
            << fmt_g17(r.weak_residual) << ',' << fmt_g17(r.energy) << ','
            << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
    }
    return out.str();
}

} // namespace steadyvort
