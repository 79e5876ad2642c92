#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "steadyvort/config.hpp"

using namespace steadyvort;

namespace {

std::string resolve_output_dir(const RunConfig& cfg) {
    const char* env = std::getenv("STEADYVORT_OUTPUT_DIR");
    std::string dir = (env && *env) ? env : cfg.output_dir;
    if (dir.empty()) dir = ".";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string idx3(size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03zu", k);
    return buf;
}

int cmd_solve(const std::string& path) {
    RunConfig cfg = parse_config(path);
    if (cfg.mode == RunMode::sweep || cfg.mode == RunMode::multi_sweep)
        throw InvalidSpec("config describes a sweep; use the sweep command");
    Problem p = assemble(cfg);
    std::string dir = resolve_output_dir(cfg);

    Solution sol;
    double kappa_total = 0.0;
    bool feasible = false;
    if (cfg.mode == RunMode::single) {
        sol = maximize(*p.solver, p.q, cfg.profile, cfg.schedule, cfg.kappa,
                       cfg.controls);
        kappa_total = cfg.kappa;
        feasible = feasibility_check(sol.omega, cfg.kappa,
                                     cfg.schedule.value(cfg.kappa),
                                     cfg.controls.fp_tol)
                       .all_pass();
    } else {
        sol = maximize_multi(*p.solver, p.q, cfg.sites, cfg.alpha,
                             cfg.controls);
        for (const auto& s : cfg.sites) kappa_total += s.kappa;
        feasible = feasibility_check_multi(sol, cfg.sites, *p.domain,
                                           cfg.controls.fp_tol)
                       .all_pass();
        for (size_t i = 0; i < sol.site_omegas.size(); ++i)
            write_field(dir + "/omega_site" + std::to_string(i) + ".field",
                        sol.site_omegas[i]);
    }
    write_field(dir + "/omega.field", sol.omega);
    write_text_file(dir + "/solution.txt", sidecar_text(sol, kappa_total));

    std::cout << "solve: converged=" << (sol.converged ? 1 : 0)
              << " feasible=" << (feasible ? 1 : 0)
              << " kappa=" << fmt_g17(kappa_total)
              << " mu=" << fmt_g17(sol.mus.empty() ? sol.mu : sol.mus[0])
              << " iterations=" << sol.iterations
              << " residual=" << fmt_g17(sol.fixed_point_residual)
              << " patch_nodes=" << sol.patch_nodes
              << " energy=" << fmt_g17(sol.energy) << "\n";
    if (!sol.converged) return 2;
    if (!feasible) {
        std::cerr << "error: converged solution failed the feasibility check\n";
        return 1;
    }
    return 0;
}

SweepResult parallel_single_sweep(const RunConfig& cfg) {
    const size_t n = cfg.sweep_kappas.size();
    SweepResult out;
    out.rows.resize(n);
    out.solutions.resize(n);
    std::vector<std::future<void>> tasks;
    tasks.reserve(n);
    for (size_t k = 0; k < n; ++k) {
        tasks.push_back(std::async(std::launch::async, [&cfg, &out, k]() {
            double kappa = cfg.sweep_kappas[k];
            out.rows[k].kappa = kappa;
            try {
                Problem p = assemble(cfg);
                Solution sol = maximize(*p.solver, p.q, cfg.profile,
                                        cfg.schedule, kappa, cfg.controls);
                out.rows[k] = make_row(*p.solver, p.q, cfg.profile,
                                       cfg.schedule.value(kappa), kappa, sol,
                                       cfg.diag, p.q.max_closure(), nullptr);
                out.solutions[k] = std::move(sol);
            } catch (const Error& e) {
                out.rows[k].error = e.what();
            }
        }));
    }
    for (auto& t : tasks) t.get();
    out.trends = sweep_trends(out.rows);
    return out;
}

void print_trends(const std::string& label, const TrendFlags& t) {
    std::cout << label << ": converged=" << (t.all_rows_converged ? 1 : 0)
              << " qmax_minus_mu_dec=" << (t.qmax_minus_mu_decreasing ? 1 : 0)
              << " penalty_dec=" << (t.penalty_decreasing ? 1 : 0)
              << " pairing_dec=" << (t.pairing_decreasing ? 1 : 0)
              << " dist_dec=" << (t.dist_decreasing ? 1 : 0)
              << " patch_free_tail=" << (t.patch_free_tail ? 1 : 0) << "\n";
}

int cmd_sweep(const std::string& path) {
    RunConfig cfg = parse_config(path);
    std::string dir = resolve_output_dir(cfg);

    if (cfg.mode == RunMode::sweep) {
        SweepResult res;
        if (cfg.parallel_sweep) {
            res = parallel_single_sweep(cfg);
        } else {
            Problem p = assemble(cfg);
            res = kappa_sweep(*p.solver, p.q, cfg.profile, cfg.schedule,
                              cfg.sweep_kappas, cfg.controls, cfg.diag);
        }
        write_text_file(dir + "/sweep.csv", sweep_csv(res.rows));
        for (size_t k = 0; k < res.rows.size(); ++k) {
            if (!res.rows[k].solved) {
                std::cerr << "row " << k << " (kappa="
                          << fmt_g17(res.rows[k].kappa)
                          << ") failed: " << res.rows[k].error << "\n";
                continue;
            }
            write_field(dir + "/omega_" + idx3(k) + ".field",
                        res.solutions[k].omega);
        }
        print_trends("sweep", res.trends);
        return res.trends.all() ? 0 : 2;
    }
    if (cfg.mode == RunMode::multi_sweep) {
        Problem p = assemble(cfg);
        MultiSweepResult res =
            sweep_multi(*p.solver, p.q, cfg.sites, cfg.alpha,
                        cfg.sweep_scales, cfg.controls, cfg.diag);
        bool ok = true;
        for (size_t i = 0; i < res.site_rows.size(); ++i) {
            write_text_file(dir + "/sweep_site" + std::to_string(i) + ".csv",
                            sweep_csv(res.site_rows[i]));
            print_trends("site " + std::to_string(i), res.site_trends[i]);
            ok = ok && res.site_trends[i].all();
        }
        for (size_t k = 0; k < res.solutions.size(); ++k) {
            if (res.solutions[k].omega.dom == nullptr) continue;
            write_field(dir + "/omega_" + idx3(k) + ".field",
                        res.solutions[k].omega);
        }
        for (const auto& rows : res.site_rows)
            for (size_t k = 0; k < rows.size(); ++k)
                if (!rows[k].solved)
                    std::cerr << "scale row " << k
                              << " failed: " << rows[k].error << "\n";
        return ok ? 0 : 2;
    }
    throw InvalidSpec("config describes a single solve; use the solve command");
}

struct CheckRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

int cmd_verify(const std::string& path) {
    RunConfig cfg = parse_config(path);
    std::vector<CheckRow> rows;

    HypothesisReport hr = check_hypotheses(cfg.profile);
    rows.push_back({"H1", hr.h1.pass, hr.h1.detail + " = " +
                                          fmt_g17(hr.h1.worst)});
    rows.push_back({"H2", hr.h2.pass, hr.h2.detail + " = " +
                                          fmt_g17(hr.h2.worst)});
    rows.push_back({"H3", hr.h3.pass,
                    "delta0 = " + fmt_g17(hr.delta0) +
                        (hr.exact_constants ? " (exact)" : " (sampled)")});
    rows.push_back({"H3prime", hr.h3prime.pass,
                    "delta1 = " + fmt_g17(hr.delta1) +
                        (hr.exact_constants ? " (exact)" : " (sampled)")});

    ScheduleReport sr = check_schedule(cfg.schedule);
    rows.push_back({"schedule_growth", sr.growth_pass,
                    "Lambda/kappa rising, " + sr.detail});
    rows.push_back({"schedule_decay", sr.decay_pass,
                    "Lambda*kappa^" + fmt_g17(sr.gamma0) + " falling"});

    // elliptic self-tests on fixed internal grids
    {
        auto eig_err = [](double h) {
            DomainSpec spec;
            spec.kind = DomainKind::rectangle;
            spec.x0 = 0.0;
            spec.y0 = 0.0;
            spec.width = 1.0;
            spec.height = 1.0;
            spec.h = h;
            Domain d = build_domain(spec);
            EllipticSolver solver(d);
            const double pi = std::acos(-1.0);
            ScalarField w(d), exact(d);
            for (size_t n = 0; n < d.nodes.size(); ++n) {
                double sx = std::sin(pi * d.nodes[n].x);
                double sy = std::sin(pi * d.nodes[n].y);
                w[n] = 2.0 * pi * pi * sx * sy;
                exact[n] = sx * sy;
            }
            return sup_diff(solver.green_apply(w, Backend::fd), exact);
        };
        double e32 = eig_err(1.0 / 32.0), e64 = eig_err(1.0 / 64.0);
        double ratio = e32 / e64;
        rows.push_back({"elliptic_rect_convergence",
                        ratio >= 3.4 && ratio <= 4.6,
                        "error ratio h=1/32 vs 1/64 = " + fmt_g17(ratio)});

        DomainSpec spec;
        spec.kind = DomainKind::disk;
        spec.h = 1.0 / 32.0;
        Domain d = build_domain(spec);
        EllipticSolver solver(d);
        ScalarField one(d, 1.0), exact(d);
        for (size_t n = 0; n < d.nodes.size(); ++n) {
            double r2 = d.nodes[n].x * d.nodes[n].x +
                        d.nodes[n].y * d.nodes[n].y;
            exact[n] = 0.25 * (1.0 - r2);
        }
        double kerr = sup_diff(solver.green_apply(one, Backend::disk_kernel),
                               exact);
        rows.push_back({"disk_kernel_exact", kerr <= 4e-3,
                        "sup error vs (1-r^2)/4 = " + fmt_g17(kerr)});
        double agree = sup_diff(solver.green_apply(one, Backend::fd),
                                solver.green_apply(one, Backend::disk_kernel));
        rows.push_back({"disk_backend_agreement", agree <= 5.0 * spec.h,
                        "fd vs kernel sup = " + fmt_g17(agree)});
    }

    if (cfg.mode == RunMode::single) {
        Problem p = assemble(cfg);
        if (p.domain->nodes.size() <= 100) {
            Solution fixed = maximize(*p.solver, p.q, cfg.profile,
                                      cfg.schedule, cfg.kappa, cfg.controls);
            Solution oracle = oracle_maximize(*p.solver, p.q, cfg.profile,
                                              cfg.schedule, cfg.kappa,
                                              cfg.controls);
            rows.push_back({"oracle_energy",
                            fixed.energy >= oracle.energy - 1e-8,
                            "solver " + fmt_g17(fixed.energy) + " vs oracle " +
                                fmt_g17(oracle.energy)});
        } else {
            std::cout << "skip oracle_energy (grid has " +
                             std::to_string(p.domain->nodes.size()) +
                             " nodes, oracle limit 100)\n";
        }
    }

    bool all = true;
    for (const auto& r : rows) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.detail
                  << ")\n";
        all = all && r.pass;
    }
    return all ? 0 : 2;
}

int cmd_export(const std::string& field_path, const std::string& format) {
    FieldFile ff = read_field(field_path);
    if (format == "text")
        std::cout << field_to_text(ff.field);
    else
        std::cout << field_to_csv(ff.field);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"steady planar vortex maximizer"};
    app.require_subcommand(1);

    std::string config_path;
    std::string field_path;
    std::string format = "text";

    auto* solve = app.add_subcommand("solve", "run one solve from a config");
    solve->add_option("config", config_path, "config file")->required();
    auto* sweep = app.add_subcommand("sweep", "run a kappa sweep from a config");
    sweep->add_option("config", config_path, "config file")->required();
    auto* verify = app.add_subcommand(
        "verify", "hypothesis checks, elliptic self-tests, oracle comparison");
    verify->add_option("config", config_path, "config file")->required();
    auto* exp = app.add_subcommand("export", "re-emit a field file");
    exp->add_option("--field", field_path, "field file")->required();
    exp->add_option("--format", format, "text or csv")
        ->check(CLI::IsMember({"text", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) return cmd_solve(config_path);
        if (sweep->parsed()) return cmd_sweep(config_path);
        if (verify->parsed()) return cmd_verify(config_path);
        return cmd_export(field_path, format);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
