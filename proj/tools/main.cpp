// Command-line driver: `solve` runs a refinement study for one of the
// benchmark problems, `diagnose` reports mesh structure indicators.

#include "scfem/scfem.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

int run_solve(scfem::StudyConfig cfg, const std::vector<std::string>& methods) {
    for (const std::string& meth : methods) {
        if (meth == "cr") cfg.cr = true;
        else if (meth == "rt") cfg.rt = true;
        else if (meth == "morley") cfg.morley = true;
        else if (meth == "morley-modified") cfg.morley_modified = true;
        else if (meth == "hhj") cfg.hhj = true;
        else {
            std::cerr << "unknown method: " << meth << "\n";
            return 1;
        }
    }
    if (cfg.problem == "poisson" && (cfg.morley || cfg.morley_modified || cfg.hhj)) {
        std::cerr << "plate methods requested for the poisson problem\n";
        return 1;
    }
    if (cfg.problem == "plate" && (cfg.cr || cfg.rt)) {
        std::cerr << "poisson methods requested for the plate problem\n";
        return 1;
    }
    scfem::ConvergenceTable table = scfem::run_study(cfg, &std::cerr);
    std::cout << scfem::to_text(table);
    if (!cfg.report_path.empty()) std::cerr << "report written to " << cfg.report_path << "\n";
    return 0;
}

std::string show(double v) {
    if (std::isinf(v)) return "exact";
    if (std::isnan(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

int run_diagnose(const std::string& mesh_path, int levels, double alpha_threshold,
                 bool fix_orientation, std::int64_t max_elements) {
    scfem::Mesh mesh = scfem::load_mesh(mesh_path, fix_orientation);
    std::vector<scfem::MeshDiagnostics> diags;
    for (int l = 0; l < levels; ++l) {
        if (l > 0) mesh = scfem::uniform_refine(mesh, max_elements);
        diags.push_back(scfem::classify(mesh, alpha_threshold));
        const auto& d = diags.back();
        double e1_frac = d.n_interior_edges ? double(d.n_e1) / d.n_interior_edges : 0.0;
        std::printf("level %d: h = %.6g, triangles = %d\n", l + 1, d.h,
                    mesh.n_triangles());
        std::printf("  interior edges %d: E1 %d (%.1f%%), E2 %d, E2 area %.6g\n",
                    d.n_interior_edges, d.n_e1, 100.0 * e1_frac, d.n_e2, d.e2_area);
        std::printf("  kappa = %d of %zu boundary vertices, log-uniformity = %.4f\n", d.kappa,
                    d.boundary_vertices.size(), d.log_uniformity);
    }
    scfem::AlphaSigmaFit fit = scfem::fit_alpha_sigma(diags);
    std::printf("alpha estimate = %s, sigma estimate = %s\n", show(fit.alpha).c_str(),
                show(fit.sigma).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonconforming/mixed triangular FEM with superconvergent recovery"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key = value file");

    scfem::StudyConfig cfg;
    std::vector<std::string> methods;
    auto* solve = app.add_subcommand("solve", "Run a refinement study");
    solve->add_option("--problem", cfg.problem, "poisson | plate")
        ->check(CLI::IsMember({"poisson", "plate"}))
        ->capture_default_str();
    solve->add_option("--method", methods,
                      "cr | rt | morley | morley-modified | hhj (repeatable)")
        ->delimiter(',');
    solve->add_option("--mesh", cfg.mesh_path, "Initial mesh file");
    solve->add_option("--structured", cfg.structured_n,
                      "Generate a structured initial mesh with 2n^2 triangles");
    solve->add_flag("--piecewise", cfg.piecewise,
                    "Structured mesh with two differently oriented uniform halves");
    solve->add_option("--levels", cfg.levels, "Number of refinement levels")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve->add_flag("--postprocess", cfg.postprocess, "Compute the recovered-derivative error");
    solve->add_option("--report", cfg.report_path, "Write the study table as CSV");
    solve->add_option("--quad-degree", cfg.quad_degree, "Volume quadrature degree")
        ->check(CLI::Range(1, 14))
        ->capture_default_str();
    solve->add_option("--edge-degree", cfg.edge_degree, "Edge quadrature degree")
        ->capture_default_str();
    solve->add_option("--alpha-threshold", cfg.alpha_threshold,
                      "Exponent in the parallelogram classification test")
        ->capture_default_str();
    solve->add_flag("--fix-orientation", cfg.fix_orientation,
                    "Reorient clockwise triangles instead of rejecting them");
    solve->add_option("--max-elements", cfg.max_elements, "Element budget for refinement")
        ->capture_default_str();
    solve->add_flag("--iterative", cfg.iterative, "Use the iterative solvers (CG/MINRES)");
    solve->add_flag("--timing", cfg.timing, "Record wall time in the CSV report");
    solve->add_option("--dump-matrix", cfg.dump_matrix_path,
                      "Debug: dump the first-level system in 'i j value' form");

    std::string diag_mesh;
    int diag_levels = 1;
    double diag_alpha = 1.0;
    bool diag_fix = false;
    std::int64_t diag_budget = 4'000'000;
    auto* diagnose = app.add_subcommand("diagnose", "Report mesh structure indicators");
    diagnose->add_option("--mesh", diag_mesh, "Mesh file")->required();
    diagnose->add_option("--levels", diag_levels, "Refinement levels to analyze")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    diagnose->add_option("--alpha-threshold", diag_alpha,
                         "Exponent in the parallelogram classification test")
        ->capture_default_str();
    diagnose->add_flag("--fix-orientation", diag_fix, "Reorient clockwise triangles");
    diagnose->add_option("--max-elements", diag_budget, "Element budget for refinement");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) return run_solve(cfg, methods);
        return run_diagnose(diag_mesh, diag_levels, diag_alpha, diag_fix, diag_budget);
    } catch (const scfem::BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const scfem::SolverError& e) {
        std::cerr << "error: " << e.what();
        if (e.residual >= 0.0) std::cerr << " (residual " << e.residual << ")";
        std::cerr << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
