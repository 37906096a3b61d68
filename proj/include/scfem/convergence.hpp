#pragma once

#include "scfem/diagnostics.hpp"
#include "scfem/problems.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace scfem {

/// Empirical order of convergence under mesh halving.
inline double eoc(double e_coarse, double e_fine) {
    if (!(e_coarse > 0.0) || !(e_fine > 0.0))
        throw std::invalid_argument("eoc: errors must be positive");
    return std::log2(e_coarse / e_fine);
}

/// Rows of a refinement study plus the derived rate columns.
struct ConvergenceTable {
    std::vector<CaseResult> rows;

    static double rate_or_nan(double coarse, double fine) {
        if (!(coarse > 0.0) || !(fine > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        return std::log2(coarse / fine);
    }

    double rate_primal(std::size_t i) const {
        return i == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : rate_or_nan(rows[i - 1].error_primal, rows[i].error_primal);
    }
    double rate_gap(std::size_t i) const {
        return i == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : rate_or_nan(rows[i - 1].error_interp_gap, rows[i].error_interp_gap);
    }
    double rate_post(std::size_t i) const {
        return i == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : rate_or_nan(rows[i - 1].error_postprocessed, rows[i].error_postprocessed);
    }

    /// Dof count of the method's primary space.
    static int primary_dofs(const CaseResult& r) {
        for (const char* key : {"morley", "cr", "hhj", "rt"}) {
            auto it = r.dofs.find(key);
            if (it != r.dofs.end()) return it->second;
        }
        return 0;
    }
};

namespace detail {

inline std::string full_precision(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Serialize the table; one line per level.  Wall times are reported only when
/// with_timing is set so that identical reruns emit identical bytes.
inline std::string to_csv(const ConvergenceTable& table, bool with_timing = false) {
    std::ostringstream out;
    out << "level,h,dofs,err_primal,rate_primal,err_gap,rate_gap,err_post,rate_post,residual,"
           "seconds\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const CaseResult& r = table.rows[i];
        out << r.level << ',' << detail::full_precision(r.h) << ','
            << ConvergenceTable::primary_dofs(r) << ','
            << detail::full_precision(r.error_primal) << ','
            << detail::full_precision(table.rate_primal(i)) << ','
            << detail::full_precision(r.error_interp_gap) << ','
            << detail::full_precision(table.rate_gap(i)) << ','
            << detail::full_precision(r.error_postprocessed) << ','
            << detail::full_precision(table.rate_post(i)) << ','
            << detail::full_precision(r.max_residual()) << ','
            << detail::full_precision(with_timing ? r.seconds : 0.0) << '\n';
    }
    return out.str();
}

/// One parsed CSV row (NaN for empty cells).
struct CsvRow {
    int level = 0;
    double h, dofs, err_primal, rate_primal, err_gap, rate_gap, err_post, rate_post, residual,
        seconds;
};

inline std::vector<CsvRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("level,", 0) != 0)
        throw std::runtime_error("parse_csv: missing header");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        cells.resize(11);
        auto num = [](const std::string& s) {
            return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
        };
        CsvRow r;
        r.level = static_cast<int>(std::stol(cells[0]));
        r.h = num(cells[1]);
        r.dofs = num(cells[2]);
        r.err_primal = num(cells[3]);
        r.rate_primal = num(cells[4]);
        r.err_gap = num(cells[5]);
        r.rate_gap = num(cells[6]);
        r.err_post = num(cells[7]);
        r.rate_post = num(cells[8]);
        r.residual = num(cells[9]);
        r.seconds = num(cells[10]);
        rows.push_back(r);
    }
    return rows;
}

/// Human-readable aligned table: errors with 6 significant digits, rates with
/// 4 decimals to mirror the usual convergence-table layout.
inline std::string to_text(const ConvergenceTable& table) {
    std::ostringstream out;
    auto num = [](double v, bool rate) {
        if (std::isnan(v)) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof(buf), rate ? "%.4f" : "%.6g", v);
        return std::string(buf);
    };
    out << std::left << std::setw(6) << "level" << std::setw(12) << "h" << std::setw(10) << "dofs"
        << std::setw(13) << "err_primal" << std::setw(9) << "rate" << std::setw(13) << "err_gap"
        << std::setw(9) << "rate" << std::setw(13) << "err_post" << std::setw(9) << "rate"
        << "residual\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const CaseResult& r = table.rows[i];
        out << std::left << std::setw(6) << r.level << std::setw(12) << num(r.h, false)
            << std::setw(10) << ConvergenceTable::primary_dofs(r) << std::setw(13)
            << num(r.error_primal, false) << std::setw(9) << num(table.rate_primal(i), true)
            << std::setw(13) << num(r.error_interp_gap, false) << std::setw(9)
            << num(table.rate_gap(i), true) << std::setw(13) << num(r.error_postprocessed, false)
            << std::setw(9) << num(table.rate_post(i), true) << num(r.max_residual(), false)
            << "\n";
    }
    return out.str();
}

/// Full study configuration; mirrors the CLI flags.
struct StudyConfig {
    std::string problem = "plate";   // "poisson" | "plate"
    bool cr = false, rt = false, morley = false, morley_modified = false, hhj = false;
    std::string mesh_path;       // load the initial mesh from a file ...
    int structured_n = 0;        // ... or generate one (domain chosen by problem)
    bool piecewise = false;      // piecewise-uniform variant of the structured mesh
    int levels = 1;
    bool postprocess = false;
    std::string report_path;
    int quad_degree = 13;
    int edge_degree = 9;
    double alpha_threshold = 1.0;
    bool fix_orientation = false;
    std::int64_t max_elements = 4'000'000;
    bool iterative = false;
    bool timing = false;
    std::string dump_matrix_path;

    void default_methods() {
        if (problem == "poisson") {
            if (!cr && !rt) cr = rt = true;
        } else {
            if (!morley && !morley_modified && !hhj) morley = true;
        }
    }
};

/// Initial mesh for a study: either from file or a structured triangulation of
/// the problem's benchmark domain (unit square for Poisson, the parallelogram
/// of the plate benchmark otherwise).
inline Mesh study_initial_mesh(const StudyConfig& cfg) {
    if (!cfg.mesh_path.empty()) return load_mesh(cfg.mesh_path, cfg.fix_orientation);
    int n = cfg.structured_n > 0 ? cfg.structured_n : 2;
    if (cfg.problem == "poisson") {
        if (cfg.piecewise) return generate_piecewise_uniform(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), n);
        return generate_structured(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), n);
    }
    const double r3 = std::sqrt(3.0);
    if (cfg.piecewise)
        return generate_piecewise_uniform(Vec2(0, 0), Vec2(2, 0), Vec2(1, r3), n);
    return generate_structured(Vec2(0, 0), Vec2(2, 0), Vec2(1, r3), n);
}

/// Run the multi-level study: refine, solve, collect rates, and write the
/// reports.  Levels are strictly sequential so reruns are reproducible.
inline ConvergenceTable run_study(const StudyConfig& cfg_in, std::ostream* log = nullptr) {
    StudyConfig cfg = cfg_in;
    cfg.default_methods();
    if (cfg.levels < 1) throw std::invalid_argument("run_study: levels must be >= 1");

    ExactSolution exact =
        cfg.problem == "poisson" ? poisson_sine_solution() : plate_polynomial_solution();
    CaseOptions opt;
    opt.quad_degree = cfg.quad_degree;
    opt.edge_degree = cfg.edge_degree;
    opt.postprocess = cfg.postprocess;
    opt.iterative = cfg.iterative;

    Mesh mesh = study_initial_mesh(cfg);
    if (!cfg.dump_matrix_path.empty()) {
        TriangleRule rule = triangle_rule(cfg.quad_degree);
        if (cfg.problem == "poisson")
            dump_matrix(assemble_cr_poisson(mesh, exact.f, rule).system, cfg.dump_matrix_path);
        else
            dump_matrix(assemble_morley(mesh, exact.f, MorleyRhs::Standard, rule).system,
                        cfg.dump_matrix_path);
    }

    ConvergenceTable table;
    for (int level = 0; level < cfg.levels; ++level) {
        if (level > 0) mesh = uniform_refine(mesh, cfg.max_elements);
        CaseResult row;
        if (cfg.problem == "poisson") {
            PoissonMethods pm;
            pm.cr = cfg.cr;
            pm.rt = cfg.rt;
            row = run_poisson_case(mesh, exact, pm, opt).result;
        } else {
            PlateMethods pm;
            pm.morley = cfg.morley;
            pm.morley_modified = cfg.morley_modified;
            pm.hhj = cfg.hhj;
            row = run_plate_case(mesh, exact, pm, opt).result;
        }
        row.level = level + 1;
        table.rows.push_back(row);
        if (log) *log << "level " << row.level << " done: h = " << row.h << "\n";
    }

    if (!cfg.report_path.empty()) {
        std::ofstream out(cfg.report_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report: " + cfg.report_path);
        out << to_csv(table, cfg.timing);
    }
    return table;
}

} // namespace scfem
