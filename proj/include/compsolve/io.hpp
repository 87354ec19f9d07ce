#pragma once

#include "compsolve/certify.hpp"
#include "compsolve/grid.hpp"
#include "compsolve/navier_stokes.hpp"
#include "compsolve/solve.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace compsolve {

using Json = nlohmann::ordered_json;

/// {mu, nu, k, k1, sigma, m0, delta0, r1, verdict, gaps, seed}
Json report_to_json(const CertificateReport& r);

/// {outcome, iterations, residual, y_hat_norm, max_telescoping_defect, reanchors, detail}
Json trace_summary(const SolveTrace& t);

Json ns_report_to_json(const NSConditionReport& r);

/// Header m,res_norm,df0_norm,step_norm, one row per iterate, then the summary as one JSON line.
void write_trace_csv(std::ostream& out, const SolveTrace& t);

/// x[,y],value per interior node.
void write_grid_solution_csv(std::ostream& out, const Grid& grid, const Vec& u);

/// i,j,coefficient per Galerkin mode.
void write_modal_solution_csv(std::ostream& out, const StreamFunctionBasis& basis, const Vec& c);

/// Shortest round-trip decimal form; used for every number written to disk.
std::string format_number(double v);

/// Parses a JSON document; ConfigError messages carry line and column.
Json parse_json(const std::string& text, const std::string& origin = "<input>");
Json load_json_file(const std::filesystem::path& path);

/// Applies "a.b.c=value"; the value is read as JSON when it parses, else as a string.
void apply_override(Json& doc, const std::string& assignment);

void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace compsolve
