#include "compsolve/io.hpp"

#include "compsolve/errors.hpp"

#include <fmt/format.h>

#include <fstream>
#include <ostream>
#include <sstream>

namespace compsolve {

namespace {

Json table_to_json(const EnvelopeTable& t)
{
  Json out = Json::array();
  for (const auto& p : t)
    out.push_back({p.t, p.v});
  return out;
}

Json finite_or_null(double v)
{
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json check_to_json(const NSCheck& c)
{
  return {{"name", c.name}, {"pass", c.pass}, {"worst", finite_or_null(c.worst)}, {"witness", c.witness}};
}

} // namespace

std::string format_number(double v)
{
  return fmt::format("{}", v);
}

Json report_to_json(const CertificateReport& r)
{
  Json out;
  out["mu"] = table_to_json(r.mu);
  out["nu"] = table_to_json(r.nu);
  out["k"] = finite_or_null(r.k);
  out["k1"] = finite_or_null(r.k1);
  out["sigma"] = r.contraction ? Json(r.contraction->sigma) : Json(nullptr);
  out["m0"] = r.contraction ? Json(r.contraction->m0) : Json(nullptr);
  out["delta0"] = finite_or_null(r.delta0);
  out["r1"] = r.r1 ? finite_or_null(*r.r1) : Json(nullptr);
  out["verdict"] = std::string(to_string(r.verdict));
  out["gaps"] = r.gaps;
  out["seed"] = r.seed;
  return out;
}

Json trace_summary(const SolveTrace& t)
{
  Json out;
  out["outcome"] = std::string(to_string(t.outcome));
  out["iterations"] = t.iterations();
  out["residual"] = finite_or_null(t.residual);
  out["y_hat_norm"] = finite_or_null(t.y_hat_norm);
  out["max_telescoping_defect"] = finite_or_null(t.max_telescoping_defect());
  out["reanchors"] = t.reanchors;
  if (t.failed_at >= 0)
    out["failed_at"] = t.failed_at;
  out["detail"] = t.detail;
  return out;
}

Json ns_report_to_json(const NSConditionReport& r)
{
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back(check_to_json(c));
  Json out;
  out["checks"] = checks;
  out["alt_route"] = r.alt_route ? check_to_json(*r.alt_route) : Json(nullptr);
  out["all_pass"] = r.all_pass();
  return out;
}

void write_trace_csv(std::ostream& out, const SolveTrace& t)
{
  out << "m,res_norm,df0_norm,step_norm\n";
  for (const auto& r : t.iterates)
    out << r.m << ',' << format_number(r.res_norm) << ',' << format_number(r.df0_norm) << ','
        << format_number(r.step_norm) << '\n';
  out << trace_summary(t).dump() << '\n';
}

void write_grid_solution_csv(std::ostream& out, const Grid& grid, const Vec& u)
{
  out << (grid.dim() == 1 ? "x,value\n" : "x,y,value\n");
  for (int k = 0; k < grid.node_count(); ++k) {
    const Point p = grid.node(k);
    out << format_number(p[0]) << ',';
    if (grid.dim() == 2)
      out << format_number(p[1]) << ',';
    out << format_number(u[k]) << '\n';
  }
}

void write_modal_solution_csv(std::ostream& out, const StreamFunctionBasis& basis, const Vec& c)
{
  out << "i,j,coefficient\n";
  for (int k = 0; k < basis.size(); ++k)
    out << basis.modes()[k].first << ',' << basis.modes()[k].second << ',' << format_number(c[k]) << '\n';
}

Json parse_json(const std::string& text, const std::string& origin)
{
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    size_t line = 1, column = 1;
    const size_t stop = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(fmt::format("{}:{}:{}: JSON parse error: {}", origin, line, column, e.what()));
  }
}

Json load_json_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError(fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str(), path.string());
}

void apply_override(Json& doc, const std::string& assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded())
    value = raw;

  std::string pointer;
  std::stringstream parts(key);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (part.empty())
      throw ConfigError(fmt::format("override key '{}' has an empty component", key));
    pointer += '/' + part;
  }
  doc[Json::json_pointer(pointer)] = value;
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out)
    throw ConfigError(fmt::format("write to {} failed", path.string()));
}

} // namespace compsolve
