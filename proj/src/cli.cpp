#include "compsolve/cli.hpp"

#include "compsolve/errors.hpp"
#include "compsolve/problems.hpp"

#include <fmt/format.h>

#include <ostream>
#include <sstream>

namespace compsolve {

namespace {

namespace fs = std::filesystem;

struct Context
{
  const RunConfig& run;
  Json doc;
  Json summary;

  fs::path out(const char* name) const { return run.output_dir / name; }
};

std::string dump_pretty(const Json& j)
{
  return j.dump(2) + "\n";
}

std::string trace_text(const SolveTrace& t)
{
  std::ostringstream s;
  write_trace_csv(s, t);
  return s.str();
}

int exit_for(const SolveTrace& t)
{
  return t.converged() ? ExitSuccess : ExitNegative;
}

int exit_for(Verdict v)
{
  return v == Verdict::Pass ? ExitSuccess : ExitNegative;
}

Vec read_vector(const Json& doc, const char* key, int dim, const Vec& fallback)
{
  if (!doc.contains(key))
    return fallback;
  return vector_from_json(doc.at(key), dim, key);
}

/// Registry names for the PDE instances map onto their "type" documents.
void normalize(Json& doc)
{
  if (!doc.is_object())
    throw ConfigError("problem file must hold a JSON object");
  const std::string problem = doc.value("problem", std::string());
  if (problem == "elliptic-1d" || problem == "elliptic-2d") {
    doc["type"] = "elliptic";
    if (!doc.contains("dim"))
      doc["dim"] = problem == "elliptic-1d" ? 1 : 2;
  } else if (problem == "ns-steady-2d") {
    if (!doc.contains("type"))
      doc["type"] = "ns-steady";
  }
}

int cmd_certify(Context& ctx)
{
  const auto sampler = sampler_from_json(ctx.doc, ctx.run.seed);
  const std::string type = ctx.doc.value("type", std::string());
  CertificateReport report;
  if (type == "elliptic")
    report = certify(build_elliptic_problem(ctx.doc, ctx.run.seed).decomposition, sampler);
  else if (type == "ns-steady" || type == "ns-evolve")
    report = certify(build_ns_problem(ctx.doc).decomposition, sampler);
  else
    report = certify(build_fixture(ctx.doc), sampler);
  write_text_file(ctx.out("report.json"), dump_pretty(report_to_json(report)));
  ctx.summary["verdict"] = std::string(to_string(report.verdict));
  ctx.summary["sigma"] = report.contraction ? Json(report.contraction->sigma) : Json(nullptr);
  ctx.summary["m0"] = report.contraction ? Json(report.contraction->m0) : Json(nullptr);
  ctx.summary["delta0"] = report.delta0;
  ctx.summary["r1"] = report.r1 ? Json(*report.r1) : Json(nullptr);
  return exit_for(report.verdict);
}

int finish_solve(Context& ctx, const SolveTrace& trace)
{
  write_text_file(ctx.out("trace.csv"), trace_text(trace));
  const Json summary = trace_summary(trace);
  for (const auto& [k, v] : summary.items())
    ctx.summary[k] = v;
  return exit_for(trace);
}

int cmd_solve(Context& ctx)
{
  const auto d = build_fixture(ctx.doc);
  const int dim = d.f.domain().dim();
  const auto cfg = solver_from_json(ctx.doc, ctx.run.seed);
  const Vec target = read_vector(ctx.doc, "target", dim, Vec::Zero(dim));
  const Vec start = read_vector(ctx.doc, "start", dim, d.f.ball().center);
  if (ctx.doc.contains("patched")) {
    const double radius = ctx.doc.at("patched").value("reanchor_radius", 0.0);
    const Mapping f = d.f;
    auto factory = [f](const Vec& anchor) { return frozen_jacobian_surrogate(f, anchor); };
    return finish_solve(ctx, solve_patched(d.f, factory, target, start, cfg, radius));
  }
  return finish_solve(ctx, solve_comparison(d, target, start, cfg));
}

int cmd_fixed_point(Context& ctx)
{
  const auto f1 = build_fixed_point_map(ctx.doc);
  const int dim = f1.domain().dim();
  const auto cfg = solver_from_json(ctx.doc, ctx.run.seed);
  const Vec target = read_vector(ctx.doc, "target", dim, Vec::Zero(dim));
  const Vec start = read_vector(ctx.doc, "start", dim, f1.ball().center);
  return finish_solve(ctx, solve_fixed_point(f1, target, start, cfg));
}

int cmd_elliptic(Context& ctx)
{
  const auto problem = build_elliptic_problem(ctx.doc, ctx.run.seed);
  const auto cfg = solver_from_json(ctx.doc, ctx.run.seed);
  if (ctx.doc.value("certify", false)) {
    const auto report = certify(problem.decomposition, cfg.sampler);
    write_text_file(ctx.out("report.json"), dump_pretty(report_to_json(report)));
    ctx.summary["verdict"] = std::string(to_string(report.verdict));
  }
  const auto trace = solve_elliptic(problem.decomposition, problem.rhs, cfg);
  std::ostringstream sol;
  write_grid_solution_csv(sol, problem.grid, trace.x);
  write_text_file(ctx.out("solution.csv"), sol.str());
  if (problem.exact)
    ctx.summary["error_inf"] = (trace.x - *problem.exact).cwiseAbs().maxCoeff();
  return finish_solve(ctx, trace);
}

int cmd_ns_steady(Context& ctx)
{
  const auto problem = build_ns_problem(ctx.doc);
  const auto cfg = solver_from_json(ctx.doc, ctx.run.seed);
  const int samples = ctx.doc.value("verify_samples", 200);
  const auto conditions = verify_ns_conditions(problem.config, samples, ctx.run.seed);
  write_text_file(ctx.out("conditions.json"), dump_pretty(ns_report_to_json(conditions)));
  ctx.summary["conditions_pass"] = conditions.all_pass();
  const auto trace = solve_ns_steady(problem.decomposition, problem.config.forcing, cfg);
  std::ostringstream sol;
  write_modal_solution_csv(sol, problem.op->basis(), trace.x);
  write_text_file(ctx.out("solution.csv"), sol.str());
  return finish_solve(ctx, trace);
}

int cmd_ns_evolve(Context& ctx)
{
  const auto problem = build_ns_problem(ctx.doc);
  const auto cfg = solver_from_json(ctx.doc, ctx.run.seed);
  const double T = ctx.doc.value("T", 1.0);
  const double dt = ctx.doc.value("dt", 0.05);
  const Vec load = problem.config.forcing;
  const auto result = evolve_ns(problem.op, [load](double) { return load; }, T, dt, cfg);

  std::ostringstream steps;
  steps << "step,t,iterations,residual,energy_slack\n";
  for (size_t n = 0; n < result.steps.size(); ++n) {
    const auto& s = result.steps[n];
    steps << n + 1 << ',' << format_number((n + 1) * dt) << ',' << s.iterations() << ','
          << format_number(s.residual) << ','
          << (n < result.energy_slack.size() ? format_number(result.energy_slack[n]) : std::string()) << '\n';
  }
  write_text_file(ctx.out("steps.csv"), steps.str());
  if (!result.steps.empty())
    write_text_file(ctx.out("trace.csv"), trace_text(result.steps.back()));
  std::ostringstream sol;
  write_modal_solution_csv(sol, problem.op->basis(), result.states.back());
  write_text_file(ctx.out("solution.csv"), sol.str());

  ctx.summary["steps"] = result.states.size() - 1;
  ctx.summary["energy_ok"] = result.energy_ok;
  if (result.rejected_step) {
    ctx.summary["outcome"] = "StepRejected";
    ctx.summary["rejected_step"] = *result.rejected_step;
    ctx.summary["detail"] = result.detail;
    return ExitNegative;
  }
  ctx.summary["outcome"] = "Converged";
  return result.energy_ok ? ExitSuccess : ExitNegative;
}

int cmd_sweep(Context& ctx)
{
  const Json& sweep = ctx.doc.at("sweep");
  const auto radii = sweep.at("radii").get<std::vector<double>>();
  const auto ynorms = sweep.at("ynorms").get<std::vector<double>>();
  const bool relative = sweep.value("relative", false);
  const auto sampler = sampler_from_json(ctx.doc, ctx.run.seed);
  const auto cfg = solver_from_json(ctx.doc, ctx.run.seed);

  std::ostringstream csv;
  csv << "r,ynorm,sigma,delta0,outcome\n";
  bool all_converged = true;
  int rows = 0;
  for (double r : radii) {
    Json desc = ctx.doc;
    desc["radius"] = r;
    const auto d = build_fixture(desc);
    const int dim = d.f.domain().dim();
    const auto report = certify(d, sampler);
    const Vec& center = d.f.ball().center;
    Vec dir = read_vector(sweep, "direction", dim, Vec::Unit(dim, 0));
    dir /= d.f.codomain().norm(dir);
    for (double yn : ynorms) {
      const double ynorm = relative ? yn * r : yn;
      std::string outcome;
      if (!report.contraction) {
        outcome = std::string(to_string(Outcome::NonContractive));
      } else {
        const Vec target = d.f(center) + ynorm * dir;
        try {
          outcome = std::string(to_string(solve_comparison(d, target, center, cfg).outcome));
        } catch (const TargetOutsideCertifiedRadius&) {
          outcome = "OutsideCertifiedRadius";
        }
      }
      all_converged = all_converged && outcome == "Converged";
      csv << format_number(r) << ',' << format_number(ynorm) << ','
          << (report.contraction ? format_number(report.contraction->sigma) : std::string()) << ','
          << format_number(report.delta0) << ',' << outcome << '\n';
      ++rows;
    }
  }
  write_text_file(ctx.out("sweep.csv"), csv.str());
  ctx.summary["rows"] = rows;
  ctx.summary["outcome"] = all_converged ? "Converged" : "NotAllConverged";
  return all_converged ? ExitSuccess : ExitNegative;
}

using Handler = int (*)(Context&);

Handler handler_for(const std::string& command)
{
  if (command == "certify") return cmd_certify;
  if (command == "solve") return cmd_solve;
  if (command == "fixed-point") return cmd_fixed_point;
  if (command == "elliptic") return cmd_elliptic;
  if (command == "ns-steady") return cmd_ns_steady;
  if (command == "ns-evolve") return cmd_ns_evolve;
  if (command == "sweep") return cmd_sweep;
  return nullptr;
}

int fail(Json& summary, std::ostream& out, int code, const char* kind, const std::string& message)
{
  summary["outcome"] = kind;
  summary["error"] = message;
  out << summary.dump() << '\n';
  return code;
}

} // namespace

const std::vector<std::string>& commands()
{
  static const std::vector<std::string> names{"certify",   "solve",     "fixed-point", "elliptic",
                                              "ns-steady", "ns-evolve", "sweep"};
  return names;
}

int run(const RunConfig& cfg, std::ostream& summary_out)
{
  Json summary;
  summary["command"] = cfg.command;
  summary["seed"] = cfg.seed;
  const Handler handler = handler_for(cfg.command);
  if (!handler)
    return fail(summary, summary_out, ExitConfig, "ConfigError", fmt::format("unknown command '{}'", cfg.command));

  try {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (!fs::is_directory(cfg.output_dir))
      throw ConfigError(fmt::format("output directory {} is not usable", cfg.output_dir.string()));
    Context ctx{cfg, load_json_file(cfg.input_path), summary};
    for (const auto& o : cfg.overrides)
      apply_override(ctx.doc, o);
    normalize(ctx.doc);
    const int code = handler(ctx);
    summary_out << ctx.summary.dump() << '\n';
    return code;
  } catch (const CoefficientEnvelopeViolated& e) {
    return fail(summary, summary_out, ExitNegative, "CoefficientEnvelopeViolated", e.what());
  } catch (const TargetOutsideCertifiedRadius& e) {
    return fail(summary, summary_out, ExitNegative, "OutsideCertifiedRadius", e.what());
  } catch (const StepRejected& e) {
    return fail(summary, summary_out, ExitNegative, "StepRejected", e.what());
  } catch (const ConfigError& e) {
    return fail(summary, summary_out, ExitConfig, "ConfigError", e.what());
  } catch (const Error& e) {
    return fail(summary, summary_out, ExitConfig, "Error", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(summary, summary_out, ExitConfig, "ConfigError", e.what());
  } catch (const std::exception& e) {
    return fail(summary, summary_out, ExitConfig, "Error", e.what());
  }
}

} // namespace compsolve
