#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gridplan/milp/solve.hpp"
#include "json.hpp"

namespace gridplan::milp {

// External-solver adapter: any command that reads a problem JSON file (argv[1])
// and writes a result JSON file (argv[2]) can serve as a backend. The repo
// ships tools/highs_backend.py as a reference adapter.
SolveResult solve_with_command_backend(const MilpInstance& mi, const SolveOptions& options) {
  mi.validate();
  nlohmann::json prob;
  prob["sense"] = "min";
  prob["objective_constant"] = mi.objective_constant();
  auto& vars = prob["variables"];
  vars = nlohmann::json::array();
  for (std::size_t j = 0; j < mi.num_vars(); ++j) {
    const auto& v = mi.variable(j);
    nlohmann::json jv;
    jv["name"] = v.name;
    jv["lower"] = std::isfinite(v.lower) ? nlohmann::json(v.lower) : nlohmann::json();
    jv["upper"] = std::isfinite(v.upper) ? nlohmann::json(v.upper) : nlohmann::json();
    jv["kind"] = v.kind == VarKind::continuous ? "c" : v.kind == VarKind::integer ? "i" : "b";
    jv["obj"] = mi.objective_coef(static_cast<std::int32_t>(j));
    vars.push_back(std::move(jv));
  }
  auto& rows = prob["rows"];
  rows = nlohmann::json::array();
  for (const auto& row : mi.rows()) {
    nlohmann::json jr;
    jr["name"] = row.name;
    jr["sense"] = row.sense == RowSense::le ? "<=" : row.sense == RowSense::ge ? ">=" : "=";
    jr["rhs"] = row.rhs;
    auto& terms = jr["terms"];
    terms = nlohmann::json::array();
    for (const auto& [v, c] : row.terms) terms.push_back({v, c});
    rows.push_back(std::move(jr));
  }
  prob["options"] = {{"time_limit_s", options.time_limit_s},
                     {"mip_gap", options.mip_gap},
                     {"seed", options.seed}};

  char tmpl_in[] = "/tmp/gridplan_milp_in_XXXXXX";
  char tmpl_out[] = "/tmp/gridplan_milp_out_XXXXXX";
  const int fd_in = mkstemp(tmpl_in);
  const int fd_out = mkstemp(tmpl_out);
  if (fd_in < 0 || fd_out < 0) throw Error("backend unavailable: cannot create temp files");
  {
    std::ofstream out(tmpl_in);
    out << prob.dump();
  }
  std::ostringstream cmd;
  cmd << options.backend << " " << tmpl_in << " " << tmpl_out << " 2>/dev/null";
  const int rc = std::system(cmd.str().c_str());
  nlohmann::json result;
  {
    std::ifstream in(tmpl_out);
    if (rc != 0 || !in) {
      std::remove(tmpl_in);
      std::remove(tmpl_out);
      throw Error("backend unavailable: command failed: " + options.backend);
    }
    in >> result;
  }
  std::remove(tmpl_in);
  std::remove(tmpl_out);

  SolveResult res;
  const std::string status = result.value("status", "error");
  if (status == "optimal")
    res.status = SolveStatus::optimal;
  else if (status == "feasible")
    res.status = SolveStatus::feasible;
  else if (status == "infeasible")
    res.status = SolveStatus::infeasible;
  else if (status == "unbounded")
    res.status = SolveStatus::unbounded;
  else if (status == "time_limit")
    res.status = SolveStatus::time_limit;
  else
    throw Error("backend returned unknown status: " + status);
  res.objective = result.value("objective", 0.0);
  res.best_bound = result.value("best_bound", res.objective);
  res.wall_time_s = result.value("wall_time_s", 0.0);
  if (result.contains("values")) {
    res.values = result["values"].get<std::vector<double>>();
    if (res.values.size() != mi.num_vars())
      throw Error("backend returned wrong value vector size");
    res.max_residual = mi.max_violation(res.values);
  }
  res.gap = std::abs(res.objective - res.best_bound) / std::max(1.0, std::abs(res.objective));
  return res;
}

}  // namespace gridplan::milp
