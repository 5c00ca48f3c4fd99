#pragma once

// Command-line driver. `run` takes the argument list (without the program
// name) and the two output streams, so tests can call it in-process.
//
// Exit codes: 0 success, 1 an asserted verification claim failed,
// 2 resource budget exceeded, 3 numerical failure, 64 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "bpxhd/assembly.hpp"
#include "bpxhd/bpx.hpp"
#include "bpxhd/budget.hpp"
#include "bpxhd/errors.hpp"
#include "bpxhd/interpolation.hpp"
#include "bpxhd/mesh.hpp"
#include "bpxhd/multilevel.hpp"
#include "bpxhd/report.hpp"
#include "bpxhd/sparse.hpp"
#include "bpxhd/verification.hpp"

namespace bpxhd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitResource = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitUsage = 64;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;
  int d = 2;
  int n = 4;
  int levels = 3;
  std::string variant = "exact_mass";
  bool precondition = true;
  std::string method;  // empty: dense up to the dense limit, Lanczos beyond
  double tol = 1e-8;
  int max_iter = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::int64_t budget = default_budget();
  std::vector<std::string> only;
  int dmax = 6;
  std::vector<int> dims{1, 2, 3};
  std::vector<int> level_list{2, 3, 4};
  std::vector<std::string> variants{"exact", "lumped", "diag"};
  std::string matrix = "stiffness";
  std::string bc = "dirichlet";
  std::string rhs = "one";
  std::string elements_csv;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"command", c.command},   {"d", c.d},
                     {"n", c.n},               {"J", c.levels},
                     {"variant", c.variant},   {"precondition", c.precondition},
                     {"method", c.method},     {"tol", c.tol},
                     {"max_iter", c.max_iter}, {"seed", c.seed},
                     {"out", c.out},           {"format", c.format},
                     {"budget", c.budget},     {"only", c.only},
                     {"dmax", c.dmax},         {"dims", c.dims},
                     {"levels", c.level_list}, {"variants", c.variants},
                     {"matrix", c.matrix},     {"bc", c.bc},
                     {"rhs", c.rhs},           {"elements_csv", c.elements_csv}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  j.at("command").get_to(c.command);
  j.at("d").get_to(c.d);
  j.at("n").get_to(c.n);
  j.at("J").get_to(c.levels);
  j.at("variant").get_to(c.variant);
  j.at("precondition").get_to(c.precondition);
  j.at("method").get_to(c.method);
  j.at("tol").get_to(c.tol);
  j.at("max_iter").get_to(c.max_iter);
  j.at("seed").get_to(c.seed);
  j.at("out").get_to(c.out);
  j.at("format").get_to(c.format);
  j.at("budget").get_to(c.budget);
  j.at("only").get_to(c.only);
  j.at("dmax").get_to(c.dmax);
  j.at("dims").get_to(c.dims);
  j.at("levels").get_to(c.level_list);
  j.at("variants").get_to(c.variants);
  j.at("matrix").get_to(c.matrix);
  j.at("bc").get_to(c.bc);
  j.at("rhs").get_to(c.rhs);
  j.at("elements_csv").get_to(c.elements_csv);
}

namespace detail {

// Writes to the file named by `path` (appending if asked) or to `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback, bool append = false) : os_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, append ? std::ios::app : std::ios::trunc);
    if (!*file_) throw UsageError("cannot open output file " + path);
    os_ = file_.get();
    fresh_ = !append || file_->tellp() == 0;
  }
  std::ostream& stream() { return *os_; }
  bool fresh() const { return fresh_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
  bool fresh_ = true;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw UsageError(msg);
}

inline void validate_format(const RunConfig& c) { require(c.format == "csv" || c.format == "json", "format must be csv or json"); }

inline std::optional<BpxVariant> variant_of(const RunConfig& c) {
  if (!c.precondition) return std::nullopt;
  const auto v = parse_variant(c.variant);
  require(v.has_value(), "unknown variant '" + c.variant + "'");
  return v;
}

inline EigMethod method_of(const RunConfig& c, Index dofs) {
  if (c.method.empty()) return dofs <= kDenseLimit ? EigMethod::dense : EigMethod::lanczos;
  require(c.method == "dense" || c.method == "lanczos", "method must be dense or lanczos");
  if (c.method == "dense")
    require(dofs <= kDenseLimit, "dense method requested for " + std::to_string(dofs) + " dofs (limit " +
                                     std::to_string(kDenseLimit) + ")");
  return c.method == "dense" ? EigMethod::dense : EigMethod::lanczos;
}

inline int cmd_mesh_info(const RunConfig& c, std::ostream& out) {
  require(c.d >= 1, "dimension must be >= 1");
  require(c.n >= 1, "grid size must be >= 1");
  validate_format(c);
  const Mesh m = Mesh::build(c.d, c.n, c.budget);
  const Json j = mesh_summary(m);
  Sink sink(c.out, out);
  if (c.format == "json") {
    sink.stream() << j.dump(2) << '\n';
  } else {
    sink.stream() << "key,value\n";
    for (const auto& [k, v] : j.items())
      if (k != "boundary_vertex_ids") sink.stream() << k << ',' << v.dump() << '\n';
  }
  if (!c.elements_csv.empty()) {
    std::ofstream f(c.elements_csv);
    require(static_cast<bool>(f), "cannot open element file " + c.elements_csv);
    m.write_elements_csv(f);
  }
  return kExitOk;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  validate_format(c);
  require(c.dmax >= 1, "dmax must be >= 1");
  const std::set<std::string> only(c.only.begin(), c.only.end());
  for (const auto& g : only)
    if (std::find(check_groups().begin(), check_groups().end(), g) == check_groups().end())
      err << "warning: unknown check group '" << g << "'\n";
  bool any_known = only.empty();
  for (const auto& g : only) any_known = any_known || std::find(check_groups().begin(), check_groups().end(), g) != check_groups().end();
  std::vector<ConstantReport> rows;
  if (any_known) rows = run_checks(only, c.dmax, c.seed);
  else err << "warning: empty selection, no checks run\n";
  Sink sink(c.out, out);
  if (c.format == "json") sink.stream() << to_json(rows).dump(2) << '\n';
  else write_reports_csv(sink.stream(), rows);
  return any_failed(rows) ? kExitCheckFailed : kExitOk;
}

inline int cmd_kappa(const RunConfig& c, std::ostream& out) {
  validate_format(c);
  require(c.d >= 1 && c.levels >= 1, "need d >= 1 and J >= 1");
  const auto var = variant_of(c);
  const Hierarchy h = build_hierarchy(c.d, c.levels, c.budget);
  const EigMethod method = method_of(c, h.finest().size());
  std::optional<BpxOperator> b;
  if (var) b.emplace(h, *var);
  const KappaResult k = kappa(h, b ? &*b : nullptr, method, c.seed);
  const SpectrumRow row{c.d, c.levels, var ? to_string(*var) : "none", k.lambda_min, k.lambda_max, k.kappa,
                        to_string(k.method)};
  Sink sink(c.out, out, /*append=*/c.format == "csv");
  if (c.format == "json") {
    Json j = to_json(row);
    j["seed"] = c.seed;
    j["lanczos_steps"] = k.steps;
    j["residual"] = k.residual;
    sink.stream() << j.dump(2) << '\n';
  } else {
    if (sink.fresh()) write_spectra_header(sink.stream());
    write_spectra_row(sink.stream(), row);
  }
  return kExitOk;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  validate_format(c);
  std::vector<std::optional<BpxVariant>> variants;
  for (const auto& v : c.variants) {
    if (v == "none") {
      variants.emplace_back(std::nullopt);
      continue;
    }
    const auto pv = parse_variant(v);
    require(pv.has_value(), "unknown variant '" + v + "'");
    variants.emplace_back(*pv);
  }
  for (int d : c.dims) require(d >= 1, "dimensions must be >= 1");
  for (int j : c.level_list) require(j >= 1, "levels must be >= 1");
  const SweepResult s = sweep(c.dims, c.level_list, variants, c.seed, c.budget);

  auto write_csv = [&](std::ostream& os) {
    write_spectra_header(os);
    for (const auto& cell : s.cells) write_spectra_row(os, cell.row);
  };
  auto write_fit = [&](std::ostream& os) {
    const auto old = os.precision(17);
    os << "variant,J,points,slope\n";
    for (const auto& f : s.fits) os << f.variant << ',' << f.levels << ',' << f.points << ',' << f.slope << '\n';
    os.precision(old);
  };
  if (c.out.empty()) {
    if (c.format == "json") out << to_json(s).dump(2) << '\n';
    else write_csv(out);
    write_fit(err);
  } else {
    std::ofstream csv(c.out + ".csv"), json(c.out + ".json"), fit(c.out + "_fit.csv");
    require(csv && json && fit, "cannot open sweep outputs with prefix " + c.out);
    write_csv(csv);
    json << to_json(s).dump(2) << '\n';
    write_fit(fit);
  }
  for (const auto& cell : s.cells)
    if (!cell.ok) err << "cell d=" << cell.row.d << " J=" << cell.row.levels << " " << cell.row.variant << ": " << cell.error << '\n';
  const bool all_failed =
      !s.cells.empty() && std::none_of(s.cells.begin(), s.cells.end(), [](const SweepCell& x) { return x.ok; });
  return all_failed ? kExitNumerical : kExitOk;
}

inline int cmd_solve(const RunConfig& c, std::ostream& out) {
  validate_format(c);
  require(c.d >= 1 && c.levels >= 1, "need d >= 1 and J >= 1");
  require(c.tol > 0.0 && c.tol < 1.0, "tolerance must lie in (0, 1)");
  require(c.rhs == "one" || c.rhs == "random", "rhs must be one or random");
  const auto var = variant_of(c);
  const Hierarchy h = build_hierarchy(c.d, c.levels, c.budget);
  Vector f;
  if (c.rhs == "one") {
    f = h.finest().lumped_mass;  // int phi_a: load of the source f = 1
  } else {
    Rng rng(c.seed);
    f = rng.vector(static_cast<std::size_t>(h.finest().size()));
  }
  std::optional<BpxOperator> b;
  if (var) b.emplace(h, *var);
  const PcgResult r = pcg(h, f, b ? &*b : nullptr, c.tol, c.max_iter);
  Sink sink(c.out, out);
  if (c.format == "json") {
    sink.stream() << to_json(r.report).dump(2) << '\n';
  } else {
    sink.stream() << "iterations,relative_residual,wall_seconds,variant,d,J,converged\n";
    const auto& rep = r.report;
    sink.stream() << rep.iterations << ',' << rep.relative_residual << ',' << rep.wall_seconds << ',' << rep.variant << ','
                  << rep.d << ',' << rep.levels << ',' << (rep.converged ? "true" : "false") << '\n';
  }
  return r.report.converged ? kExitOk : kExitNumerical;
}

inline int cmd_export(const RunConfig& c, std::ostream& out) {
  require(c.d >= 1 && c.n >= 1, "need d >= 1 and n >= 1");
  MatrixKind kind;
  if (c.matrix == "mass") kind = MatrixKind::mass;
  else if (c.matrix == "stiffness") kind = MatrixKind::stiffness;
  else if (c.matrix == "boundary_mass") kind = MatrixKind::boundary_mass;
  else throw UsageError("matrix must be mass, stiffness or boundary_mass");
  require(c.bc == "full" || c.bc == "dirichlet", "bc must be full or dirichlet");
  const Mesh m = Mesh::build(c.d, c.n, c.budget);
  const SparseMatrix a = assemble(m, kind, c.bc == "full" ? BoundaryCondition::full : BoundaryCondition::dirichlet, c.budget);
  Sink sink(c.out, out);
  write_matrix_market(a, sink.stream());
  return kExitOk;
}

inline int dispatch(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.command == "mesh-info") return cmd_mesh_info(c, out);
  if (c.command == "verify") return cmd_verify(c, out, err);
  if (c.command == "kappa") return cmd_kappa(c, out);
  if (c.command == "sweep") return cmd_sweep(c, out, err);
  if (c.command == "solve") return cmd_solve(c, out);
  if (c.command == "export") return cmd_export(c, out);
  throw UsageError("unknown command '" + c.command + "'");
}

}  // namespace detail

/// Parses `args` into a RunConfig. Returns std::nullopt (and sets `code`) when
/// parsing ends the run: help output or a usage error.
inline std::optional<RunConfig> parse(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                                      int& code, bool& dump_config) {
  RunConfig c;
  CLI::App app{"Freudenthal P1 / BPX verification lab", "bpxhd"};
  app.require_subcommand(1);
  app.add_flag("--dump-config", dump_config, "Print the parsed configuration as JSON and exit");

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "Random seed");
    s->add_option("--out", c.out, "Output path (default: stdout)");
    s->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--budget", c.budget, "Vertex budget (overrides BPXHD_BUDGET)");
  };
  auto multilevel = [&](CLI::App* s) {
    s->add_option("-d", c.d, "Dimension");
    s->add_option("-J", c.levels, "Number of levels");
    s->add_option("--variant", c.variant, "exact|lumped|diag (or exact_mass|lumped_mass|diagonal)");
    s->add_flag("!--no-precond", c.precondition, "Use the bare stiffness matrix");
  };

  auto* mesh = app.add_subcommand("mesh-info", "Mesh counts and geometry");
  mesh->add_option("-d", c.d, "Dimension");
  mesh->add_option("-n", c.n, "Cells per axis");
  mesh->add_option("--elements", c.elements_csv, "Write element table CSV here");
  common(mesh);

  auto* verify = app.add_subcommand("verify", "Run the constant and scaling checks");
  verify->add_option("--only", c.only, "Comma-separated check groups")->delimiter(',');
  verify->add_option("--dmax", c.dmax, "Largest dimension for dimension-indexed checks");
  common(verify);

  auto* kap = app.add_subcommand("kappa", "Condition number of the (preconditioned) stiffness matrix");
  multilevel(kap);
  kap->add_option("--method", c.method, "dense|lanczos")->check(CLI::IsMember({"dense", "lanczos"}));
  common(kap);

  auto* sw = app.add_subcommand("sweep", "Condition numbers over dimensions, levels and variants");
  sw->add_option("--dims", c.dims, "Comma-separated dimensions")->delimiter(',');
  sw->add_option("--levels", c.level_list, "Comma-separated level counts")->delimiter(',');
  sw->add_option("--variants", c.variants, "Comma-separated variants (none = unpreconditioned)")->delimiter(',');
  common(sw);

  auto* solve = app.add_subcommand("solve", "Solve the Poisson problem with PCG");
  multilevel(solve);
  solve->add_option("--tol", c.tol, "Relative residual tolerance");
  solve->add_option("--maxit", c.max_iter, "Iteration cap");
  solve->add_option("--rhs", c.rhs, "one|random");
  common(solve);

  auto* ex = app.add_subcommand("export", "Write an assembled matrix in MatrixMarket format");
  ex->add_option("-d", c.d, "Dimension");
  ex->add_option("-n", c.n, "Cells per axis");
  ex->add_option("--matrix", c.matrix, "mass|stiffness|boundary_mass");
  ex->add_option("--bc", c.bc, "full|dirichlet");
  common(ex);

  std::vector<const char*> argv{"bpxhd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      code = kExitOk;
    } else {
      err << "usage error: " << e.what() << '\n';
      code = kExitUsage;
    }
    return std::nullopt;
  }
  for (auto* s : app.get_subcommands()) c.command = s->get_name();
  return c;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  bool dump = false;
  const auto config = parse(args, out, err, code, dump);
  if (!config) return code;
  if (dump) {
    out << nlohmann::json(*config).dump(2) << '\n';
    return kExitOk;
  }
  try {
    return detail::dispatch(*config, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BudgetExceeded& e) {
    err << "resource error: " << e.what() << '\n';
    return kExitResource;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::bad_alloc&) {
    err << "resource error: out of memory\n";
    return kExitResource;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace bpxhd::cli
