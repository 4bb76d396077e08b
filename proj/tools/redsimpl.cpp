#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>

#include "redsimpl/cgen.hpp"
#include "redsimpl/count.hpp"
#include "redsimpl/exec.hpp"
#include "redsimpl/frontend.hpp"
#include "redsimpl/lattice.hpp"
#include "redsimpl/simplify.hpp"

using namespace redsimpl;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// Thrown once diagnostics have been printed.
struct Reported {
  int code = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << path << ": cannot open\n";
    throw Reported{};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load(const std::string& path) {
  auto res = parse_program(read_file(path));
  if (res.ok()) return *res.program;
  for (const auto& d : res.diagnostics)
    std::cerr << path << ":" << d.span.line << ":" << d.span.column << ": " << d.severity << " " << d.code << ": "
              << d.message << "\n";
  throw Reported{};
}

Program inline_locals(Program p, const std::vector<std::string>& vars) {
  for (const auto& var : vars) {
    for (const auto& eq : std::vector<Equation>(p.equations))
      if (eq.var != var && detail::reads_var(eq.rhs, var)) p = substitute_definition(p, eq.var, var);
    p = remove_dead_locals(std::move(p));
  }
  return p;
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<Int> parse_sizes(const std::string& text) {
  std::vector<Int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    Int n = std::stoll(tok);
    if (n < 1) throw CLI::ValidationError("--sizes", "sizes must be positive");
    out.push_back(n);
  }
  if (out.empty()) throw CLI::ValidationError("--sizes", "at least one size is required");
  return out;
}

json polynomial_json(const QuasiPolynomial& q) {
  return json{{"text", q.to_string()}, {"degree", q.degree()}, {"leading", q.leading().get_str()}};
}

json trace_json(const std::vector<TraceStep>& trace) {
  json out = json::array();
  static const std::regex number("-?[0-9]+");
  for (const auto& s : trace) {
    json step{{"kind", s.kind}, {"target", s.target}};
    if (s.kind == "simplify") {
      auto close = s.detail.find(']');
      std::string vec = s.detail.substr(0, close + 1);
      json rho = json::array();
      for (std::sregex_iterator it(vec.begin(), vec.end(), number), end; it != end; ++it) rho.push_back(std::stoll(it->str()));
      step["face"] = "root";
      step["rho"] = rho;
      step["labeling"] = close + 2 <= s.detail.size() ? s.detail.substr(close + 2) : "";
    } else if (s.kind == "decompose") {
      step["basis"] = s.detail;
    } else {
      step["detail"] = s.detail;
    }
    out.push_back(step);
  }
  return out;
}

// Full text for polynomials, leading term and period for quasi-polynomials.
std::string short_text(const QuasiPolynomial& q) {
  if (q.period() == 1) return q.to_string();
  auto lead = QuasiPolynomial::polynomial([&] {
    std::vector<Rational> c(q.degree() + 1, 0);
    c.back() = q.leading();
    return c;
  }());
  return lead.to_string() + " + O(N^" + std::to_string(q.degree() - 1) + "), period " + std::to_string(q.period());
}

std::string trace_text(const std::vector<TraceStep>& trace) {
  std::string s;
  for (const auto& t : trace) {
    if (t.kind == "normalize") continue;
    s += (s.empty() ? "" : "; ") + t.kind + " " + t.detail;
  }
  return s.empty() ? "-" : s;
}

struct VerifySettings {
  std::string sizes = "4,8,12";
  int trials = 3;
  std::uint64_t seed = 1;
  double tol = 1e-6;
};

json verify_json(const VerifyReport& r) {
  return json{{"pass", r.pass},
              {"points_compared", r.points_compared},
              {"max_abs_error", r.max_abs_error},
              {"max_rel_error", r.max_rel_error},
              {"seed", r.seed},
              {"first_mismatch", r.first_mismatch}};
}

void add_verify_options(CLI::App* cmd, VerifySettings& v) {
  cmd->add_option("--sizes", v.sizes, "comma-separated problem sizes")->capture_default_str();
  cmd->add_option("--trials", v.trials, "random input sets per size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", v.seed, "seed for random inputs")->capture_default_str();
  cmd->add_option("--tol", v.tol, "relative tolerance for float programs")->capture_default_str()->check(CLI::PositiveNumber);
}

void print_face_tree(std::ostream& os, const FaceLattice& lat, std::size_t id, int depth, std::vector<bool>& seen) {
  const Face& f = lat.faces()[id];
  os << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "dim " << f.dim << " " << f.geometry.to_string();
  if (seen[id]) {
    os << " (see above)\n";
    return;
  }
  seen[id] = true;
  os << "\n";
  for (const auto& e : lat.edges())
    if (e.parent == id) print_face_tree(os, lat, e.child, depth + 1, seen);
}

json face_tree_json(const FaceLattice& lat, std::size_t id) {
  const Face& f = lat.faces()[id];
  json node{{"id", id}, {"dim", f.dim}, {"set", f.geometry.to_string()}, {"saturated", f.saturation}};
  json kids = json::array();
  for (const auto& e : lat.edges())
    if (e.parent == id) kids.push_back(json{{"constraint", e.added}, {"face", face_tree_json(lat, e.child)}});
  node["facets"] = kids;
  return node;
}

template <class S>
Bindings<S> read_inputs(const Program& p, Int n, const std::string& path) {
  std::map<std::string, std::vector<std::string>> raw;
  std::string text = read_file(path);
  if (fs::path(path).extension() == ".csv") {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      std::stringstream ls(line);
      std::string name, cell;
      if (!std::getline(ls, name, ',') || name.empty()) continue;
      auto& vals = raw[name];
      while (std::getline(ls, cell, ',')) vals.push_back(cell);
    }
  } else {
    json j = json::parse(text);
    for (auto& [name, arr] : j.items())
      for (auto& x : arr) raw[name].push_back(x.is_string() ? x.template get<std::string>() : x.dump());
  }
  Bindings<S> out;
  for (const auto& v : p.vars) {
    if (v.kind != VarKind::Input) continue;
    auto pts = enumerate_points(v.domain, n);
    auto& vals = raw[v.name];
    if (vals.size() != pts.size())
      fail(ErrorCode::UnboundInput, "input " + v.name + " needs " + std::to_string(pts.size()) + " values, got " +
                                        std::to_string(vals.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string& s = vals[i];
      int inf = s == "inf" || s == "+inf" ? 1 : s == "-inf" ? -1 : 0;
      if constexpr (std::is_same_v<S, double>) {
        out[v.name].emplace(pts[i], inf ? inf * HUGE_VAL : std::stod(s));
      } else {
        out[v.name].emplace(pts[i], inf ? Exact::infinity(inf) : Exact{detail::parse_number(s), 0});
      }
    }
  }
  return out;
}

template <class S>
int run_program(const Program& p, Int n, const std::string& inputs, std::uint64_t seed, bool as_json) {
  auto in = inputs.empty() ? random_inputs<S>(p, n, seed) : read_inputs<S>(p, n, inputs);
  auto res = evaluate(p, in, n);
  json j;
  for (const auto& [name, vals] : res.outputs) {
    json arr = json::array();
    std::string line;
    for (const auto& [z, x] : vals) {
      std::string s = to_string(x);
      line += (line.empty() ? "" : " ") + s;
      if constexpr (std::is_same_v<S, double>) {
        if (std::isinf(x))
          arr.push_back(s);
        else
          arr.push_back(x);
      } else {
        if (!x.inf && x.v.get_den() == 1 && x.v.get_num().fits_slong_p())
          arr.push_back(x.v.get_num().get_si());
        else
          arr.push_back(s);
      }
    }
    j["outputs"][name] = arr;
    if (!as_json) std::cout << name << ": " << line << "\n";
  }
  j["operations"] = res.counters.total();
  if (as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << "operations: " << res.counters.total() << "\n";
  return 0;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << path.string() << ": cannot write\n";
    throw Reported{};
  }
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduction simplification for polyhedral equational programs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  std::string file, file_b, out_path, emit_dir = "variants";
  bool as_json = false, first_only = false, nonneg = false, no_verify = false;
  std::vector<std::string> inline_vars;
  std::size_t budget_nodes = 20000;
  double budget_seconds = 300;
  Int n = 8;
  std::uint64_t seed = 1;
  std::string inputs, equation, sizes = "8,16,24,32,40,48,56,64";
  VerifySettings vs;

  auto* check = app.add_subcommand("check", "parse and validate a program");
  check->add_option("file", file, "program file")->required();

  auto* lattice = app.add_subcommand("lattice", "face lattice of a reduction body");
  lattice->add_option("file", file, "program file")->required();
  lattice->add_option("--equation", equation, "variable whose first reduction is used (default: first with one)");
  lattice->add_flag("--json", as_json, "print the lattice as a JSON tree");

  auto* simplify = app.add_subcommand("simplify", "search for lower-complexity equivalent programs");
  simplify->add_option("file", file, "program file")->required();
  auto* all_flag = simplify->add_flag("--all", "keep every minimum-degree variant (default)");
  simplify->add_flag("--first", first_only, "stop at the first improved variant")->excludes(all_flag);
  simplify->add_option("--budget-nodes", budget_nodes, "search node budget")->capture_default_str()->check(CLI::PositiveNumber);
  simplify->add_option("--budget-seconds", budget_seconds, "search time budget")->capture_default_str()->check(CLI::PositiveNumber);
  simplify->add_option("--emit-dir", emit_dir, "directory for variant files and variants.json")->capture_default_str();
  simplify->add_option("--inline", inline_vars, "substitute a local variable into its readers first");
  simplify->add_flag("--nonneg", nonneg, "inputs are non-negative (allows factoring out of min/max)");
  simplify->add_flag("--no-verify", no_verify, "skip checking each variant against the input program");
  add_verify_options(simplify, vs);

  auto* count = app.add_subcommand("count", "exact operation counts as polynomials in N");
  count->add_option("file", file, "program file")->required();
  count->add_flag("--json", as_json, "print JSON");

  auto* run = app.add_subcommand("run", "evaluate a program at one size");
  run->add_option("file", file, "program file")->required();
  run->add_option("-n,--size", n, "problem size N")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--inputs", inputs, "JSON object or CSV lines of input values in lexicographic point order");
  run->add_option("--seed", seed, "seed for random inputs when --inputs is absent")->capture_default_str();
  run->add_flag("--json", as_json, "print JSON");

  auto* verify = app.add_subcommand("verify", "compare two programs on random inputs");
  verify->add_option("a", file, "first program")->required();
  verify->add_option("b", file_b, "second program")->required();
  add_verify_options(verify, vs);

  auto* profile = app.add_subcommand("profile", "operation counts measured by the interpreter");
  profile->add_option("file", file, "program file")->required();
  profile->add_option("--sizes", sizes, "comma-separated problem sizes")->capture_default_str();
  profile->add_flag("--json", as_json, "print JSON");

  auto* emit = app.add_subcommand("emit-c", "memoized demand-driven C source");
  emit->add_option("file", file, "program file")->required();
  emit->add_option("--out", out_path, "output file (default: stdout)");

  auto* report = app.add_subcommand("report", "simplify, count and verify end to end");
  report->add_option("file", file, "program file")->required();
  report->add_option("--inline", inline_vars, "substitute a local variable into its readers first");
  report->add_option("--budget-nodes", budget_nodes, "search node budget")->capture_default_str()->check(CLI::PositiveNumber);
  report->add_option("--budget-seconds", budget_seconds, "search time budget")->capture_default_str()->check(CLI::PositiveNumber);
  report->add_option("--out", out_path, "also write the report as JSON");
  report->add_flag("--nonneg", nonneg, "inputs are non-negative");
  add_verify_options(report, vs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (check->parsed()) {
      Program p = load(file);
      std::cout << file << ": ok (" << p.vars.size() << " variables, " << p.equations.size() << " equations, "
                << reduce_sites(p).size() << " reductions)\n";
      return 0;
    }

    if (lattice->parsed()) {
      Program p = load(file);
      std::optional<Site> site;
      for (const auto& s : reduce_sites(p))
        if (!site && (equation.empty() || p.equations[s.equation].var == equation)) site = s;
      if (!site) {
        std::cerr << file << ": no reduction" << (equation.empty() ? "" : " in the equation for " + equation) << "\n";
        return 1;
      }
      const auto& r = *expr_at(p, *site)->as<Reduce>();
      auto body = body_scope(scope_at(p, *site), r).domain;
      auto lat = build_face_lattice(body);
      if (as_json) {
        std::cout << json{{"equation", p.equations[site->equation].var}, {"faces", lat.faces().size()},
                          {"root", face_tree_json(lat, 0)}}
                         .dump(2)
                  << "\n";
      } else {
        std::vector<bool> seen(lat.faces().size());
        print_face_tree(std::cout, lat, 0, 0, seen);
        std::cout << lat.faces().size() << " faces\n";
      }
      return 0;
    }

    if (simplify->parsed()) {
      Program p = inline_locals(load(file), inline_vars);
      SearchOptions opt;
      opt.max_nodes = budget_nodes;
      opt.max_seconds = budget_seconds;
      opt.first_only = first_only;
      opt.nonnegative_inputs = nonneg;
      auto res = simplify_all(p, opt);
      fs::create_directories(emit_dir);
      json list = json::array();
      for (std::size_t k = 0; k < res.variants.size(); ++k) {
        const auto& v = res.variants[k];
        std::string id = stem(file) + "_v" + std::to_string(k + 1);
        write_file(fs::path(emit_dir) / (id + ".red"), print_program(v.program));
        json entry{{"program_id", id},
                   {"trace", trace_json(v.trace)},
                   {"degree", v.degree()},
                   {"polynomial", v.complexity.to_string()}};
        if (no_verify)
          entry["verified"] = nullptr;
        else
          entry["verified"] = verify_equivalence(p, v.program, parse_sizes(vs.sizes), vs.trials, vs.seed, vs.tol).pass;
        list.push_back(entry);
        std::cout << id << "  degree " << v.degree() << "  " << short_text(v.complexity) << "  " << trace_text(v.trace)
                  << "\n";
      }
      json doc{{"program", file},
               {"original", polynomial_json(res.original)},
               {"nodes", res.nodes},
               {"budget_exceeded", res.budget_exceeded},
               {"variants", list}};
      write_file(fs::path(emit_dir) / "variants.json", doc.dump(2) + "\n");
      std::cout << res.variants.size() << " variant(s) written to " << emit_dir << "\n";
      if (res.budget_exceeded) std::cerr << "warning: search budget exhausted; results may be incomplete\n";
      return 0;
    }

    if (count->parsed()) {
      Program p = load(file);
      auto rep = program_ops(p);
      if (as_json) {
        json eqs = json::array();
        for (const auto& e : rep.equations) {
          json bodies = json::array();
          for (const auto& b : e.bodies) bodies.push_back(polynomial_json(b));
          eqs.push_back(json{{"var", e.var}, {"values", polynomial_json(e.values)}, {"reductions", bodies},
                             {"total", polynomial_json(e.total)}});
        }
        std::cout << json{{"equations", eqs}, {"total", polynomial_json(rep.total)}}.dump(2) << "\n";
      } else {
        for (const auto& e : rep.equations) std::cout << std::left << std::setw(12) << e.var << e.total.to_string() << "\n";
        std::cout << std::left << std::setw(12) << "total" << rep.total.to_string() << "  (degree " << rep.degree()
                  << ")\n";
      }
      return 0;
    }

    if (run->parsed()) {
      Program p = load(file);
      if (p.scalar() == ScalarKind::Float) return run_program<double>(p, n, inputs, seed, as_json);
      return run_program<Exact>(p, n, inputs, seed, as_json);
    }

    if (verify->parsed()) {
      Program a = load(file), b = load(file_b);
      auto rep = verify_equivalence(a, b, parse_sizes(vs.sizes), vs.trials, vs.seed, vs.tol);
      std::cout << verify_json(rep).dump(2) << "\n";
      return rep.pass ? 0 : 1;
    }

    if (profile->parsed()) {
      Program p = load(file);
      auto prof = op_profile(p, parse_sizes(sizes));
      std::optional<double> slope;
      if (prof.size() >= 4) slope = measured_degree(prof);
      if (as_json) {
        json rows = json::array();
        for (const auto& [sz, ops] : prof) rows.push_back(json{{"N", sz}, {"ops", ops}});
        json j{{"profile", rows}};
        j["measured_degree"] = slope ? json(*slope) : json(nullptr);
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "N\tops\n";
        for (const auto& [sz, ops] : prof) std::cout << sz << "\t" << ops << "\n";
        if (slope) std::cout << "measured degree " << std::fixed << std::setprecision(3) << *slope << "\n";
      }
      return 0;
    }

    if (emit->parsed()) {
      auto unit = emit_c(load(file));
      if (out_path.empty())
        std::cout << unit.source;
      else
        write_file(out_path, unit.source);
      return 0;
    }

    if (report->parsed()) {
      auto t0 = std::chrono::steady_clock::now();
      Program p = inline_locals(load(file), inline_vars);
      SearchOptions opt;
      opt.max_nodes = budget_nodes;
      opt.max_seconds = budget_seconds;
      opt.nonnegative_inputs = nonneg;
      auto res = simplify_all(p, opt);
      double search_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      auto sz = parse_sizes(vs.sizes);
      json rows = json::array();
      std::vector<std::string> shown = {short_text(res.original)};
      for (const auto& v : res.variants) shown.push_back(short_text(v.complexity));
      rows.push_back(json{{"program_id", stem(file)}, {"trace", json::array()}, {"degree", res.original.degree()},
                          {"polynomial", res.original.to_string()}, {"verified", nullptr}});
      bool all_ok = true;
      for (std::size_t k = 0; k < res.variants.size(); ++k) {
        const auto& v = res.variants[k];
        auto vr = verify_equivalence(p, v.program, sz, vs.trials, vs.seed, vs.tol);
        all_ok &= vr.pass;
        rows.push_back(json{{"program_id", stem(file) + "_v" + std::to_string(k + 1)}, {"trace", trace_json(v.trace)},
                            {"degree", v.degree()}, {"polynomial", v.complexity.to_string()}, {"verified", vr.pass}});
      }
      double total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << std::left << std::setw(22) << "program" << std::setw(8) << "degree" << std::setw(42) << "operations"
                << std::setw(10) << "verified" << "derivation\n";
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        std::string ver = r["verified"].is_null() ? "-" : r["verified"].get<bool>() ? "PASS" : "FAIL";
        std::string deriv = k == 0 ? "original" : trace_text(res.variants[k - 1].trace);
        std::cout << std::left << std::setw(22) << r["program_id"].get<std::string>() << std::setw(8)
                  << r["degree"].get<std::size_t>() << std::setw(42) << shown[k] << std::setw(10)
                  << ver << deriv << "\n";
      }
      std::cout << res.variants.size() << " variant(s), " << res.distinct_programs << " distinct; " << res.nodes
                << " search nodes" << (res.budget_exceeded ? " (budget exhausted)" : "") << "; search " << std::fixed
                << std::setprecision(2) << search_s << " s, total " << total_s << " s\n";
      if (!out_path.empty()) {
        json doc{{"program", file},         {"rows", rows},
                 {"variants", res.variants.size()}, {"distinct_programs", res.distinct_programs},
                 {"nodes", res.nodes},      {"budget_exceeded", res.budget_exceeded},
                 {"seed", vs.seed},         {"sizes", sz},
                 {"search_seconds", search_s}, {"total_seconds", total_s}};
        write_file(out_path, doc.dump(2) + "\n");
      }
      return all_ok ? 0 : 1;
    }
  } catch (const Reported& r) {
    return r.code;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return 1;
  }
  return 2;
}
