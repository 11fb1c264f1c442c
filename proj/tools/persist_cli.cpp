// Command-line front end: build states, run persistency analyses, emit the
// summary table and headline scalars as JSON/CSV.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "persist/headline.hpp"
#include "persist/persistency.hpp"
#include "persist/states.hpp"

namespace {

using nlohmann::json;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw persist::Error("cannot open output file: " + out_path);
  f << text;
}

struct CommonOpts {
  std::optional<std::uint64_t> seed;
  int restarts = 32;
  double tol = 1e-3;
  std::string format = "json";
  std::string out;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "RNG seed (required for stochastic runs)");
  cmd->add_option("--restarts", o.restarts, "search restarts")
      ->capture_default_str();
  cmd->add_option("--tol", o.tol, "strength bisection tolerance")
      ->capture_default_str();
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
}

std::uint64_t require_seed(const CommonOpts& o) {
  if (!o.seed) throw persist::Error("--seed is required for stochastic runs");
  return *o.seed;
}

persist::PersistencyBudget make_budget(const CommonOpts& o) {
  persist::PersistencyBudget b;
  b.search_restarts = o.restarts;
  b.strength_tol = o.tol;
  return b;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

std::string report_csv(const persist::PersistencyReport& r) {
  std::ostringstream s;
  s << "spec,n,pe_lo,pe_hi,pnl_lb,pnl_star_lb,w\n";
  s << r.spec << ',' << r.n << ',' << r.pe.lo << ',' << r.pe.hi << ','
    << r.pnl.lower_bound << ',' << r.pnl_star.lower_bound << ',';
  if (r.strength_w) s << r.strength_w->w;
  s << '\n';
  return s.str();
}

int cmd_analyze(const std::string& spec, const CommonOpts& o,
                const persist::AnalysisSelection& sel) {
  const std::uint64_t seed = require_seed(o);
  persist::StateSource src{persist::build_state(spec)};
  const persist::PersistencyReport rep =
      analyze_persistency(src, spec, make_budget(o), seed, sel);
  if (o.format == "csv")
    emit(report_csv(rep), o.out);
  else
    emit(rep.to_json().dump(2) + "\n", o.out);
  return rep.pe.lo == rep.pe.hi ? 0 : 2;
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

struct PaperRow {
  int pe, pnl;
  double w;
};

// Published summary-table values; reference data only, never inputs.
const std::map<std::string, PaperRow>& paper_table() {
  static const std::map<std::string, PaperRow> t = {
      {"w:3", {2, 1, 0.644}},          {"w:4", {3, 2, 0.989}},
      {"dicke:4:2", {3, 1, 0.471}},    {"ti:4:2", {2, 2, 0.707}},
      {"linear:4", {2, 2, 0.707}},     {"w:5", {4, 2, 0.860}},
      {"dicke:5:2", {4, 2, 0.907}},    {"ti:5:2", {3, 3, 0.772}},
      {"linear:5", {2, 2, 0.667}},     {"ring:5", {2, 2, 0.577}},
      {"w:6", {5, 2, 0.751}},          {"dicke:6:2", {5, 2, 0.783}},
      {"dicke:6:3", {5, 3, 0.978}},    {"ti:6:2", {4, 3, 0.644}},
      {"ti:6:3", {3, 3, 0.644}},       {"linear:6", {2, 2, 0.547}},
      {"ring:6", {3, 3, 0.707}},       {"grid:2x3:periodic", {3, 3, 0.667}},
      {"grid:2x3", {3, 3, 0.707}},     {"w:7", {6, 3, 0.985}},
      {"dicke:7:3", {6, 3, 0.968}},    {"ti:7:3", {4, 3, 0.514}},
      {"ring:7", {3, 3, 0.667}},       {"linear:7", {3, 3, 0.707}},
  };
  return t;
}

std::vector<std::string> table_rows(const std::vector<std::string>& families,
                                    int n_lo, int n_hi) {
  std::vector<std::string> rows;
  auto wanted = [&](const std::string& f) {
    return families.empty() ||
           std::find(families.begin(), families.end(), f) != families.end();
  };
  for (int n = n_lo; n <= n_hi; ++n) {
    if (wanted("ghz") && n >= 3)
      rows.push_back("ghz:" + std::to_string(n) + ":2");
    if (wanted("w") && n >= 3) rows.push_back("w:" + std::to_string(n));
    if (wanted("dicke"))
      for (int m = 2; 2 * m <= n; ++m)
        rows.push_back("dicke:" + std::to_string(n) + ":" + std::to_string(m));
    if (wanted("ti"))
      for (int m = 2; 2 * m <= n; ++m)
        rows.push_back("ti:" + std::to_string(n) + ":" + std::to_string(m));
    if (wanted("linear") && n >= 4)
      rows.push_back("linear:" + std::to_string(n));
    if (wanted("ring") && n >= 5) rows.push_back("ring:" + std::to_string(n));
    if (wanted("grid") && n == 6) {
      rows.push_back("grid:2x3");
      rows.push_back("grid:2x3:periodic");
    }
  }
  return rows;
}

int cmd_table(const std::vector<std::string>& families, int n_lo, int n_hi,
              bool compare, const CommonOpts& o) {
  const std::uint64_t seed = require_seed(o);
  const std::vector<std::string> rows = table_rows(families, n_lo, n_hi);
  std::vector<persist::PersistencyReport> reps(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < rows.size();
         i = next.fetch_add(1)) {
      persist::StateSource src{persist::build_state(rows[i])};
      reps[i] = analyze_persistency(src, rows[i], make_budget(o),
                                    persist::derive_seed(seed, i), {});
    }
  };
  const int jobs = std::max(1, std::min<int>(o.jobs, (int)rows.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  auto paper_of = [&](const std::string& spec) -> const PaperRow* {
    auto it = paper_table().find(spec);
    return it == paper_table().end() ? nullptr : &it->second;
  };

  if (o.format == "csv") {
    std::ostringstream s;
    s << "state,pe_lo,pe_hi,pnl_lb,w";
    if (compare) s << ",paper_pe,paper_pnl,paper_w,d_pe,d_pnl,d_w";
    s << '\n';
    for (const auto& r : reps) {
      s << r.spec << ',' << r.pe.lo << ',' << r.pe.hi << ','
        << r.pnl.lower_bound << ',';
      if (r.strength_w) s << r.strength_w->w;
      if (compare) {
        if (const PaperRow* p = paper_of(r.spec)) {
          s << ',' << p->pe << ',' << p->pnl << ',' << p->w;
          s << ',' << (r.pe.lo - p->pe) << ',' << (r.pnl.lower_bound - p->pnl)
            << ',';
          if (r.strength_w) s << (r.strength_w->w - p->w);
        } else {
          s << ",,,,,,";
        }
      }
      s << '\n';
    }
    emit(s.str(), o.out);
  } else {
    json out = json::array();
    for (const auto& r : reps) {
      json row = {{"state", r.spec},
                  {"pe", {r.pe.lo, r.pe.hi}},
                  {"pnl_lb", r.pnl.lower_bound},
                  {"pnl_star_lb", r.pnl_star.lower_bound},
                  {"w", r.strength_w ? json(r.strength_w->w) : json(nullptr)}};
      if (compare) {
        if (const PaperRow* p = paper_of(r.spec))
          row["paper"] = {{"pe", p->pe}, {"pnl", p->pnl}, {"w", p->w}};
        else
          row["paper"] = nullptr;
      }
      out.push_back(std::move(row));
    }
    emit(out.dump(2) + "\n", o.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// headline / asymmetry
// ---------------------------------------------------------------------------

int cmd_headline(const CommonOpts& o) {
  const std::vector<persist::HeadlineTarget> targets =
      persist::headline_report(require_seed(o));
  if (o.format == "csv") {
    std::ostringstream s;
    s << "name,target,computed,delta,tolerance,pass\n";
    for (const auto& t : targets)
      s << '"' << t.name << "\"," << t.target << ',' << t.computed << ','
        << std::abs(t.target - t.computed) << ',' << t.tolerance << ','
        << (t.pass ? "pass" : "fail") << '\n';
    emit(s.str(), o.out);
  } else {
    json out = json::array();
    for (const auto& t : targets)
      out.push_back({{"name", t.name},
                     {"target", t.target},
                     {"computed", t.computed},
                     {"delta", std::abs(t.target - t.computed)},
                     {"tolerance", t.tolerance},
                     {"pass", t.pass}});
    emit(out.dump(2) + "\n", o.out);
  }
  bool all = true;
  for (const auto& t : targets) all = all && t.pass;
  return all ? 0 : 2;
}

persist::Matrix matrix_from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw persist::Error("cannot open operator file: " + path);
  json j;
  f >> j;
  const json& rows = j.contains("matrix") ? j.at("matrix") : j;
  const long n = static_cast<long>(rows.size());
  persist::Matrix m(n, n);
  for (long i = 0; i < n; ++i) {
    if (static_cast<long>(rows[i].size()) != n)
      throw persist::Error("operator matrix is not square");
    for (long k = 0; k < n; ++k)
      m(i, k) = persist::Complex(rows[i][k].at(0).get<double>(),
                                 rows[i][k].at(1).get<double>());
  }
  return m;
}

int cmd_asymmetry(double s, double l, const std::string& op_path,
                  const CommonOpts& o) {
  const persist::Matrix b = matrix_from_json_file(op_path);
  const double bound = persist::asymmetry_bound(s, l, b);
  if (o.format == "csv") {
    std::ostringstream os;
    os << "s,l,bound\n" << s << ',' << l << ',' << bound << '\n';
    emit(os.str(), o.out);
  } else {
    emit(json({{"s", s}, {"l", l}, {"bound", bound}}).dump(2) + "\n", o.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multipartite persistency analysis"};
  app.require_subcommand(1);

  CommonOpts o;

  std::string build_spec, build_out;
  CLI::App* build = app.add_subcommand("build", "write a state as JSON");
  build->add_option("spec", build_spec, "state spec, e.g. w:4")->required();
  build->add_option("--out", build_out, "output path (default stdout)");

  std::string analyze_spec;
  std::vector<std::string> analyses;
  CLI::App* analyze = app.add_subcommand("analyze", "full persistency report");
  analyze->add_option("spec", analyze_spec, "state spec")->required();
  analyze
      ->add_option("--analyses", analyses,
                   "subset of {pe,pnl,hidden,strength} (default all)")
      ->delimiter(',');
  add_common(analyze, o);

  std::vector<std::string> families;
  std::string n_range = "3..7";
  bool compare = false;
  CLI::App* table = app.add_subcommand("table", "summary table rows");
  table
      ->add_option("--families", families,
                   "state families (ghz,w,dicke,ti,linear,ring,grid)")
      ->delimiter(',');
  table->add_option("--n", n_range, "site range LO..HI")
      ->capture_default_str();
  table->add_flag("--compare", compare,
                  "append published reference values and deltas");
  add_common(table, o);

  CLI::App* headline = app.add_subcommand("headline", "scalar targets");
  add_common(headline, o);

  double asym_s = 0.0, asym_l = 0.0;
  std::string op_path;
  CLI::App* asym = app.add_subcommand("asymmetry", "asymmetry bound");
  asym->add_option("--s", asym_s, "observed Bell value")->required();
  asym->add_option("--l", asym_l, "symmetric-state bound")->required();
  asym->add_option("--operator", op_path, "Bell operator JSON file")
      ->required();
  add_common(asym, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      emit(persist::state_to_json(persist::build_state(build_spec)).dump(2) +
               "\n",
           build_out);
      return 0;
    }
    if (analyze->parsed()) {
      persist::AnalysisSelection sel;
      if (!analyses.empty()) {
        sel = {false, false, false, false};
        for (const auto& a : analyses) {
          if (a == "pe")
            sel.entanglement = true;
          else if (a == "pnl")
            sel.nonlocality = true;
          else if (a == "hidden")
            sel.hidden = true;
          else if (a == "strength")
            sel.strength = true;
          else
            throw persist::Error("unknown analysis: " + a);
        }
      }
      return cmd_analyze(analyze_spec, o, sel);
    }
    if (table->parsed()) {
      int n_lo = 0, n_hi = -1;  // empty range -> header-only output
      if (!n_range.empty()) {
        const auto dots = n_range.find("..");
        if (dots == std::string::npos) {
          n_lo = n_hi = std::stoi(n_range);
        } else {
          n_lo = std::stoi(n_range.substr(0, dots));
          n_hi = std::stoi(n_range.substr(dots + 2));
        }
      }
      return cmd_table(families, n_lo, n_hi, compare, o);
    }
    if (headline->parsed()) return cmd_headline(o);
    if (asym->parsed()) return cmd_asymmetry(asym_s, asym_l, op_path, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
