#pragma once

// Command-line front end: job description, document rendering, dispatch.
//
// Every command produces its whole document as one string and an exit code:
// 0 when all checks pass, 2 when a check fails, while malformed input
// surfaces as an exception that the binary maps to exit code 1.  Documents
// are built from deterministically ordered data only, so repeated runs are
// byte-identical.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "finitezip.hpp"
#include "parabolic.hpp"
#include "rootdata.hpp"
#include "zipcomb.hpp"

namespace zipstrata {

using ordered_json = nlohmann::ordered_json;

struct JobSpec {
  std::string command;  // roots | cosets | zip-poset | bruhat-strata | purity-report | oracle
  std::string cartan;   // series tag or path to a matrix file
  std::vector<int> J, K;
  bool has_K = false;
  std::vector<int> sigma;  // empty = identity
  long long q = 0;
  int n = 0, d = 0, p = 0, m_max = 4;
  std::string format = "text";
};

struct RunResult {
  int exit_code = 0;
  std::string document;
};

namespace cli_detail {

inline bool looks_like_series_tag(const std::string& s) {
  if (s.size() < 2 || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

inline CartanSpec load_cartan(const std::string& source, const std::vector<int>& sigma) {
  CartanSpec spec;
  if (looks_like_series_tag(source)) {
    spec = cartan_series(source);
  } else {
    std::ifstream in(source);
    if (!in) throw Error("cannot open Cartan matrix file: " + source);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream row(line);
      std::vector<int> entries;
      int v;
      while (row >> v) entries.push_back(v);
      if (!row.eof()) throw MalformedCartan("non-integer token in Cartan matrix file");
      spec.entries.push_back(std::move(entries));
    }
    spec.label = "custom";
  }
  spec.automorphism = sigma;
  validate_cartan(spec);
  return spec;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline ordered_json nodes_json(const std::vector<int>& nodes) {
  return ordered_json(nodes);
}

inline ordered_json datum_json(const std::string& label, const CombZipDatum& datum) {
  ordered_json out;
  out["cartan"] = label;
  out["rank"] = datum.group->rank;
  out["J"] = nodes_json(datum.J);
  out["K"] = nodes_json(datum.K);
  ordered_json psi = ordered_json::array();
  for (const auto& [j, k] : datum.psi) psi.push_back({j, k});
  out["psi"] = psi;
  if (datum.sigma.empty())
    out["sigma"] = "id";
  else
    out["sigma"] = nodes_json(datum.sigma);
  out["q"] = datum.q;
  return out;
}

inline std::string datum_text(const std::string& label, const CombZipDatum& datum) {
  std::ostringstream out;
  auto set_str = [](const std::vector<int>& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(v[i]);
    }
    return s + "}";
  };
  out << "datum: cartan " << label << ", J " << set_str(datum.J) << ", K " << set_str(datum.K)
      << ", sigma ";
  if (datum.sigma.empty()) {
    out << "id";
  } else {
    for (std::size_t i = 0; i < datum.sigma.size(); ++i) out << (i ? "," : "") << datum.sigma[i];
  }
  return out.str();
}

inline std::string finish_json(const ordered_json& doc) { return doc.dump(2) + "\n"; }

// --- roots -------------------------------------------------------------------

inline RunResult run_roots(const JobSpec& job) {
  const CartanSpec spec = load_cartan(job.cartan, job.sigma);
  const WeylGroupHandle W = WeylGroup::build(spec);
  RunResult result;
  if (job.format == "json") {
    ordered_json doc;
    doc["order"] = static_cast<long long>(W->order);
    doc["positive_roots"] = W->rs.n_pos;
    result.document = finish_json(doc);
  } else if (job.format == "text") {
    std::ostringstream out;
    out << "cartan: " << spec.label << "\n"
        << "rank: " << W->rank << "\n"
        << "|W|: " << W->order << "\n"
        << "positive roots: " << W->rs.n_pos << "\n"
        << "longest element length: " << length(W->longest()) << "\n";
    result.document = out.str();
  } else {
    throw Error("format '" + job.format + "' is not supported for roots");
  }
  return result;
}

// --- cosets ------------------------------------------------------------------

inline RunResult run_cosets(const JobSpec& job) {
  const CartanSpec spec = load_cartan(job.cartan, job.sigma);
  const WeylGroupHandle W = WeylGroup::build(spec);
  RunResult result;
  if (!job.has_K) {
    const CosetTable table = min_coset_reps(*W, job.J);
    if (job.format == "json") {
      ordered_json doc;
      doc["cartan"] = spec.label;
      doc["rank"] = W->rank;
      doc["J"] = nodes_json(table.J);
      doc["count"] = table.reps.size();
      ordered_json reps = ordered_json::array();
      for (const WeylElt& w : table.reps)
        reps.push_back({{"word", render_word(w)}, {"length", length(w)}});
      doc["reps"] = reps;
      result.document = finish_json(doc);
    } else if (job.format == "text") {
      std::ostringstream out;
      out << "cartan: " << spec.label << "\n";
      out << "minimal coset representatives for J {";
      for (std::size_t i = 0; i < table.J.size(); ++i) out << (i ? "," : "") << table.J[i];
      out << "}: " << table.reps.size() << "\n";
      for (const WeylElt& w : table.reps)
        out << "  " << render_word(w) << " (" << length(w) << ")\n";
      result.document = out.str();
    } else {
      throw Error("format '" + job.format + "' is not supported for cosets");
    }
    return result;
  }

  const DoubleCosetTable table = min_double_coset_reps(*W, job.J, job.K);
  if (job.format == "json") {
    ordered_json doc;
    doc["cartan"] = spec.label;
    doc["rank"] = W->rank;
    doc["J"] = nodes_json(table.J);
    doc["K"] = nodes_json(table.K);
    doc["count"] = table.reps.size();
    ordered_json reps = ordered_json::array();
    for (const WeylElt& x : table.reps) {
      const auto fiber = fiber_of(table, x);
      reps.push_back({{"word", render_word(x)},
                      {"length", length(x)},
                      {"fiber_size", fiber.size()},
                      {"max_fiber_length", length(max_length_in_fiber(table, x))}});
    }
    doc["reps"] = reps;
    result.document = finish_json(doc);
  } else if (job.format == "text") {
    std::ostringstream out;
    out << "cartan: " << spec.label << "\n";
    out << "minimal double coset representatives for J {";
    for (std::size_t i = 0; i < table.J.size(); ++i) out << (i ? "," : "") << table.J[i];
    out << "} K {";
    for (std::size_t i = 0; i < table.K.size(); ++i) out << (i ? "," : "") << table.K[i];
    out << "}: " << table.reps.size() << "\n";
    for (const WeylElt& x : table.reps)
      out << "  " << render_word(x) << " (" << length(x) << ")  fiber "
          << fiber_of(table, x).size() << "  max fiber length "
          << length(max_length_in_fiber(table, x)) << "\n";
    result.document = out.str();
  } else {
    throw Error("format '" + job.format + "' is not supported for cosets");
  }
  return result;
}

// --- zip-poset ----------------------------------------------------------------

inline std::string poset_dot(const StratPoset& poset) {
  std::ostringstream out;
  out << "// closure order: edges point from smaller to larger stratum\n";
  out << "digraph zip_strata {\n  rankdir=BT;\n";
  for (std::size_t i = 0; i < poset.nodes.size(); ++i)
    out << "  n" << i << " [label=\"" << render_word(poset.nodes[i].w) << " ("
        << poset.nodes[i].len << ")\"];\n";
  for (const auto& [lo, hi] : poset.covers) out << "  n" << lo << " -> n" << hi << ";\n";
  out << "}\n";
  return out.str();
}

inline RunResult run_zip_poset(const JobSpec& job) {
  const CartanSpec spec = load_cartan(job.cartan, job.sigma);
  const WeylGroupHandle W = WeylGroup::build(spec);
  const CombZipDatum datum = zip_datum_from_cocharacter(W, job.J, job.sigma, job.q);
  const StratPoset poset = closure_poset(datum);
  const PurityReport purity = purity_check(poset);
  const MonotonicityReport mono = monotonicity_check(datum);

  RunResult result;
  result.exit_code = purity.pass && mono.pass ? 0 : 2;
  if (job.format == "json") {
    ordered_json doc;
    doc["datum"] = datum_json(spec.label, datum);
    ordered_json strata = ordered_json::array();
    for (const StratNode& node : poset.nodes)
      strata.push_back(
          {{"word", render_word(node.w)}, {"length", node.len}, {"dim", node.dim}});
    doc["strata"] = strata;
    ordered_json covers = ordered_json::array();
    for (const auto& [lo, hi] : poset.covers) covers.push_back({lo, hi});
    doc["covers"] = covers;
    doc["checks"] = {{"purity", purity.pass ? "PASS" : "FAIL"},
                     {"monotone", mono.pass ? "PASS" : "FAIL"}};
    result.document = finish_json(doc);
  } else if (job.format == "dot") {
    result.document = poset_dot(poset);
  } else if (job.format == "text") {
    std::ostringstream out;
    out << datum_text(spec.label, datum) << "\n";
    out << "strata: " << poset.nodes.size() << "\n";
    for (std::size_t i = 0; i < poset.nodes.size(); ++i)
      out << "  " << i << ": " << render_word(poset.nodes[i].w) << " (len "
          << poset.nodes[i].len << ", dim " << poset.nodes[i].dim << ")\n";
    out << "covers:\n";
    for (const auto& [lo, hi] : poset.covers)
      out << "  " << render_word(poset.nodes[lo].w) << " < " << render_word(poset.nodes[hi].w)
          << "\n";
    out << "checks: purity " << (purity.pass ? "PASS" : "FAIL") << ", monotone "
        << (mono.pass ? "PASS" : "FAIL") << "\n";
    result.document = out.str();
  } else {
    throw Error("format '" + job.format + "' is not supported for zip-poset");
  }
  return result;
}

// --- bruhat-strata --------------------------------------------------------------

inline RunResult run_bruhat_strata(const JobSpec& job) {
  const CartanSpec spec = load_cartan(job.cartan, job.sigma);
  const WeylGroupHandle W = WeylGroup::build(spec);
  const CombZipDatum datum = zip_datum_from_cocharacter(W, job.J, job.sigma, job.q);
  const std::vector<BruhatStratum> strata = bruhat_strata(datum);
  const MonotonicityReport mono = monotonicity_check(datum);
  const int S = static_cast<int>(strata.size());

  // Orbit classes of the coarse strata under the induced sigma action.
  std::vector<std::vector<int>> classes;
  {
    std::vector<char> visited(S, 0);
    std::vector<int> pos_of;
    for (int i = 0; i < S; ++i) {
      if (visited[i]) continue;
      std::vector<int> cls;
      WeylElt cur = strata[i].x;
      for (;;) {
        int at = -1;
        for (int t = 0; t < S; ++t)
          if (strata[t].x == cur) at = t;
        if (at < 0 || visited[at]) break;
        visited[at] = 1;
        cls.push_back(at);
        cur = sigma_translate_double(datum, cur);
      }
      std::sort(cls.begin(), cls.end());
      classes.push_back(std::move(cls));
    }
  }

  // Cover relations of the coarse closure order on classes.
  std::vector<std::vector<char>> leq(classes.size(), std::vector<char>(classes.size(), 0));
  for (std::size_t a = 0; a < classes.size(); ++a)
    for (std::size_t b = 0; b < classes.size(); ++b)
      leq[a][b] = bruhat_order_leq(datum, strata[classes[a][0]].x, strata[classes[b][0]].x);
  std::vector<std::pair<int, int>> covers;
  for (std::size_t a = 0; a < classes.size(); ++a)
    for (std::size_t b = 0; b < classes.size(); ++b) {
      if (a == b || !leq[a][b]) continue;
      bool cover = true;
      for (std::size_t c = 0; c < classes.size() && cover; ++c)
        if (c != a && c != b && leq[a][c] && leq[c][b]) cover = false;
      if (cover) covers.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  std::sort(covers.begin(), covers.end());

  RunResult result;
  result.exit_code = mono.pass ? 0 : 2;
  if (job.format == "json") {
    ordered_json doc;
    doc["datum"] = datum_json(spec.label, datum);
    ordered_json sj = ordered_json::array();
    for (const BruhatStratum& s : strata)
      sj.push_back({{"word", render_word(s.x)}, {"length", s.len}, {"dim", s.dim}});
    doc["strata"] = sj;
    ordered_json cj = ordered_json::array();
    for (const auto& cls : classes) cj.push_back(cls);
    doc["classes"] = cj;
    ordered_json covj = ordered_json::array();
    for (const auto& [a, b] : covers) covj.push_back({a, b});
    doc["covers"] = covj;
    doc["checks"] = {{"monotone", mono.pass ? "PASS" : "FAIL"}};
    result.document = finish_json(doc);
  } else if (job.format == "dot") {
    std::ostringstream out;
    out << "// coarse closure order: edges point from smaller to larger stratum\n";
    out << "digraph bruhat_strata {\n  rankdir=BT;\n";
    for (std::size_t i = 0; i < classes.size(); ++i)
      out << "  n" << i << " [label=\"" << render_word(strata[classes[i][0]].x) << " ("
          << strata[classes[i][0]].len << ")\"];\n";
    for (const auto& [a, b] : covers) out << "  n" << a << " -> n" << b << ";\n";
    out << "}\n";
    result.document = out.str();
  } else if (job.format == "text") {
    std::ostringstream out;
    out << datum_text(spec.label, datum) << "\n";
    out << "coarse strata: " << S << "\n";
    for (int i = 0; i < S; ++i)
      out << "  " << i << ": " << render_word(strata[i].x) << " (len " << strata[i].len
          << ", dim " << strata[i].dim << ")\n";
    out << "classes:";
    for (const auto& cls : classes) {
      out << " {";
      for (std::size_t i = 0; i < cls.size(); ++i) out << (i ? "," : "") << cls[i];
      out << "}";
    }
    out << "\nchecks: monotone " << (mono.pass ? "PASS" : "FAIL") << "\n";
    result.document = out.str();
  } else {
    throw Error("format '" + job.format + "' is not supported for bruhat-strata");
  }
  return result;
}

// --- purity-report ---------------------------------------------------------------

inline RunResult run_purity_report(const JobSpec& job) {
  const CartanSpec spec = load_cartan(job.cartan, job.sigma);
  const WeylGroupHandle W = WeylGroup::build(spec);
  const CombZipDatum datum = zip_datum_from_cocharacter(W, job.J, job.sigma, job.q);
  const StratPoset poset = closure_poset(datum);
  const PurityReport purity = purity_check(poset);

  RunResult result;
  result.exit_code = purity.pass ? 0 : 2;
  if (job.format == "json") {
    ordered_json doc;
    doc["datum"] = datum_json(spec.label, datum);
    ordered_json covers = ordered_json::array();
    for (const PurityCover& c : purity.covers)
      covers.push_back({{"lower", render_word(poset.nodes[c.lower].w)},
                        {"upper", render_word(poset.nodes[c.upper].w)},
                        {"drop", c.drop}});
    doc["covers"] = covers;
    doc["checks"] = {{"purity", purity.pass ? "PASS" : "FAIL"}};
    result.document = finish_json(doc);
  } else if (job.format == "text") {
    std::ostringstream out;
    out << datum_text(spec.label, datum) << "\n";
    out << "covers with dimension drops:\n";
    for (const PurityCover& c : purity.covers)
      out << "  " << render_word(poset.nodes[c.lower].w) << " < "
          << render_word(poset.nodes[c.upper].w) << ": drop " << c.drop << "\n";
    out << "checks: purity " << (purity.pass ? "PASS" : "FAIL") << "\n";
    result.document = out.str();
  } else {
    throw Error("format '" + job.format + "' is not supported for purity-report");
  }
  return result;
}

// --- oracle ----------------------------------------------------------------------

inline RunResult run_oracle(const JobSpec& job) {
  if (job.n < 1) throw InvalidShape("oracle needs a matrix size n >= 1");
  const TowerReport tower = geometric_orbit_count(job.n, job.d, job.p, job.m_max);
  const FiniteZipInstance& inst = *tower.base;

  CartanSpec aspec;
  if (job.n >= 2) aspec = cartan_series("A" + std::to_string(job.n - 1));
  const WeylGroupHandle W = WeylGroup::build(aspec);
  const CosetTable jw = min_coset_reps(*W, shape_type_J(job.n, job.d));
  const int coset_count = static_cast<int>(jw.reps.size());

  bool match_ok = false;
  std::string match_note;
  MatchResult match;
  std::vector<DimEstimate> dims;
  bool dims_ok = true;
  if (tower.stabilized && tower.geometric_count == coset_count) {
    try {
      match = match_representatives(tower, jw);
      match_ok = true;
      for (int i = 0; i < coset_count; ++i) {
        dims.push_back(dimension_estimate(tower, match.translates[i],
                                          inst.dim_P() + length(jw.reps[i])));
        if (!dims.back().within_tolerance) dims_ok = false;
      }
    } catch (const NoFrameFound& e) {
      match_note = e.what();
    }
  }
  const bool pass = tower.stabilized && tower.geometric_count == coset_count && match_ok && dims_ok;

  RunResult result;
  result.exit_code = pass ? 0 : 2;
  if (job.format == "json") {
    ordered_json doc;
    doc["instance"] = {{"n", job.n}, {"d", job.d}, {"p", job.p}, {"m_max", job.m_max}};
    doc["orders"] = {{"G", inst.g_order}, {"P", inst.p_order}, {"E", inst.e_order}};
    doc["counts"] = tower.counts;
    doc["stabilized"] = tower.stabilized;
    doc["geometric_orbits"] = tower.geometric_count;
    doc["coset_count"] = coset_count;
    if (match_ok) {
      ordered_json frame = ordered_json::array();
      for (int i = 0; i < inst.n; ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < inst.n; ++j) row.push_back(match.frame.at(i, j));
        frame.push_back(row);
      }
      doc["frame"] = frame;
      ordered_json classes = ordered_json::array();
      for (int i = 0; i < coset_count; ++i)
        classes.push_back({{"word", render_word(jw.reps[i])},
                           {"length", length(jw.reps[i])},
                           {"expected_dim", dims[i].expected},
                           {"padic_dim", dims[i].padic},
                           {"naive_dim", dims[i].naive},
                           {"within_tolerance", dims[i].within_tolerance},
                           {"base_orbit_size", dims[i].size_1}});
      doc["classes"] = classes;
    } else {
      doc["frame"] = nullptr;
      doc["classes"] = ordered_json::array();
    }
    doc["checks"] = {{"oracle", pass ? "PASS" : "FAIL"}};
    result.document = finish_json(doc);
  } else if (job.format == "text") {
    std::ostringstream out;
    out << "instance: n=" << job.n << " d=" << job.d << " p=" << job.p << " m_max=" << job.m_max
        << "\n";
    out << "|G| = " << inst.g_order << "  |P| = " << inst.p_order << "  |E| = " << inst.e_order
        << "\n";
    out << "orbit counts by level:";
    for (long long c : tower.counts) out << " " << c;
    out << "\nstabilized: " << (tower.stabilized ? "yes" : "no") << "\n";
    if (tower.geometric_count == coset_count)
      out << "geometric orbits: " << tower.geometric_count << " (matches |^J W| = " << coset_count
          << ")\n";
    else
      out << "geometric orbits: " << tower.geometric_count << " (|^J W| = " << coset_count
          << ", MISMATCH)\n";
    if (match_ok) {
      out << "frame: [";
      for (int i = 0; i < inst.n; ++i) {
        out << (i ? ",[" : "[");
        for (int j = 0; j < inst.n; ++j) out << (j ? "," : "") << match.frame.at(i, j);
        out << "]";
      }
      out << "]\nclasses:\n";
      for (int i = 0; i < coset_count; ++i)
        out << "  " << render_word(jw.reps[i]) << " (len " << length(jw.reps[i])
            << "): expected dim " << dims[i].expected << ", valuation estimate "
            << format_double(dims[i].padic) << ", log-ratio estimate "
            << format_double(dims[i].naive) << ", base orbit size " << dims[i].size_1 << "\n";
    } else if (!match_note.empty()) {
      out << "frame: none (" << match_note << ")\n";
    } else {
      out << "frame: not attempted\n";
    }
    out << "checks: oracle " << (pass ? "PASS" : "FAIL") << "\n";
    result.document = out.str();
  } else {
    throw Error("format '" + job.format + "' is not supported for oracle");
  }
  return result;
}

}  // namespace cli_detail

inline RunResult run(const JobSpec& job) {
  if (job.command == "roots") return cli_detail::run_roots(job);
  if (job.command == "cosets") return cli_detail::run_cosets(job);
  if (job.command == "zip-poset") return cli_detail::run_zip_poset(job);
  if (job.command == "bruhat-strata") return cli_detail::run_bruhat_strata(job);
  if (job.command == "purity-report") return cli_detail::run_purity_report(job);
  if (job.command == "oracle") return cli_detail::run_oracle(job);
  throw Error("unknown command: " + job.command);
}

}  // namespace zipstrata
