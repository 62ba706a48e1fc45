#pragma once

// Combinatorial shadow of a zip datum and the closure order on its strata.
//
// A datum consists of a Weyl group, node sets J and K, a diagram isomorphism
// psi from J onto K, an ambient diagram automorphism sigma, and a size
// parameter q kept as metadata.  Strata are indexed by the left-J minima
// ^J W; the closure order is
//
//   w' <= w   iff   some y in W_J has  y * w' * psi(y)^{-1}  Bruhat-below w,
//
// with * the library composition (left factor acts first).

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "common.hpp"
#include "parabolic.hpp"
#include "rootdata.hpp"

namespace zipstrata {

struct CombZipDatum {
  WeylGroupHandle group;
  std::vector<int> J, K;
  std::map<int, int> psi;    // node map J -> K
  std::vector<int> sigma;    // ambient diagram automorphism; empty = identity
  long long q = 0;           // metadata only
};

namespace detail {

// psi must be a bijection J -> K preserving the Cartan matrix; on small
// groups, additionally confirm that pushing words through psi maps the
// parabolic W_J onto W_K preserving lengths.
inline void validate_datum(const CombZipDatum& datum) {
  const WeylGroup& W = *datum.group;
  if (datum.J.size() != datum.K.size() || datum.psi.size() != datum.J.size())
    throw InternalInconsistency("psi is not a bijection between J and K");
  std::set<int> jset(datum.J.begin(), datum.J.end());
  std::set<int> kset(datum.K.begin(), datum.K.end());
  std::set<int> image;
  for (const auto& [j, k] : datum.psi) {
    if (!jset.count(j) || !kset.count(k))
      throw InternalInconsistency("psi maps outside J -> K");
    image.insert(k);
  }
  if (image != kset) throw InternalInconsistency("psi is not onto K");
  for (int a : datum.J)
    for (int b : datum.J)
      if (W.spec.entries[datum.psi.at(a)][datum.psi.at(b)] != W.spec.entries[a][b])
        throw InternalInconsistency("psi does not preserve the Cartan matrix on J");
  if (W.rank <= 4) {
    std::set<int> jsub, ksub;
    for (const WeylElt& y : subgroup_elements(W, datum.J)) {
      int cur = 0;
      for (std::uint8_t c : word(y)) cur = W.rmul[datum.psi.at(c)][cur];
      if (W.lengths[cur] != length(y))
        throw InternalInconsistency("psi fails to preserve length on W_J");
      jsub.insert(cur);
    }
    for (const WeylElt& z : subgroup_elements(W, datum.K)) ksub.insert(z.id);
    if (jsub != ksub) throw InternalInconsistency("psi does not carry W_J onto W_K");
  }
}

inline WeylElt psi_image(const CombZipDatum& datum, const WeylElt& y) {
  const WeylGroup& W = *datum.group;
  int cur = 0;
  for (std::uint8_t c : word(y)) cur = W.rmul[datum.psi.at(c)][cur];
  return {&W, cur};
}

}  // namespace detail

// Build the datum attached to a cocharacter datum: J is given, K and psi are
// produced by opposition followed by sigma.
inline CombZipDatum zip_datum_from_cocharacter(WeylGroupHandle group, std::vector<int> J,
                                               std::vector<int> sigma = {}, long long q = 0) {
  const WeylGroup& W = *group;
  if (!sigma.empty()) {
    CartanSpec check = W.spec;
    check.automorphism = sigma;
    validate_cartan(check);
  }
  CombZipDatum datum;
  datum.group = std::move(group);
  datum.J = normalize_nodes(W, std::move(J));
  datum.sigma = sigma;
  datum.q = q;
  for (int j : datum.J) {
    int k = opposition(W, j);
    if (!sigma.empty()) k = sigma[k];
    datum.psi[j] = k;
    datum.K.push_back(k);
  }
  std::sort(datum.K.begin(), datum.K.end());
  detail::validate_datum(datum);
  return datum;
}

inline void require_min_rep(const CombZipDatum& datum, const WeylElt& w) {
  const WeylGroup& W = *datum.group;
  if (w.group != &W) throw MixedRootSystems("element from a different group");
  for (int j : datum.J)
    if (W.lengths[W.lmul[j][w.id]] < W.lengths[w.id])
      throw NotAMinimalRep("element has a left descent inside J");
}

// The closure order on strata.  Both arguments must be left-J minima.
inline bool zip_leq(const CombZipDatum& datum, const WeylElt& wp, const WeylElt& w) {
  require_min_rep(datum, wp);
  require_min_rep(datum, w);
  for (const WeylElt& y : subgroup_elements(*datum.group, datum.J)) {
    const WeylElt twisted = compose(compose(y, wp), inverse(detail::psi_image(datum, y)));
    if (bruhat_leq(twisted, w)) return true;
  }
  return false;
}

struct StratNode {
  WeylElt w;
  int len = 0;
  int dim = 0;  // stratum dimension = length
};

struct StratPoset {
  CombZipDatum datum;
  std::vector<StratNode> nodes;             // ascending by (length, word)
  std::vector<std::vector<char>> leq;       // full order relation
  std::vector<std::pair<int, int>> covers;  // (lower index, upper index)
  std::vector<std::vector<int>> galois_classes;  // sigma-orbits of nodes; empty when sigma moves J
};

inline int stratum_dimension(const WeylElt& w) { return length(w); }

inline std::vector<std::vector<WeylElt>> galois_orbits(const CombZipDatum& datum, int degree);

inline StratPoset closure_poset(const CombZipDatum& datum) {
  const WeylGroup& W = *datum.group;
  StratPoset poset;
  poset.datum = datum;

  const CosetTable table = min_coset_reps(W, datum.J);
  for (const WeylElt& w : table.reps)
    poset.nodes.push_back({w, length(w), stratum_dimension(w)});

  const int N = static_cast<int>(poset.nodes.size());
  const std::vector<WeylElt> wj = subgroup_elements(W, datum.J);
  std::vector<WeylElt> psi_of;
  psi_of.reserve(wj.size());
  for (const WeylElt& y : wj) psi_of.push_back(inverse(detail::psi_image(datum, y)));

  poset.leq.assign(N, std::vector<char>(N, 0));
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      if (poset.nodes[a].len > poset.nodes[b].len) continue;
      bool le = false;
      for (std::size_t yi = 0; yi < wj.size() && !le; ++yi) {
        const WeylElt twisted = compose(compose(wj[yi], poset.nodes[a].w), psi_of[yi]);
        le = bruhat_leq(twisted, poset.nodes[b].w);
      }
      poset.leq[a][b] = le;
    }

  // Partial-order axioms.  Reflexivity and antisymmetry are cheap; check
  // transitivity outright since N stays small at the ranks this library
  // targets.
  for (int a = 0; a < N; ++a) {
    if (!poset.leq[a][a]) throw InternalInconsistency("closure order is not reflexive");
    for (int b = 0; b < N; ++b) {
      if (a != b && poset.leq[a][b] && poset.leq[b][a])
        throw InternalInconsistency("closure order is not antisymmetric");
      if (!poset.leq[a][b]) continue;
      for (int c = 0; c < N; ++c)
        if (poset.leq[b][c] && !poset.leq[a][c])
          throw InternalInconsistency("closure order is not transitive");
    }
  }

  // Unique bottom (the identity stratum) and unique top (the open stratum).
  int bottoms = 0, tops = 0;
  for (int a = 0; a < N; ++a) {
    bool is_bottom = true, is_top = true;
    for (int b = 0; b < N; ++b) {
      if (!poset.leq[a][b]) is_bottom = false;
      if (!poset.leq[b][a]) is_top = false;
    }
    bottoms += is_bottom;
    tops += is_top;
  }
  if (bottoms != 1 || tops != 1)
    throw InternalInconsistency("closure order must have a unique bottom and a unique top");

  // Cover relations: a < b with nothing strictly between.
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      if (a == b || !poset.leq[a][b]) continue;
      bool cover = true;
      for (int c = 0; c < N && cover; ++c)
        if (c != a && c != b && poset.leq[a][c] && poset.leq[c][b]) cover = false;
      if (cover) poset.covers.emplace_back(a, b);
    }
  std::sort(poset.covers.begin(), poset.covers.end());

  // Sigma-orbits of the strata, when sigma keeps J in place.
  try {
    const auto orbits = galois_orbits(datum, 1);
    std::map<int, int> node_pos;
    for (int i = 0; i < N; ++i) node_pos[poset.nodes[i].w.id] = i;
    for (const auto& orbit : orbits) {
      std::vector<int> cls;
      for (const WeylElt& w : orbit) cls.push_back(node_pos.at(w.id));
      poset.galois_classes.push_back(std::move(cls));
    }
  } catch (const SigmaDoesNotPreserveJ&) {
    poset.galois_classes.clear();
  }

  return poset;
}

inline const std::vector<std::pair<int, int>>& cover_relations(const StratPoset& poset) {
  return poset.covers;
}

struct PurityCover {
  int lower = 0, upper = 0;  // node indices
  int drop = 0;              // dimension difference along the cover
};

struct PurityReport {
  bool pass = true;
  std::vector<PurityCover> covers;
};

// Purity: every cover of the closure order drops dimension by exactly one.
inline PurityReport purity_check(const StratPoset& poset) {
  PurityReport report;
  for (const auto& [lo, hi] : poset.covers) {
    PurityCover c;
    c.lower = lo;
    c.upper = hi;
    c.drop = poset.nodes[hi].dim - poset.nodes[lo].dim;
    if (c.drop != 1) report.pass = false;
    report.covers.push_back(c);
  }
  return report;
}

// Projection of a stratum index to its (J, K) double coset representative.
inline WeylElt bruhat_projection(const CombZipDatum& datum, const WeylElt& w) {
  require_min_rep(datum, w);
  return project_double(w, datum.J, datum.K);
}

struct BruhatStratum {
  WeylElt x;
  int len = 0;
  int dim = 0;  // dimension of the coarse stratum = length of the longest fiber element
};

inline std::vector<BruhatStratum> bruhat_strata(const CombZipDatum& datum) {
  const DoubleCosetTable table = min_double_coset_reps(*datum.group, datum.J, datum.K);
  std::vector<BruhatStratum> out;
  for (const WeylElt& x : table.reps)
    out.push_back({x, length(x), length(max_length_in_fiber(table, x))});
  return out;
}

// Induced sigma-action on double coset minima: apply, then re-project.
inline WeylElt sigma_translate_double(const CombZipDatum& datum, const WeylElt& x) {
  WeylElt image = datum.sigma.empty() ? x : apply_diagram(x, datum.sigma);
  return project_double(image, datum.J, datum.K);
}

// Coarse closure order on double coset strata: x' below x when some
// sigma-translate of x' is Bruhat-below x.
inline bool bruhat_order_leq(const CombZipDatum& datum, const WeylElt& xp, const WeylElt& x) {
  if (project_double(xp, datum.J, datum.K) != xp || project_double(x, datum.J, datum.K) != x)
    throw NotARepresentative("arguments must be minimal double coset representatives");
  std::set<int> seen;
  WeylElt cur = xp;
  while (seen.insert(cur.id).second) {
    if (bruhat_leq(cur, x)) return true;
    cur = sigma_translate_double(datum, cur);
  }
  return false;
}

struct MonotonicityReport {
  bool pass = true;
  std::vector<std::pair<WeylElt, WeylElt>> violations;  // (w', w) with order broken downstairs
};

// The double coset projection must be order-preserving from the closure
// order to the coarse order.
inline MonotonicityReport monotonicity_check(const CombZipDatum& datum) {
  MonotonicityReport report;
  const CosetTable table = min_coset_reps(*datum.group, datum.J);
  for (const WeylElt& wp : table.reps)
    for (const WeylElt& w : table.reps) {
      if (!zip_leq(datum, wp, w)) continue;
      const WeylElt xp = bruhat_projection(datum, wp);
      const WeylElt x = bruhat_projection(datum, w);
      if (!bruhat_order_leq(datum, xp, x)) {
        report.pass = false;
        report.violations.emplace_back(wp, w);
      }
    }
  return report;
}

// Orbits of the strata under the induced action of sigma^degree.  The power
// must fix J as a set; otherwise the action does not descend to ^J W.
inline std::vector<std::vector<WeylElt>> galois_orbits(const CombZipDatum& datum, int degree) {
  if (degree < 1) throw Error("galois degree must be a positive integer");
  const WeylGroup& W = *datum.group;
  std::vector<int> tau(W.rank);
  std::iota(tau.begin(), tau.end(), 0);
  if (!datum.sigma.empty())
    for (int step = 0; step < degree; ++step) {
      std::vector<int> next(W.rank);
      for (int i = 0; i < W.rank; ++i) next[i] = datum.sigma[tau[i]];
      tau = next;
    }
  std::set<int> jset(datum.J.begin(), datum.J.end());
  for (int j : datum.J)
    if (!jset.count(tau[j]))
      throw SigmaDoesNotPreserveJ("sigma power does not fix J as a set");

  const CosetTable table = min_coset_reps(W, datum.J);
  auto act = [&](const WeylElt& w) { return coset_rep(table, apply_diagram(w, tau)); };

  std::vector<std::vector<WeylElt>> orbits;
  std::set<int> visited;
  for (const WeylElt& w : table.reps) {
    if (visited.count(w.id)) continue;
    std::vector<WeylElt> orbit;
    WeylElt cur = w;
    while (visited.insert(cur.id).second) {
      orbit.push_back(cur);
      cur = act(cur);
    }
    std::sort(orbit.begin(), orbit.end());
    orbits.push_back(std::move(orbit));
  }
  return orbits;
}

// Restriction of the datum to the double coset rep x.  The restricted group
// lives on the nodes K; the new J collects the K-nodes reached by conjugating
// J-generators through x, and psi follows along.
inline CombZipDatum restrict_zip_datum(const CombZipDatum& datum, const WeylElt& x) {
  const WeylGroup& W = *datum.group;
  if (project_double(x, datum.J, datum.K) != x)
    throw NotARepresentative("restriction point must be a minimal double coset representative");

  // Ambient-node pairs (j, psi(j)) surviving conjugation by x.
  std::vector<std::pair<int, int>> carried;
  std::set<int> kset(datum.K.begin(), datum.K.end());
  for (int j : datum.J) {
    const WeylElt conj = compose(compose(inverse(x), W.simple(j)), x);
    if (length(conj) != 1) continue;
    const int k = word(conj)[0];
    if (kset.count(k)) carried.emplace_back(k, datum.psi.at(j));
  }

  // Build the group on the nodes K.
  CartanSpec sub;
  sub.label = "";
  const int sub_rank = static_cast<int>(datum.K.size());
  sub.entries.assign(sub_rank, std::vector<int>(sub_rank, 0));
  for (int a = 0; a < sub_rank; ++a)
    for (int b = 0; b < sub_rank; ++b)
      sub.entries[a][b] = W.spec.entries[datum.K[a]][datum.K[b]];
  WeylGroupHandle subgroup = WeylGroup::build(sub);

  std::map<int, int> node_pos;
  for (int a = 0; a < sub_rank; ++a) node_pos[datum.K[a]] = a;

  CombZipDatum out;
  out.group = std::move(subgroup);
  out.q = datum.q;
  // The restricted datum carries psi explicitly and no ambient automorphism.
  for (const auto& [k_from, k_to] : carried) {
    out.J.push_back(node_pos.at(k_from));
    out.K.push_back(node_pos.at(k_to));
    out.psi[node_pos.at(k_from)] = node_pos.at(k_to);
  }
  std::sort(out.J.begin(), out.J.end());
  std::sort(out.K.begin(), out.K.end());
  detail::validate_datum(out);
  return out;
}

}  // namespace zipstrata
