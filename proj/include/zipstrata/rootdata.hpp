#pragma once

// Root systems and Weyl groups built from Cartan matrices.
//
// Composition convention, fixed once for the whole library:
//   compose(u, v) is "u acts first, then v".
// Concatenating reduced words in that order spells the composite, and every
// higher layer (coset tables, the zip order, the finite-group oracle) is
// phrased against this single convention.
//
// Elements are enumerated breadth-first by their action on the full root
// list; ids are then sorted by (length, lexicographic canonical word), so
// id 0 is the identity and the last id is the longest element.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace zipstrata {

// a[i][j] is the pairing of simple root j against simple coroot i, so row i
// describes how reflection i moves the other simple roots.
struct CartanSpec {
  std::vector<std::vector<int>> entries;
  std::vector<int> automorphism;  // one-line node permutation; empty means identity
  std::string label;
};

inline void validate_cartan(const CartanSpec& spec) {
  const std::size_t n = spec.entries.size();
  for (const auto& row : spec.entries)
    if (row.size() != n) throw MalformedCartan("Cartan matrix is not square");
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.entries[i][i] != 2) throw MalformedCartan("Cartan diagonal entry is not 2");
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (spec.entries[i][j] > 0) throw MalformedCartan("positive off-diagonal Cartan entry");
      if ((spec.entries[i][j] == 0) != (spec.entries[j][i] == 0))
        throw MalformedCartan("Cartan zero pattern is not symmetric");
    }
  }
  if (!spec.automorphism.empty()) {
    if (spec.automorphism.size() != n)
      throw MalformedCartan("automorphism length differs from rank");
    std::vector<char> seen(n, 0);
    for (int v : spec.automorphism) {
      if (v < 0 || v >= static_cast<int>(n) || seen[v])
        throw MalformedCartan("automorphism is not a permutation of the nodes");
      seen[v] = 1;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (spec.entries[spec.automorphism[i]][spec.automorphism[j]] != spec.entries[i][j])
          throw MalformedCartan("automorphism does not preserve the Cartan matrix");
  }
}

// Series tag ("A3", "G2", ...) to Cartan matrix.  Node numbering follows the
// usual chain order; for B/C the short/long root sits at the end of the
// chain, for D the fork is at the tail, for E the branch node hangs off
// node 2 of the chain.
inline CartanSpec cartan_series(const std::string& tag) {
  if (tag.size() < 2 || !std::isalpha(static_cast<unsigned char>(tag[0])))
    throw MalformedCartan("unrecognized series tag: " + tag);
  const char series = static_cast<char>(std::toupper(static_cast<unsigned char>(tag[0])));
  int n = 0;
  for (std::size_t i = 1; i < tag.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(tag[i])))
      throw MalformedCartan("unrecognized series tag: " + tag);
    n = n * 10 + (tag[i] - '0');
  }
  if (n < 1 || n > 64) throw MalformedCartan("series rank out of range: " + tag);

  auto chain = [n]() {
    std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i) a[i][i] = 2;
    for (int i = 0; i + 1 < n; ++i) a[i][i + 1] = a[i + 1][i] = -1;
    return a;
  };

  CartanSpec spec;
  spec.label = tag;
  spec.label[0] = series;
  switch (series) {
    case 'A':
      spec.entries = chain();
      break;
    case 'B':  // last simple root short
      if (n < 2) throw MalformedCartan("B-series needs rank >= 2");
      spec.entries = chain();
      spec.entries[n - 1][n - 2] = -2;
      break;
    case 'C':  // last simple root long
      if (n < 2) throw MalformedCartan("C-series needs rank >= 2");
      spec.entries = chain();
      spec.entries[n - 2][n - 1] = -2;
      break;
    case 'D':
      if (n < 3) throw MalformedCartan("D-series needs rank >= 3");
      spec.entries = chain();
      spec.entries[n - 2][n - 1] = spec.entries[n - 1][n - 2] = 0;
      spec.entries[n - 3][n - 1] = spec.entries[n - 1][n - 3] = -1;
      break;
    case 'E':
      if (n < 6 || n > 8) throw MalformedCartan("E-series needs rank 6..8");
      spec.entries = chain();
      spec.entries[n - 2][n - 1] = spec.entries[n - 1][n - 2] = 0;
      spec.entries[2][n - 1] = spec.entries[n - 1][2] = -1;
      break;
    case 'F':
      if (n != 4) throw MalformedCartan("F-series needs rank 4");
      spec.entries = {{2, -1, 0, 0}, {-1, 2, -1, 0}, {0, -2, 2, -1}, {0, 0, -1, 2}};
      break;
    case 'G':
      if (n != 2) throw MalformedCartan("G-series needs rank 2");
      spec.entries = {{2, -1}, {-3, 2}};
      break;
    default:
      throw MalformedCartan("unrecognized series tag: " + tag);
  }
  validate_cartan(spec);
  return spec;
}

// Roots are stored as coefficient vectors over the simple roots.  The list
// holds all positive roots first (sorted by height, then lexicographically),
// followed by their negatives in the same order.
struct RootSystem {
  int rank = 0;
  int n_pos = 0;
  std::vector<std::vector<int>> roots;
  // reflection[i][r]: index of the image of root r under simple reflection i
  std::vector<std::vector<std::uint16_t>> reflection;
};

namespace detail {

struct IntVecHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (int x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

struct U16VecHash {
  std::size_t operator()(const std::vector<std::uint16_t>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (std::uint16_t x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace detail

inline RootSystem build_root_system(const CartanSpec& spec, std::size_t root_cap = 4096) {
  const int rank = static_cast<int>(spec.entries.size());
  RootSystem rs;
  rs.rank = rank;
  if (rank == 0) return rs;

  auto reflect = [&](int i, const std::vector<int>& c) {
    // s_i subtracts <c, alpha_i^vee> from the i-th coefficient.
    int pairing = 0;
    for (int j = 0; j < rank; ++j) pairing += spec.entries[i][j] * c[j];
    std::vector<int> out = c;
    out[i] -= pairing;
    return out;
  };

  std::vector<std::vector<int>> pos;
  std::unordered_map<std::vector<int>, int, detail::IntVecHash> seen;
  for (int i = 0; i < rank; ++i) {
    std::vector<int> simple(rank, 0);
    simple[i] = 1;
    seen.emplace(simple, static_cast<int>(pos.size()));
    pos.push_back(std::move(simple));
  }
  for (std::size_t head = 0; head < pos.size(); ++head) {
    for (int i = 0; i < rank; ++i) {
      std::vector<int> img = reflect(i, pos[head]);
      bool negative = std::all_of(img.begin(), img.end(), [](int c) { return c <= 0; });
      if (negative) continue;  // only happens when the root is alpha_i itself
      if (seen.emplace(img, static_cast<int>(pos.size())).second) {
        pos.push_back(img);
        if (pos.size() > root_cap)
          throw NotFiniteType("root enumeration exceeded the cap; Cartan matrix is not of finite type");
      }
    }
  }

  auto height = [](const std::vector<int>& c) {
    return std::accumulate(c.begin(), c.end(), 0);
  };
  std::sort(pos.begin(), pos.end(), [&](const auto& a, const auto& b) {
    int ha = height(a), hb = height(b);
    if (ha != hb) return ha < hb;
    return a < b;
  });

  rs.n_pos = static_cast<int>(pos.size());
  rs.roots = pos;
  for (const auto& c : pos) {
    std::vector<int> neg(c.size());
    std::transform(c.begin(), c.end(), neg.begin(), [](int x) { return -x; });
    rs.roots.push_back(std::move(neg));
  }

  std::unordered_map<std::vector<int>, int, detail::IntVecHash> index;
  for (int r = 0; r < static_cast<int>(rs.roots.size()); ++r) index.emplace(rs.roots[r], r);

  rs.reflection.assign(rank, std::vector<std::uint16_t>(rs.roots.size()));
  for (int i = 0; i < rank; ++i) {
    for (int r = 0; r < static_cast<int>(rs.roots.size()); ++r) {
      auto it = index.find(reflect(i, rs.roots[r]));
      if (it == index.end()) throw InternalInconsistency("reflection left the root list");
      rs.reflection[i][r] = static_cast<std::uint16_t>(it->second);
    }
    // A simple reflection negates its own simple root and permutes the rest
    // of the positive roots among themselves.
    int flipped = 0;
    for (int r = 0; r < rs.n_pos; ++r)
      if (rs.reflection[i][r] >= rs.n_pos) ++flipped;
    if (flipped != 1) throw InternalInconsistency("simple reflection must flip exactly one positive root");
  }
  return rs;
}

class WeylGroup;
using WeylGroupHandle = std::shared_ptr<const WeylGroup>;

struct WeylElt {
  const WeylGroup* group = nullptr;
  int id = -1;

  friend bool operator==(const WeylElt& a, const WeylElt& b) {
    return a.group == b.group && a.id == b.id;
  }
  friend bool operator!=(const WeylElt& a, const WeylElt& b) { return !(a == b); }
  friend bool operator<(const WeylElt& a, const WeylElt& b) { return a.id < b.id; }
};

enum class Side { left, right };

class WeylGroup {
 public:
  CartanSpec spec;
  RootSystem rs;
  int rank = 0;
  std::size_t order = 0;

  // All tables are indexed by element id; ids are sorted by
  // (length, lexicographic canonical word).
  std::vector<std::vector<std::uint8_t>> words;   // canonical reduced words
  std::vector<int> lengths;
  std::vector<std::vector<std::uint16_t>> actions;  // permutation of the root list
  std::vector<std::vector<int>> lmul;  // lmul[s][w] = id of (s acts first, then w)
  std::vector<std::vector<int>> rmul;  // rmul[s][w] = id of (w acts first, then s)
  std::vector<int> inv_table;
  std::vector<int> sigma_table;  // image under spec.automorphism

  static WeylGroupHandle build(const CartanSpec& spec, std::size_t cap = 10'000'000);

  WeylElt identity() const { return {this, 0}; }
  WeylElt element(int id) const {
    if (id < 0 || id >= static_cast<int>(order)) throw InternalInconsistency("element id out of range");
    return {this, id};
  }
  WeylElt simple(int i) const {
    if (i < 0 || i >= rank) throw InternalInconsistency("generator index out of range");
    return {this, rmul[i][0]};
  }
  WeylElt longest() const { return {this, static_cast<int>(order) - 1}; }

 private:
  WeylGroup() = default;
};

inline WeylGroupHandle WeylGroup::build(const CartanSpec& spec_in, std::size_t cap) {
  validate_cartan(spec_in);
  auto W = std::shared_ptr<WeylGroup>(new WeylGroup());
  W->spec = spec_in;
  W->rank = static_cast<int>(spec_in.entries.size());
  W->rs = build_root_system(spec_in);
  const int n_roots = static_cast<int>(W->rs.roots.size());
  const int n_pos = W->rs.n_pos;
  const int rank = W->rank;

  // Breadth-first enumeration by the action on roots.  Discovery order is by
  // length, since each right multiplication changes length by exactly one.
  std::vector<std::vector<std::uint16_t>> acts;
  std::unordered_map<std::vector<std::uint16_t>, int, detail::U16VecHash> id_of;
  {
    std::vector<std::uint16_t> e(n_roots);
    std::iota(e.begin(), e.end(), 0);
    id_of.emplace(e, 0);
    acts.push_back(std::move(e));
  }
  for (std::size_t head = 0; head < acts.size(); ++head) {
    for (int i = 0; i < rank; ++i) {
      std::vector<std::uint16_t> img(n_roots);
      for (int r = 0; r < n_roots; ++r) img[r] = W->rs.reflection[i][acts[head][r]];
      if (id_of.emplace(img, static_cast<int>(acts.size())).second) {
        acts.push_back(std::move(img));
        if (acts.size() > cap) throw NotFiniteType("Weyl group enumeration exceeded the cap");
      }
    }
  }
  const int N = static_cast<int>(acts.size());

  // Length = number of positive roots sent to negative ones.
  std::vector<int> raw_len(N);
  for (int w = 0; w < N; ++w) {
    int inv = 0;
    for (int r = 0; r < n_pos; ++r)
      if (acts[w][r] >= n_pos) ++inv;
    raw_len[w] = inv;
  }

  // Multiplication tables in raw ids.
  std::vector<std::vector<int>> raw_lmul(rank, std::vector<int>(N));
  std::vector<std::vector<int>> raw_rmul(rank, std::vector<int>(N));
  {
    std::vector<std::uint16_t> img(n_roots);
    for (int w = 0; w < N; ++w) {
      for (int i = 0; i < rank; ++i) {
        // s_i first, then w: roots travel through the reflection first.
        for (int r = 0; r < n_roots; ++r) img[r] = acts[w][W->rs.reflection[i][r]];
        raw_lmul[i][w] = id_of.at(img);
        // w first, then s_i.
        for (int r = 0; r < n_roots; ++r) img[r] = W->rs.reflection[i][acts[w][r]];
        raw_rmul[i][w] = id_of.at(img);
      }
    }
  }

  // Canonical words: repeatedly strip the smallest generator that shortens
  // the element from the left.  Processing by increasing length lets each
  // word be built from an already-finished shorter one.
  std::vector<int> by_len(N);
  std::iota(by_len.begin(), by_len.end(), 0);
  std::sort(by_len.begin(), by_len.end(), [&](int a, int b) { return raw_len[a] < raw_len[b]; });
  std::vector<std::vector<std::uint8_t>> raw_word(N);
  for (int w : by_len) {
    if (raw_len[w] == 0) continue;
    int first = -1;
    for (int i = 0; i < rank; ++i)
      if (raw_len[raw_lmul[i][w]] < raw_len[w]) {
        first = i;
        break;
      }
    if (first < 0) throw InternalInconsistency("non-identity element with no left descent");
    const std::vector<std::uint8_t>& rest = raw_word[raw_lmul[first][w]];
    raw_word[w].reserve(rest.size() + 1);
    raw_word[w].push_back(static_cast<std::uint8_t>(first));
    raw_word[w].insert(raw_word[w].end(), rest.begin(), rest.end());
    if (static_cast<int>(raw_word[w].size()) != raw_len[w])
      throw InternalInconsistency("canonical word length disagrees with inversion count");
  }

  // Sort ids by (length, word) and remap every table.
  std::vector<int> order_ids(N);
  std::iota(order_ids.begin(), order_ids.end(), 0);
  std::sort(order_ids.begin(), order_ids.end(), [&](int a, int b) {
    if (raw_len[a] != raw_len[b]) return raw_len[a] < raw_len[b];
    return raw_word[a] < raw_word[b];
  });
  std::vector<int> new_id(N);
  for (int i = 0; i < N; ++i) new_id[order_ids[i]] = i;

  W->order = static_cast<std::size_t>(N);
  W->words.resize(N);
  W->lengths.resize(N);
  W->actions.resize(N);
  W->lmul.assign(rank, std::vector<int>(N));
  W->rmul.assign(rank, std::vector<int>(N));
  W->inv_table.resize(N);
  for (int i = 0; i < N; ++i) {
    const int raw = order_ids[i];
    W->words[i] = raw_word[raw];
    W->lengths[i] = raw_len[raw];
    W->actions[i] = acts[raw];
    for (int s = 0; s < rank; ++s) {
      W->lmul[s][i] = new_id[raw_lmul[s][raw]];
      W->rmul[s][i] = new_id[raw_rmul[s][raw]];
    }
    std::vector<std::uint16_t> inv_act(n_roots);
    for (int r = 0; r < n_roots; ++r) inv_act[acts[raw][r]] = static_cast<std::uint16_t>(r);
    W->inv_table[i] = new_id[id_of.at(inv_act)];
  }

  // Image of each element under the diagram automorphism: push the canonical
  // word through the node permutation.
  W->sigma_table.resize(N);
  const std::vector<int>& sig = W->spec.automorphism;
  for (int i = 0; i < N; ++i) {
    if (sig.empty()) {
      W->sigma_table[i] = i;
      continue;
    }
    int cur = 0;
    for (std::uint8_t c : W->words[i]) cur = W->rmul[sig[c]][cur];
    W->sigma_table[i] = cur;
    if (W->lengths[cur] != W->lengths[i])
      throw InternalInconsistency("diagram automorphism failed to preserve length");
  }

  return W;
}

// --- element operations ------------------------------------------------------

inline const WeylGroup& group_of(const WeylElt& w) {
  if (!w.group) throw InternalInconsistency("uninitialized group element");
  return *w.group;
}

inline void require_same_group(const WeylElt& a, const WeylElt& b) {
  if (a.group != b.group) throw MixedRootSystems("elements belong to different root systems");
}

inline int length(const WeylElt& w) { return group_of(w).lengths[w.id]; }

inline const std::vector<std::uint8_t>& word(const WeylElt& w) { return group_of(w).words[w.id]; }

// u acts first, then v.
inline WeylElt compose(const WeylElt& u, const WeylElt& v) {
  require_same_group(u, v);
  const WeylGroup& W = group_of(u);
  int cur = u.id;
  for (std::uint8_t c : W.words[v.id]) cur = W.rmul[c][cur];
  return {&W, cur};
}

inline WeylElt inverse(const WeylElt& w) { return {w.group, group_of(w).inv_table[w.id]}; }

inline std::vector<int> descents(const WeylElt& w, Side side) {
  const WeylGroup& W = group_of(w);
  std::vector<int> out;
  for (int i = 0; i < W.rank; ++i) {
    const int neighbor = side == Side::left ? W.lmul[i][w.id] : W.rmul[i][w.id];
    if (W.lengths[neighbor] < W.lengths[w.id]) out.push_back(i);
  }
  return out;
}

inline void require_subset_of_nodes(const WeylGroup& W, const std::vector<int>& J) {
  for (int j : J)
    if (j < 0 || j >= W.rank) throw NotARepresentative("node index out of range");
}

// Longest element of the standard parabolic subgroup generated by J.
inline WeylElt longest_element(const WeylGroup& W, const std::vector<int>& J) {
  require_subset_of_nodes(W, J);
  int cur = 0;
  for (;;) {
    int step = -1;
    for (int j : J)
      if (W.lengths[W.rmul[j][cur]] > W.lengths[cur]) {
        step = j;
        break;
      }
    if (step < 0) break;
    cur = W.rmul[step][cur];
  }
  return {&W, cur};
}

// Apply an arbitrary diagram automorphism given as a node permutation.
inline WeylElt apply_diagram(const WeylElt& w, const std::vector<int>& perm) {
  const WeylGroup& W = group_of(w);
  CartanSpec check = W.spec;
  check.automorphism = perm;
  validate_cartan(check);  // rejects node maps that do not preserve the Cartan matrix
  if (perm.empty()) return w;
  int cur = 0;
  for (std::uint8_t c : W.words[w.id]) cur = W.rmul[perm[c]][cur];
  return {&W, cur};
}

// Apply the automorphism carried by the group's own CartanSpec.
inline WeylElt apply_sigma(const WeylElt& w) {
  return {w.group, group_of(w).sigma_table[w.id]};
}

// Conjugation of node s by the longest element: the opposition involution.
inline int opposition(const WeylGroup& W, int s) {
  if (s < 0 || s >= W.rank) throw NotARepresentative("node index out of range");
  const WeylElt w0 = W.longest();
  const WeylElt image = compose(compose(w0, W.simple(s)), w0);
  if (length(image) != 1) throw InternalInconsistency("opposition image is not a generator");
  return word(image)[0];
}

inline std::string render_word(const WeylElt& w) {
  const auto& letters = word(w);
  if (letters.empty()) return "e";
  std::string out;
  for (std::uint8_t c : letters) {
    out += 's';
    out += std::to_string(static_cast<int>(c) + 1);
  }
  return out;
}

}  // namespace zipstrata
