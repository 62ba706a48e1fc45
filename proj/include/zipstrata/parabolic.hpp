#pragma once

// Minimal coset and double-coset combinatorics for standard parabolic
// subgroups, plus the Bruhat order.
//
// A left-J coset W_J * w has a unique shortest element, recognized by having
// no left descent inside J; likewise a (J, K) double coset has a unique
// shortest element with no left descent in J and no right descent in K.
// Projections strip descents one at a time, which stays inside the coset and
// strictly drops length, so they terminate at those minima.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "common.hpp"
#include "rootdata.hpp"

namespace zipstrata {

inline std::vector<int> normalize_nodes(const WeylGroup& W, std::vector<int> J) {
  require_subset_of_nodes(W, J);
  std::sort(J.begin(), J.end());
  J.erase(std::unique(J.begin(), J.end()), J.end());
  return J;
}

// All elements of the standard parabolic subgroup generated by J, sorted by id.
inline std::vector<WeylElt> subgroup_elements(const WeylGroup& W, const std::vector<int>& J) {
  const std::vector<int> nodes = normalize_nodes(W, J);
  std::vector<char> seen(W.order, 0);
  std::vector<int> ids{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < ids.size(); ++head)
    for (int j : nodes) {
      const int next = W.lmul[j][ids[head]];
      if (!seen[next]) {
        seen[next] = 1;
        ids.push_back(next);
      }
    }
  std::sort(ids.begin(), ids.end());
  std::vector<WeylElt> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back({&W, id});
  return out;
}

struct CosetTable {
  const WeylGroup* group = nullptr;
  std::vector<int> J;
  std::vector<WeylElt> reps;    // minimal representatives, ascending by id
  std::vector<int> rep_index;   // element id -> index of its coset's rep in `reps`
};

inline CosetTable min_coset_reps(const WeylGroup& W, const std::vector<int>& J_in) {
  CosetTable table;
  table.group = &W;
  table.J = normalize_nodes(W, J_in);
  table.rep_index.assign(W.order, -1);
  // Ids ascend with length, so the shorter element a strip lands on is done.
  for (int id = 0; id < static_cast<int>(W.order); ++id) {
    int strip = -1;
    for (int j : table.J)
      if (W.lengths[W.lmul[j][id]] < W.lengths[id]) {
        strip = j;
        break;
      }
    if (strip < 0) {
      table.rep_index[id] = static_cast<int>(table.reps.size());
      table.reps.push_back({&W, id});
    } else {
      table.rep_index[id] = table.rep_index[W.lmul[strip][id]];
    }
  }
  return table;
}

inline WeylElt coset_rep(const CosetTable& table, const WeylElt& w) {
  if (w.group != table.group) throw MixedRootSystems("element from a different group");
  return table.reps[table.rep_index[w.id]];
}

inline bool is_min_coset_rep(const CosetTable& table, const WeylElt& w) {
  return coset_rep(table, w) == w;
}

// Bruhat order via the lifting property: peel the first letter of a reduced
// word for w; u <= w iff the (shortened-if-possible) u is <= the peeled w.
// Consuming the whole word reduces the question to u' <= e.
inline bool bruhat_leq(const WeylElt& u, const WeylElt& w) {
  require_same_group(u, w);
  const WeylGroup& W = group_of(u);
  if (W.lengths[u.id] > W.lengths[w.id]) return false;
  int cur = u.id;
  for (std::uint8_t c : W.words[w.id]) {
    const int shorter = W.lmul[c][cur];
    if (W.lengths[shorter] < W.lengths[cur]) cur = shorter;
  }
  return cur == 0;
}

// Independent model of the Bruhat order: generate covers by multiplying with
// reflections (conjugates of generators) whenever that raises length by
// exactly one, then take the transitive closure.  Quadratic in |W|; meant as
// a cross-check, not a workhorse.
inline std::vector<std::vector<char>> bruhat_closure_by_reflections(const WeylGroup& W) {
  const int N = static_cast<int>(W.order);
  std::vector<char> is_reflection(N, 0);
  for (int v = 0; v < N; ++v)
    for (int s = 0; s < W.rank; ++s) {
      const WeylElt t = compose(compose(inverse(W.element(v)), W.simple(s)), W.element(v));
      is_reflection[t.id] = 1;
    }

  std::vector<std::vector<int>> up(N);
  for (int u = 0; u < N; ++u)
    for (int t = 0; t < N; ++t) {
      if (!is_reflection[t]) continue;
      const WeylElt higher = compose(W.element(t), W.element(u));
      if (W.lengths[higher.id] == W.lengths[u] + 1) up[u].push_back(higher.id);
    }

  std::vector<std::vector<char>> leq(N, std::vector<char>(N, 0));
  for (int u = 0; u < N; ++u) {
    std::vector<int> stack{u};
    leq[u][u] = 1;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      for (int nxt : up[cur])
        if (!leq[u][nxt]) {
          leq[u][nxt] = 1;
          stack.push_back(nxt);
        }
    }
  }
  return leq;
}

struct DoubleCosetTable {
  const WeylGroup* group = nullptr;
  std::vector<int> J, K;
  std::vector<WeylElt> reps;  // minimal (J, K) double coset reps
  // Per rep: the left-J minima lying in its double coset.  Materialized
  // eagerly for groups up to `eager_limit` elements; above that the table
  // keeps only the reps and fibers are walked on demand.
  std::vector<std::vector<WeylElt>> fibers;
  CosetTable left;  // the underlying left-J minima
  bool fibers_materialized = false;

  static constexpr std::size_t eager_limit = 100'000;
};

// Strip left-J and right-K descents alternately until none remain.
inline WeylElt project_double(const WeylElt& w, const std::vector<int>& J_in,
                              const std::vector<int>& K_in) {
  const WeylGroup& W = group_of(w);
  const std::vector<int> J = normalize_nodes(W, J_in);
  const std::vector<int> K = normalize_nodes(W, K_in);
  int cur = w.id;
  for (;;) {
    bool moved = false;
    for (int j : J)
      if (W.lengths[W.lmul[j][cur]] < W.lengths[cur]) {
        cur = W.lmul[j][cur];
        moved = true;
        break;
      }
    if (moved) continue;
    for (int k : K)
      if (W.lengths[W.rmul[k][cur]] < W.lengths[cur]) {
        cur = W.rmul[k][cur];
        moved = true;
        break;
      }
    if (!moved) break;
  }
  return {&W, cur};
}

inline DoubleCosetTable min_double_coset_reps(const WeylGroup& W, const std::vector<int>& J_in,
                                              const std::vector<int>& K_in) {
  DoubleCosetTable table;
  table.group = &W;
  table.J = normalize_nodes(W, J_in);
  table.K = normalize_nodes(W, K_in);

  table.left = min_coset_reps(W, table.J);
  table.fibers_materialized = W.order <= DoubleCosetTable::eager_limit;

  std::vector<int> rep_pos(W.order, -1);
  std::vector<std::vector<WeylElt>> fibers;
  for (const WeylElt& w : table.left.reps) {
    const WeylElt x = project_double(w, table.J, table.K);
    if (rep_pos[x.id] < 0) {
      rep_pos[x.id] = static_cast<int>(table.reps.size());
      table.reps.push_back(x);
      fibers.emplace_back();
    }
    if (table.fibers_materialized) fibers[rep_pos[x.id]].push_back(w);
  }

  // Left-J minima arrive in id order, so reps were discovered in ascending
  // order of their shortest fiber member; re-sort by the reps themselves.
  std::vector<int> order(table.reps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return table.reps[a].id < table.reps[b].id; });
  DoubleCosetTable sorted;
  sorted.group = table.group;
  sorted.J = table.J;
  sorted.K = table.K;
  sorted.left = std::move(table.left);
  sorted.fibers_materialized = table.fibers_materialized;
  for (int idx : order) {
    sorted.reps.push_back(table.reps[idx]);
    if (sorted.fibers_materialized)
      sorted.fibers.push_back(std::move(fibers[idx]));
  }
  return sorted;
}

inline int double_rep_index(const DoubleCosetTable& table, const WeylElt& x) {
  if (x.group != table.group) throw MixedRootSystems("element from a different group");
  for (int i = 0; i < static_cast<int>(table.reps.size()); ++i)
    if (table.reps[i].id == x.id) return i;
  throw NotARepresentative("element is not a minimal double coset representative");
}

// The fiber over rep x: all left-J minima whose double coset projection is x.
inline std::vector<WeylElt> fiber_of(const DoubleCosetTable& table, const WeylElt& x) {
  const int idx = double_rep_index(table, x);
  if (table.fibers_materialized) return table.fibers[idx];
  std::vector<WeylElt> out;
  for (const WeylElt& w : table.left.reps)
    if (project_double(w, table.J, table.K) == table.reps[idx]) out.push_back(w);
  return out;
}

// The unique longest left-J minimum inside the double coset of x.  A tie
// would contradict the structure theory, so it is treated as a bug.
inline WeylElt max_length_in_fiber(const DoubleCosetTable& table, const WeylElt& x) {
  const std::vector<WeylElt> fiber = fiber_of(table, x);
  const WeylGroup& W = *table.group;
  int best = -1;
  int best_len = -1;
  bool tie = false;
  for (const WeylElt& w : fiber) {
    if (W.lengths[w.id] > best_len) {
      best_len = W.lengths[w.id];
      best = w.id;
      tie = false;
    } else if (W.lengths[w.id] == best_len) {
      tie = true;
    }
  }
  if (best < 0 || tie) throw InternalInconsistency("fiber has no unique longest element");
  return {&W, best};
}

}  // namespace zipstrata
