#pragma once

// Brute-force verification model over GL_n(F_{p^m}).
//
// For a block shape (k, d) with k + d = n, the parabolic P is block
// upper-triangular, its opposite Q block lower-triangular, both with Levi
// L = GL_k x GL_d on the diagonal.  The zip action on G = GL_n is generated
// by left multiplication with the unipotent radical of P, right
// multiplication with the (inverse of the) unipotent radical of Q, and the
// twisted Levi moves g -> l * g * phi(l)^{-1}, where phi raises entries to
// the p-th power.  Orbits of this action are computed by plain union-find
// over all group points; extension fields enter through pairwise
// connectivity scans that never enumerate the larger group.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "common.hpp"
#include "finitefield.hpp"
#include "parabolic.hpp"
#include "rootdata.hpp"

namespace zipstrata {

// Square matrix over a FiniteField, entries stored row-major as field codes.
// Capacity covers n <= 5; unused entries stay zero so that comparisons and
// hashing can treat the whole array uniformly.
struct Mat {
  int n = 0;
  std::array<std::uint16_t, 25> e{};

  std::uint16_t at(int i, int j) const { return e[i * n + j]; }
  void set(int i, int j, int v) { e[i * n + j] = static_cast<std::uint16_t>(v); }

  friend bool operator==(const Mat&, const Mat&) = default;
  friend auto operator<=>(const Mat&, const Mat&) = default;
};

inline Mat mat_id(int n) {
  Mat m;
  m.n = n;
  for (int i = 0; i < n; ++i) m.set(i, i, 1);
  return m;
}

inline Mat mat_mul(const FiniteField& F, const Mat& a, const Mat& b) {
  Mat out;
  out.n = a.n;
  const int n = a.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int acc = 0;
      for (int t = 0; t < n; ++t) acc = F.add(acc, F.mul(a.e[i * n + t], b.e[t * n + j]));
      out.e[i * n + j] = static_cast<std::uint16_t>(acc);
    }
  return out;
}

// Gauss-Jordan inverse; empty when singular.
inline std::optional<Mat> mat_inv(const FiniteField& F, const Mat& a) {
  const int n = a.n;
  std::array<std::uint16_t, 50> work{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) work[i * 2 * n + j] = a.e[i * n + j];
    work[i * 2 * n + n + i] = 1;
  }
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int row = col; row < n; ++row)
      if (work[row * 2 * n + col] != 0) {
        pivot = row;
        break;
      }
    if (pivot < 0) return std::nullopt;
    if (pivot != col)
      for (int j = 0; j < 2 * n; ++j) std::swap(work[pivot * 2 * n + j], work[col * 2 * n + j]);
    const int scale = F.inv(work[col * 2 * n + col]);
    for (int j = 0; j < 2 * n; ++j)
      work[col * 2 * n + j] = static_cast<std::uint16_t>(F.mul(work[col * 2 * n + j], scale));
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      const int factor = work[row * 2 * n + col];
      if (factor == 0) continue;
      for (int j = 0; j < 2 * n; ++j)
        work[row * 2 * n + j] = static_cast<std::uint16_t>(
            F.sub(work[row * 2 * n + j], F.mul(factor, work[col * 2 * n + j])));
    }
  }
  Mat out;
  out.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.e[i * n + j] = work[i * 2 * n + n + j];
  return out;
}

inline Mat mat_frob(const FiniteField& F, const Mat& a) {
  Mat out = a;
  for (int i = 0; i < a.n * a.n; ++i) out.e[i] = static_cast<std::uint16_t>(F.frob(a.e[i]));
  return out;
}

inline Mat mat_frob_iter(const FiniteField& F, const Mat& a, int t) {
  Mat out = a;
  for (int i = 0; i < a.n * a.n; ++i)
    out.e[i] = static_cast<std::uint16_t>(F.frob_iter(a.e[i], t));
  return out;
}

// Positional code: first entry most significant.  Fits in 64 bits for every
// instance the point cap admits.
inline std::uint64_t mat_key(const FiniteField& F, const Mat& a) {
  std::uint64_t key = 0;
  for (int i = 0; i < a.n * a.n; ++i) key = key * static_cast<std::uint64_t>(F.q) + a.e[i];
  return key;
}

// --- block shape helpers -----------------------------------------------------

// Row/column index ranges [0, k) and [k, n) split every matrix into four
// blocks; membership tests below are purely about which blocks vanish.
struct BlockOps {
  int n = 0, k = 0, d = 0;

  bool in_P(const Mat& a) const {  // zero lower-left block
    for (int i = k; i < n; ++i)
      for (int j = 0; j < k; ++j)
        if (a.e[i * n + j] != 0) return false;
    return true;
  }
  bool in_Q(const Mat& a) const {  // zero upper-right block
    for (int i = 0; i < k; ++i)
      for (int j = k; j < n; ++j)
        if (a.e[i * n + j] != 0) return false;
    return true;
  }
  bool in_L(const Mat& a) const { return in_P(a) && in_Q(a); }
  bool is_block_unipotent(const Mat& a) const {
    for (int i = 0; i < n; ++i) {
      if (a.e[i * n + i] != 1) return false;
      for (int j = 0; j < n; ++j)
        if (j != i && same_block(i, j) && a.e[i * n + j] != 0) return false;
    }
    return true;
  }
  bool in_U(const Mat& a) const { return in_P(a) && is_block_unipotent(a); }
  bool in_V(const Mat& a) const { return in_Q(a) && is_block_unipotent(a); }
  bool same_block(int i, int j) const { return (i < k) == (j < k); }

  Mat levi_part(const Mat& a) const {
    Mat out;
    out.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (same_block(i, j)) out.e[i * n + j] = a.e[i * n + j];
    return out;
  }
};

// |GL_r(F_s)| = prod_i (s^r - s^i); throws on overflow-scale inputs.
inline long long gl_order(int r, long long s) {
  long long sr = 1;
  for (int i = 0; i < r; ++i) {
    if (sr > (1ll << 62) / s) throw TooLarge("group order exceeds exact integer range");
    sr *= s;
  }
  long long out = 1;
  long long si = 1;
  for (int i = 0; i < r; ++i) {
    const long long factor = sr - si;
    if (factor != 0 && out > (1ll << 62) / factor)
      throw TooLarge("group order exceeds exact integer range");
    out *= factor;
    si *= s;
  }
  return out;
}

namespace detail {

// Ascending odometer over `slots` field codes in [0, q).  Calls fn for every
// tuple; fn may inspect the shared buffer.  Returns false if fn ever asked to
// stop (by returning true).
template <typename Fn>
bool odometer(int slots, int q, std::vector<int>& buf, Fn&& fn) {
  buf.assign(slots, 0);
  for (;;) {
    if (fn()) return false;
    int pos = slots - 1;
    while (pos >= 0 && buf[pos] == q - 1) {
      buf[pos] = 0;
      --pos;
    }
    if (pos < 0) return true;
    ++buf[pos];
  }
}

}  // namespace detail

// One field level of the extension tower: arithmetic plus streaming
// enumeration of the Levi and unipotent points, but never of GL_n itself.
class ScanLevel {
 public:
  int n, d, k;
  FiniteField F;
  BlockOps blocks;

  ScanLevel(int n_, int d_, int p_, int m_) : n(n_), d(d_), k(n_ - d_), F(p_, m_) {
    if (d < 0 || d > n || n < 1 || n > 5) throw InvalidShape("block shape out of range");
    blocks = {n, k, d};
    // Exact long long arithmetic for every orbit size at this level.
    if (static_cast<double>(n) * n * m_ * std::log2(static_cast<double>(p_)) > 62.0)
      throw TooLarge("tower level too large for exact arithmetic");
    gl_k_codes_ = enumerate_gl_codes(k);
    gl_d_codes_ = enumerate_gl_codes(d);
    long long u_count = 1;
    for (int i = 0; i < k * d; ++i) {
      u_count *= F.q;
      if (u_count > 1'000'000) throw TooLarge("unipotent radical too large to scan");
    }
  }

  long long order_L() const { return gl_order(k, F.q) * gl_order(d, F.q); }
  long long order_U() const {
    long long out = 1;
    for (int i = 0; i < k * d; ++i) out *= F.q;
    return out;
  }
  long long order_G() const { return gl_order(n, F.q); }
  long long order_E() const {
    long long out = order_L();
    const long long u = order_U();
    if (u != 0 && out > (1ll << 62) / (u * u)) throw TooLarge("group order exceeds exact integer range");
    return out * u * u;
  }

  // Are r1 and r2 in one zip orbit over this level's field?  Solves
  // r2^{-1} * (u * l) * r1 in Q with Levi part phi(l) by direct scan.
  bool connected(const Mat& r1, const Mat& r2) const {
    bool found = false;
    scan(r1, r2, [&](long long) {
      found = true;
      return true;
    });
    return found;
  }

  // Number of pairs (u, l) witnessing r ~ r itself: the stabilizer order of
  // r inside the zip group at this level.
  long long stab_order(const Mat& r) const {
    long long count = 0;
    scan(r, r, [&](long long c) {
      count = c;
      return false;
    });
    return count;
  }

  // Enumerate Levi points l (block diagonal, both blocks invertible).
  template <typename Fn>
  void for_each_L(Fn&& fn) const {
    Mat l;
    l.n = n;
    for (std::uint64_t ck : gl_k_codes_) {
      decode_block(ck, 0, k, l);
      for (std::uint64_t cd : gl_d_codes_) {
        decode_block(cd, k, n, l);
        if (fn(static_cast<const Mat&>(l))) return;
      }
    }
  }

  // Enumerate unipotent-upper points (identity diagonal blocks, free
  // upper-right block) in ascending order.
  template <typename Fn>
  void for_each_U(Fn&& fn) const {
    std::vector<int> buf;
    detail::odometer(k * d, F.q, buf, [&]() {
      Mat u = mat_id(n);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < d; ++j) u.set(i, k + j, buf[i * d + j]);
      return fn(static_cast<const Mat&>(u));
    });
  }

 private:
  std::vector<std::uint64_t> gl_k_codes_;  // invertible r x r blocks, ascending
  std::vector<std::uint64_t> gl_d_codes_;

  std::vector<std::uint64_t> enumerate_gl_codes(int r) const {
    std::vector<std::uint64_t> out;
    if (r == 0) {
      out.push_back(0);
      return out;
    }
    double est = std::pow(static_cast<double>(F.q), r * r);
    if (est > 4e6) throw TooLarge("Levi block too large to enumerate");
    std::vector<int> buf;
    Mat block;
    block.n = r;
    detail::odometer(r * r, F.q, buf, [&]() {
      for (int i = 0; i < r * r; ++i) block.e[i] = static_cast<std::uint16_t>(buf[i]);
      if (mat_inv(F, block)) {
        std::uint64_t code = 0;
        for (int i = 0; i < r * r; ++i) code = code * F.q + buf[i];
        out.push_back(code);
      }
      return false;
    });
    return out;
  }

  // Write an r x r block code into rows/cols [lo, hi) of an n x n matrix.
  void decode_block(std::uint64_t code, int lo, int hi, Mat& into) const {
    const int r = hi - lo;
    for (int i = r * r - 1; i >= 0; --i) {
      const int v = static_cast<int>(code % F.q);
      code /= F.q;
      into.set(lo + i / r, lo + i % r, v);
    }
  }

  // Shared core of connected / stab_order.  Calls sink with a running match
  // count after every hit; sink returns true to stop early.
  template <typename Sink>
  void scan(const Mat& r1, const Mat& r2, Sink&& sink) const {
    const std::optional<Mat> r2i = mat_inv(F, r2);
    if (!r2i) throw InternalInconsistency("scan representative is singular");

    std::vector<Mat> left;  // r2^{-1} * u for all unipotent-upper u
    left.reserve(static_cast<std::size_t>(order_U()));
    for_each_U([&](const Mat& u) {
      left.push_back(mat_mul(F, *r2i, u));
      return false;
    });

    const int q = F.q;
    const std::uint16_t* MT = F.mul_table();
    const std::uint16_t* AT = F.add_table();
    const int nn = n;
    long long hits = 0;
    bool stop = false;

    Mat B;
    B.n = nn;
    Mat phil;
    phil.n = nn;
    for_each_L([&](const Mat& l) {
      // B = l * r1: row i of l is supported on its own diagonal block.
      for (int i = 0; i < nn; ++i) {
        const int lo = i < k ? 0 : k;
        const int hi = i < k ? k : nn;
        for (int j = 0; j < nn; ++j) {
          int acc = 0;
          for (int t = lo; t < hi; ++t)
            acc = AT[acc * q + MT[l.e[i * nn + t] * q + r1.e[t * nn + j]]];
          B.e[i * nn + j] = static_cast<std::uint16_t>(acc);
        }
      }
      for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j)
          phil.e[i * nn + j] = blocks.same_block(i, j)
                                   ? static_cast<std::uint16_t>(F.frob(l.e[i * nn + j]))
                                   : 0;

      for (const Mat& A : left) {
        // Candidate q~ = A * B must lie in Q with Levi part phil.  Check the
        // upper-right block first (it must vanish), then the diagonal
        // blocks; the lower-left block is unconstrained and never computed.
        bool ok = true;
        for (int i = 0; i < k && ok; ++i)
          for (int j = k; j < nn; ++j) {
            int acc = 0;
            for (int t = 0; t < nn; ++t)
              acc = AT[acc * q + MT[A.e[i * nn + t] * q + B.e[t * nn + j]]];
            if (acc != 0) {
              ok = false;
              break;
            }
          }
        if (!ok) continue;
        for (int i = 0; i < nn && ok; ++i) {
          const int lo = i < k ? 0 : k;
          const int hi = i < k ? k : nn;
          for (int j = lo; j < hi; ++j) {
            int acc = 0;
            for (int t = 0; t < nn; ++t)
              acc = AT[acc * q + MT[A.e[i * nn + t] * q + B.e[t * nn + j]]];
            if (acc != phil.e[i * nn + j]) {
              ok = false;
              break;
            }
          }
        }
        if (!ok) continue;
        ++hits;
        if (sink(hits)) {
          stop = true;
          break;
        }
      }
      return stop;
    });
  }
};

// --- fully enumerated instance ----------------------------------------------

struct FiniteZipInstance {
  int n = 0, d = 0, k = 0, p = 0, m = 0;
  FiniteField F;
  BlockOps blocks;

  long long g_order = 0, p_order = 0, q_order = 0, l_order = 0, u_order = 0, e_order = 0;

  std::vector<Mat> G_points;  // ascending by entry tuple
  std::vector<std::uint64_t> g_keys;
  std::vector<Mat> P_points, Q_points, L_points, U_points, V_points;
  std::vector<std::pair<Mat, Mat>> E_points;

  std::optional<Mat> frame;  // alignment point used by the section maps

  FiniteZipInstance(int n_, int d_, int p_, int m_) : n(n_), d(d_), k(n_ - d_), p(p_), m(m_), F(p_, m_) {
    blocks = {n, k, d};
  }

  int g_index(const Mat& a) const {
    const std::uint64_t key = mat_key(F, a);
    const auto it = std::lower_bound(g_keys.begin(), g_keys.end(), key);
    if (it == g_keys.end() || *it != key)
      throw InternalInconsistency("matrix is not an enumerated group point");
    return static_cast<int>(it - g_keys.begin());
  }

  bool in_P(const Mat& a) const { return blocks.in_P(a); }
  bool in_Q(const Mat& a) const { return blocks.in_Q(a); }
  bool in_L(const Mat& a) const { return blocks.in_L(a); }
  bool in_U(const Mat& a) const { return blocks.in_U(a); }
  bool in_V(const Mat& a) const { return blocks.in_V(a); }
  Mat levi_part(const Mat& a) const { return blocks.levi_part(a); }

  // A in P factors uniquely as u * l with u unipotent-upper, l Levi.
  std::pair<Mat, Mat> split_P(const Mat& a) const {
    const Mat l = levi_part(a);
    const auto li = mat_inv(F, l);
    if (!li) throw NotInIntersection("matrix has a singular Levi part");
    return {mat_mul(F, a, *li), l};
  }
  std::pair<Mat, Mat> split_Q(const Mat& a) const {
    const Mat l = levi_part(a);
    const auto li = mat_inv(F, l);
    if (!li) throw NotInIntersection("matrix has a singular Levi part");
    return {mat_mul(F, a, *li), l};
  }

  int dim_P() const { return k * d + k * k + d * d; }
  int dim_U() const { return k * d; }
  // Valuation shift between a rational orbit count and the orbit dimension:
  // positive-root count of the Levi plus its rank.
  int levi_correction() const { return k * (k - 1) / 2 + d * (d - 1) / 2 + n; }
};

inline FiniteZipInstance build_instance(int n, int d, int p, int m,
                                        std::size_t cap = 10'000'000) {
  if (n < 1 || n > 5 || d < 0 || d > n) throw InvalidShape("block shape out of range");
  FiniteZipInstance inst(n, d, p, m);
  const FiniteField& F = inst.F;
  const long long q = F.q;

  {  // size guard before any enumeration
    long long cells = 1;
    for (int i = 0; i < n * n; ++i) {
      cells *= q;
      if (cells > static_cast<long long>(cap) * 4)
        throw TooLarge("instance exceeds the enumeration cap");
    }
  }
  inst.g_order = gl_order(n, q);
  if (inst.g_order > static_cast<long long>(cap))
    throw TooLarge("instance exceeds the enumeration cap");
  inst.l_order = gl_order(inst.k, q) * gl_order(d, q);
  inst.u_order = 1;
  for (int i = 0; i < inst.k * d; ++i) inst.u_order *= q;
  inst.p_order = inst.u_order * inst.l_order;
  inst.q_order = inst.p_order;
  inst.e_order = inst.u_order * inst.u_order * inst.l_order;

  std::vector<int> buf;
  Mat a;
  a.n = n;
  detail::odometer(n * n, F.q, buf, [&]() {
    for (int i = 0; i < n * n; ++i) a.e[i] = static_cast<std::uint16_t>(buf[i]);
    if (mat_inv(F, a)) {
      inst.G_points.push_back(a);
      inst.g_keys.push_back(mat_key(F, a));
    }
    return false;
  });

  ScanLevel level(n, d, p, m);
  level.for_each_U([&](const Mat& u) {
    inst.U_points.push_back(u);
    return false;
  });
  std::vector<Mat> levis;
  level.for_each_L([&](const Mat& l) {
    levis.push_back(l);
    return false;
  });
  std::sort(levis.begin(), levis.end());
  inst.L_points = levis;
  for (const Mat& u : inst.U_points) {
    Mat v;  // transpose of u is unipotent-lower
    v.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v.e[j * n + i] = u.e[i * n + j];
    inst.V_points.push_back(v);
  }
  std::sort(inst.V_points.begin(), inst.V_points.end());

  for (const Mat& u : inst.U_points)
    for (const Mat& l : inst.L_points) inst.P_points.push_back(mat_mul(F, u, l));
  std::sort(inst.P_points.begin(), inst.P_points.end());
  for (const Mat& v : inst.V_points)
    for (const Mat& l : inst.L_points) inst.Q_points.push_back(mat_mul(F, v, l));
  std::sort(inst.Q_points.begin(), inst.Q_points.end());

  for (const Mat& u : inst.U_points)
    for (const Mat& l : inst.L_points) {
      const Mat phil = mat_frob(F, l);
      for (const Mat& v : inst.V_points)
        inst.E_points.emplace_back(mat_mul(F, u, l), mat_mul(F, v, phil));
    }

  if (static_cast<long long>(inst.G_points.size()) != inst.g_order ||
      static_cast<long long>(inst.P_points.size()) != inst.p_order ||
      static_cast<long long>(inst.Q_points.size()) != inst.q_order ||
      static_cast<long long>(inst.L_points.size()) != inst.l_order ||
      static_cast<long long>(inst.E_points.size()) != inst.e_order)
    throw InternalInconsistency("enumerated point counts disagree with closed-form orders");
  return inst;
}

// --- orbits and the extension tower -------------------------------------------

struct OrbitTable {
  std::vector<int> class_of;    // per G index; labels ascend with their least member
  std::vector<int> rep_index;   // per orbit: G index of its least member
  std::vector<long long> sizes;
};

inline OrbitTable zip_orbits(const FiniteZipInstance& inst) {
  const FiniteField& F = inst.F;
  const std::size_t N = inst.G_points.size();
  UnionFind uf(N);

  auto connect_by = [&](auto&& transform) {
    for (std::size_t i = 0; i < N; ++i) {
      const Mat image = transform(inst.G_points[i]);
      uf.unite(i, static_cast<std::size_t>(inst.g_index(image)));
    }
  };
  for (const Mat& u : inst.U_points)
    connect_by([&](const Mat& g) { return mat_mul(F, u, g); });
  for (const Mat& v : inst.V_points) {
    const Mat vi = *mat_inv(F, v);
    connect_by([&](const Mat& g) { return mat_mul(F, g, vi); });
  }
  for (const Mat& l : inst.L_points) {
    const Mat phil_inv = *mat_inv(F, mat_frob(F, l));
    connect_by([&](const Mat& g) { return mat_mul(F, mat_mul(F, l, g), phil_inv); });
  }

  OrbitTable table;
  table.class_of.assign(N, -1);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t root = uf.find(i);
    if (table.class_of[root] < 0) {
      table.class_of[root] = static_cast<int>(table.rep_index.size());
      table.rep_index.push_back(static_cast<int>(root));
      table.sizes.push_back(0);
    }
    table.class_of[i] = table.class_of[root];
    ++table.sizes[table.class_of[i]];
  }
  return table;
}

struct TowerReport {
  int n = 0, d = 0, p = 0, m_max = 0;
  std::shared_ptr<const FiniteZipInstance> base;  // the m = 1 instance
  OrbitTable base_orbits;
  std::vector<long long> counts;  // merged class count after each level m = 1..m_max
  bool stabilized = false;        // last two counts agree (requires m_max >= 2)
  std::vector<int> class_of_orbit;  // base orbit -> merged geometric class
  int geometric_count = 0;
};

// Merge the rational orbits of the base instance using connectivity evidence
// from every tower level up to m_max.  Counts never increase; distinct
// geometric classes can never merge, so a stabilized tail equals the true
// geometric count once every within-class merge has appeared.
inline TowerReport geometric_orbit_count(int n, int d, int p, int m_max,
                                         std::size_t cap = 10'000'000) {
  if (m_max < 1) throw InvalidShape("tower height must be at least 1");
  TowerReport report;
  report.n = n;
  report.d = d;
  report.p = p;
  report.m_max = m_max;
  report.base = std::make_shared<FiniteZipInstance>(build_instance(n, d, p, 1, cap));
  report.base_orbits = zip_orbits(*report.base);

  const int orbit_count = static_cast<int>(report.base_orbits.sizes.size());
  UnionFind uf(orbit_count);
  report.counts.push_back(orbit_count);

  for (int m = 2; m <= m_max; ++m) {
    const ScanLevel level(n, d, p, m);
    for (int a = 0; a < orbit_count; ++a)
      for (int b = a + 1; b < orbit_count; ++b) {
        if (uf.same(a, b)) continue;
        const Mat& ra = report.base->G_points[report.base_orbits.rep_index[a]];
        const Mat& rb = report.base->G_points[report.base_orbits.rep_index[b]];
        if (level.connected(ra, rb)) uf.unite(a, b);
      }
    report.counts.push_back(static_cast<long long>(uf.classes()));
  }

  report.stabilized = m_max >= 2 && report.counts[m_max - 1] == report.counts[m_max - 2];
  report.class_of_orbit.assign(orbit_count, -1);
  int next = 0;
  for (int a = 0; a < orbit_count; ++a) {
    const std::size_t root = uf.find(a);
    if (report.class_of_orbit[root] < 0) report.class_of_orbit[root] = next++;
    report.class_of_orbit[a] = report.class_of_orbit[root];
  }
  report.geometric_count = next;
  return report;
}

// --- Weyl lift ----------------------------------------------------------------

// Permutation matrix attached to a symmetric-group element.  The one-line
// permutation is built by applying the canonical word letter by letter as
// value swaps; the matrix sends basis vector b to basis vector pi(b).  With
// the library's composition convention this assignment is an
// anti-homomorphism, which is exactly what double-coset translates P g x Q
// need; no multiplicativity of the lift itself is exposed or used.
inline std::vector<int> one_line_permutation(const WeylElt& w, int n) {
  const WeylGroup& W = group_of(w);
  if (W.rank != n - 1) throw InvalidShape("group rank does not match the matrix size");
  for (int i = 0; i < W.rank; ++i)
    for (int j = 0; j < W.rank; ++j) {
      const int expected = i == j ? 2 : (std::abs(i - j) == 1 ? -1 : 0);
      if (W.spec.entries[i][j] != expected)
        throw InvalidShape("Weyl lift needs the symmetric-group Cartan matrix");
    }
  std::vector<int> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  for (std::uint8_t c : word(w))
    for (int pos = 0; pos < n; ++pos) {
      if (pi[pos] == c)
        pi[pos] = c + 1;
      else if (pi[pos] == c + 1)
        pi[pos] = c;
    }
  return pi;
}

inline Mat weyl_lift(const FiniteField& F, const WeylElt& w, int n) {
  (void)F;
  const std::vector<int> pi = one_line_permutation(w, n);
  Mat out;
  out.n = n;
  for (int b = 0; b < n; ++b) out.set(pi[b], b, 1);
  return out;
}

// J for the block shape (k, d) inside the symmetric group on n letters: all
// nodes except the one separating the two blocks.
inline std::vector<int> shape_type_J(int n, int d) {
  const int k = n - d;
  std::vector<int> J;
  for (int i = 0; i + 1 < n; ++i)
    if (i != k - 1) J.push_back(i);
  return J;
}

// --- frame matching and dimensions --------------------------------------------

struct MatchResult {
  Mat frame;
  std::vector<int> stratum_class;  // per coset rep: merged geometric class label
  std::vector<Mat> translates;     // frame * lift(w) per coset rep
};

// Search G(F_p) in ascending order for a frame element g0 such that the
// translates g0 * lift(w) hit pairwise distinct geometric classes, the cells
// P * (g0 * lift(x)) * Q over double-coset minima partition G, every
// translate lies in the cell of its double-coset projection, and the
// level-2 valuation estimate of each translate's orbit dimension equals
// dim P + length(w).
inline MatchResult match_representatives(const TowerReport& tower, const CosetTable& jw) {
  if (tower.m_max < 2) throw TowerTooShort("frame matching needs at least two tower levels");
  if (!tower.stabilized) throw NonStabilized("orbit counts had not stabilized at the top level");
  const FiniteZipInstance& inst = *tower.base;
  const FiniteField& F = inst.F;
  const WeylGroup& W = *jw.group;

  const std::vector<WeylElt>& reps = jw.reps;
  const int R = static_cast<int>(reps.size());
  if (R != tower.geometric_count)
    throw NoFrameFound("stratum count differs from the geometric class count");

  std::vector<Mat> lifts;
  std::vector<int> lens;
  for (const WeylElt& w : reps) {
    lifts.push_back(weyl_lift(F, w, inst.n));
    lens.push_back(length(w));
  }

  std::vector<int> K;
  for (int j : jw.J) K.push_back(opposition(W, j));
  const DoubleCosetTable dmr = min_double_coset_reps(W, jw.J, K);
  const int X = static_cast<int>(dmr.reps.size());
  std::vector<Mat> dlifts;
  for (const WeylElt& x : dmr.reps) dlifts.push_back(weyl_lift(F, x, inst.n));
  std::vector<int> proj_cell(R, -1);
  for (int i = 0; i < R; ++i)
    proj_cell[i] = double_rep_index(dmr, project_double(reps[i], jw.J, K));

  const ScanLevel level2(inst.n, inst.d, inst.p, 2);
  const long long e2 = level2.order_E();
  const int corr = inst.levi_correction();

  std::vector<int> owner(inst.G_points.size());
  for (const Mat& g : inst.G_points) {
    // (i) pairwise distinct geometric classes among the translates
    std::vector<Mat> translates(R);
    std::vector<int> cls(R);
    bool ok = true;
    for (int i = 0; i < R && ok; ++i) {
      translates[i] = mat_mul(F, g, lifts[i]);
      cls[i] = tower.class_of_orbit[tower.base_orbits.class_of[inst.g_index(translates[i])]];
      for (int j = 0; j < i; ++j)
        if (cls[j] == cls[i]) ok = false;
    }
    if (!ok) continue;

    // (ii) the double-coset cells partition G
    std::fill(owner.begin(), owner.end(), -1);
    std::size_t assigned = 0;
    for (int xi = 0; xi < X && ok; ++xi) {
      const Mat gx = mat_mul(F, g, dlifts[xi]);
      for (const Mat& pp : inst.P_points) {
        const Mat pgx = mat_mul(F, pp, gx);
        for (const Mat& qq : inst.Q_points) {
          const int idx = inst.g_index(mat_mul(F, pgx, qq));
          if (owner[idx] == xi) continue;
          if (owner[idx] != -1) {
            ok = false;
            break;
          }
          owner[idx] = xi;
          ++assigned;
        }
        if (!ok) break;
      }
    }
    if (!ok || assigned != inst.G_points.size()) continue;

    // (iii) each translate sits in the cell of its projection
    for (int i = 0; i < R && ok; ++i)
      if (owner[inst.g_index(translates[i])] != proj_cell[i]) ok = false;
    if (!ok) continue;

    // (iv) valuation-based dimension of each translate's orbit
    for (int i = 0; i < R && ok; ++i) {
      const long long stab2 = level2.stab_order(translates[i]);
      const long long base_size =
          tower.base_orbits.sizes[tower.base_orbits.class_of[inst.g_index(translates[i])]];
      const int dim_hat = (val_p(e2, inst.p) - val_p(stab2, inst.p)) - val_p(base_size, inst.p) + corr;
      if (dim_hat != inst.dim_P() + lens[i]) ok = false;
    }
    if (!ok) continue;

    MatchResult result;
    result.frame = g;
    result.stratum_class = cls;
    result.translates = translates;
    return result;
  }
  throw NoFrameFound("no group point satisfies the frame conditions");
}

struct DimEstimate {
  double padic = 0.0;   // valuation slope between levels 1 and 2, plus the Levi correction
  double naive = 0.0;   // plain logarithmic ratio of orbit sizes; reported, not trusted
  int expected = 0;
  bool within_tolerance = false;  // |padic - expected| <= 0.25
  long long size_1 = 0, size_2 = 0;

  static constexpr double tolerance = 0.25;
};

inline DimEstimate dimension_estimate(const TowerReport& tower, const Mat& g, int expected_dim) {
  if (tower.m_max < 2) throw TowerTooShort("dimension estimate needs at least two tower levels");
  const FiniteZipInstance& inst = *tower.base;
  DimEstimate est;
  est.expected = expected_dim;
  est.size_1 = tower.base_orbits.sizes[tower.base_orbits.class_of[inst.g_index(g)]];
  const ScanLevel level2(inst.n, inst.d, inst.p, 2);
  est.size_2 = level2.order_E() / level2.stab_order(g);
  est.padic = static_cast<double>(val_p(est.size_2, inst.p) - val_p(est.size_1, inst.p) +
                                  inst.levi_correction());
  est.naive = std::log(static_cast<double>(est.size_2) / static_cast<double>(est.size_1)) /
              std::log(static_cast<double>(inst.p));
  est.within_tolerance = std::abs(est.padic - expected_dim) <= DimEstimate::tolerance;
  return est;
}

struct StabReport {
  std::vector<long long> orders;  // stabilizer order at each level m = 1..m_max
  std::vector<std::pair<Mat, Mat>> base_subgroup;  // the level-1 stabilizer inside E
  double growth_exponent = 0.0;  // valuation slope across the tower
  int expected_exponent = 0;     // dim of the unipotent radical minus the length
};

inline StabReport stabilizer_points(const TowerReport& tower, const Mat& g, int length_w) {
  if (tower.m_max < 2) throw TowerTooShort("stabilizer growth needs at least two tower levels");
  const FiniteZipInstance& inst = *tower.base;
  const FiniteField& F = inst.F;
  StabReport report;
  for (int m = 1; m <= tower.m_max; ++m) {
    const ScanLevel level(inst.n, inst.d, inst.p, m);
    report.orders.push_back(level.stab_order(g));
  }

  const auto gi = mat_inv(F, g);
  for (const Mat& u : inst.U_points)
    for (const Mat& l : inst.L_points) {
      const Mat pmat = mat_mul(F, u, l);
      const Mat qmat = mat_mul(F, mat_mul(F, *gi, pmat), g);
      if (inst.in_Q(qmat) && inst.levi_part(qmat) == mat_frob(F, l))
        report.base_subgroup.emplace_back(pmat, qmat);
    }
  if (static_cast<long long>(report.base_subgroup.size()) != report.orders[0])
    throw InternalInconsistency("materialized stabilizer disagrees with the scan count");

  report.growth_exponent =
      static_cast<double>(val_p(report.orders.back(), inst.p) - val_p(report.orders.front(), inst.p)) /
      static_cast<double>(tower.m_max - 1);
  report.expected_exponent = inst.dim_U() - length_w;
  return report;
}

// --- section maps -------------------------------------------------------------

inline Mat frame_translate(const FiniteZipInstance& inst, const WeylElt& x) {
  if (!inst.frame) throw std::logic_error("instance carries no frame element");
  return mat_mul(inst.F, *inst.frame, weyl_lift(inst.F, x, inst.n));
}

// Unique decomposition of a parabolic point.
inline std::pair<Mat, Mat> levi_decompose(const FiniteZipInstance& inst, const Mat& pmat) {
  if (!inst.in_P(pmat)) throw NotInIntersection("point is not in the parabolic");
  return inst.split_P(pmat);
}

// e: P cap (h Q h^{-1}) -> L x L, p -> (Levi part of h^{-1} p h on the Q
// side, twisted Levi part of p on the P side).
inline std::pair<Mat, Mat> e_x_map(const FiniteZipInstance& inst, const WeylElt& x, const Mat& pmat) {
  const FiniteField& F = inst.F;
  const Mat h = frame_translate(inst, x);
  const Mat hi = *mat_inv(F, h);
  if (!inst.in_P(pmat)) throw NotInIntersection("point is not in the parabolic");
  const Mat conj = mat_mul(F, mat_mul(F, hi, pmat), h);
  if (!inst.in_Q(conj)) throw NotInIntersection("conjugate leaves the opposite parabolic");
  const Mat l0 = inst.split_P(pmat).second;
  const Mat m0 = inst.split_Q(conj).second;
  return {m0, mat_frob(F, l0)};
}

// Section of e over the graph locus: (p', q') -> u_w * phi^{-1}(q'), where
// u_w is the unipotent part of h p' h^{-1} and phi^{-1} undoes one entrywise
// p-power (so it is the (m-1)-fold power map).
inline Mat f_x_section(const FiniteZipInstance& inst, const WeylElt& x,
                       const std::pair<Mat, Mat>& z) {
  const FiniteField& F = inst.F;
  const Mat h = frame_translate(inst, x);
  const Mat hi = *mat_inv(F, h);
  if (!inst.in_L(z.first) || !inst.in_L(z.second))
    throw NotInIntersection("section argument is not a pair of Levi points");
  const Mat conj = mat_mul(F, mat_mul(F, h, z.first), hi);
  if (!inst.in_P(conj)) throw NotInIntersection("Levi point does not transport into the parabolic");
  const Mat u_w = inst.split_P(conj).first;
  return mat_mul(F, u_w, mat_frob_iter(F, z.second, inst.m - 1));
}

// The ambient sets the section maps live on, enumerated outright.
struct SectionSets {
  Mat h;
  std::vector<Mat> D;      // P cap h Q h^{-1}
  std::vector<Mat> Px;     // Levi points transported into P by h (.) h^{-1}
  std::vector<Mat> Qx;     // phi of Levi points transported into Q by h^{-1} (.) h
  std::vector<Mat> RuQx;   // phi of Levi points transported into V
  std::vector<Mat> UcapV;  // unipotent-upper points transported into V
  std::vector<std::pair<Mat, Mat>> EZ;  // {(p', chi(p') * r)}: the smaller zip group
};

inline SectionSets section_sets(const FiniteZipInstance& inst, const WeylElt& x) {
  const FiniteField& F = inst.F;
  SectionSets out;
  out.h = frame_translate(inst, x);
  const Mat hi = *mat_inv(F, out.h);

  for (const Mat& pp : inst.P_points)
    if (inst.in_Q(mat_mul(F, mat_mul(F, hi, pp), out.h))) out.D.push_back(pp);
  for (const Mat& l : inst.L_points) {
    if (inst.in_P(mat_mul(F, mat_mul(F, out.h, l), hi))) out.Px.push_back(l);
    const Mat down = mat_mul(F, mat_mul(F, hi, l), out.h);
    if (inst.in_Q(down)) out.Qx.push_back(mat_frob(F, l));
    if (inst.in_V(down)) out.RuQx.push_back(mat_frob(F, l));
  }
  std::sort(out.Qx.begin(), out.Qx.end());
  std::sort(out.RuQx.begin(), out.RuQx.end());
  for (const Mat& u : inst.U_points)
    if (inst.in_V(mat_mul(F, mat_mul(F, hi, u), out.h))) out.UcapV.push_back(u);

  for (const Mat& pp : out.Px) {
    const Mat conj = mat_mul(F, mat_mul(F, out.h, pp), hi);
    const Mat chi = mat_frob(F, inst.split_P(conj).second);
    for (const Mat& r : out.RuQx) out.EZ.emplace_back(pp, mat_mul(F, chi, r));
  }
  return out;
}

// --- Lang map -----------------------------------------------------------------

// g -> g * x0 * F(g)^{-1} with F the entrywise p-power.
inline std::vector<std::pair<Mat, Mat>> lang_map(const FiniteZipInstance& inst, const Mat& x0) {
  const FiniteField& F = inst.F;
  std::vector<std::pair<Mat, Mat>> out;
  out.reserve(inst.G_points.size());
  for (const Mat& g : inst.G_points) {
    const Mat fg_inv = *mat_inv(F, mat_frob(F, g));
    out.emplace_back(g, mat_mul(F, mat_mul(F, g, x0), fg_inv));
  }
  return out;
}

struct LangReport {
  bool fibers_constant = false;
  long long fiber_size = 0;
  long long image_size = 0;
  long long twisted_fixed_order = 0;  // points with x0 * F(g) * x0^{-1} = g
  bool product_identity = false;      // fiber_size * image_size == |G|
};

inline LangReport lang_fiber_check(const FiniteZipInstance& inst, const Mat& x0) {
  const FiniteField& F = inst.F;
  std::vector<std::uint64_t> image_keys;
  image_keys.reserve(inst.G_points.size());
  for (const auto& [g, image] : lang_map(inst, x0)) image_keys.push_back(mat_key(F, image));
  std::sort(image_keys.begin(), image_keys.end());

  LangReport report;
  report.fibers_constant = true;
  long long run = 0;
  long long first_run = 0;
  for (std::size_t i = 0; i < image_keys.size(); ++i) {
    ++run;
    if (i + 1 == image_keys.size() || image_keys[i + 1] != image_keys[i]) {
      ++report.image_size;
      if (first_run == 0)
        first_run = run;
      else if (run != first_run)
        report.fibers_constant = false;
      run = 0;
    }
  }
  report.fiber_size = first_run;

  const Mat x0i = *mat_inv(F, x0);
  for (const Mat& g : inst.G_points) {
    const Mat twisted = mat_mul(F, mat_mul(F, x0, mat_frob(F, g)), x0i);
    if (twisted == g) ++report.twisted_fixed_order;
  }
  report.product_identity =
      report.fiber_size * report.image_size == static_cast<long long>(inst.G_points.size()) &&
      report.fiber_size == report.twisted_fixed_order;
  return report;
}

// Points fixed by the entrywise p-power: the rational subgroup at the base
// of the tower.  Verified to be closed under product and inverse.
inline std::vector<Mat> fixed_points(const FiniteZipInstance& inst) {
  const FiniteField& F = inst.F;
  std::vector<Mat> out;
  for (const Mat& g : inst.G_points)
    if (mat_frob(F, g) == g) out.push_back(g);
  if (out.size() <= 4096) {
    std::vector<std::uint64_t> keys;
    for (const Mat& g : out) keys.push_back(mat_key(F, g));
    std::sort(keys.begin(), keys.end());
    auto member = [&](const Mat& a) {
      return std::binary_search(keys.begin(), keys.end(), mat_key(F, a));
    };
    for (const Mat& a : out) {
      if (!member(*mat_inv(F, a))) throw InternalInconsistency("fixed points not closed under inverse");
      for (const Mat& b : out)
        if (!member(mat_mul(F, a, b))) throw InternalInconsistency("fixed points not closed under product");
    }
  }
  return out;
}

}  // namespace zipstrata
