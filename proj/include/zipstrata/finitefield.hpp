#pragma once

// Small finite fields F_{p^m} with fully tabulated arithmetic.
//
// Field elements are encoded as integers in [0, p^m): the base-p digits of
// the code, least significant first, are the coefficients of the residue
// polynomial.  The prime subfield therefore occupies codes 0..p-1 in every
// extension, so matrices over F_p embed into any F_{p^m} without re-encoding.
// The modulus is the lexicographically smallest monic irreducible of degree m
// (by ascending code of its lower coefficients); all uses downstream are
// independent of this choice up to field isomorphism.

#include <cstdint>
#include <vector>

#include "common.hpp"

namespace zipstrata {

class FiniteField {
 public:
  int p = 0;  // characteristic; also the twisting exponent used downstream
  int m = 0;  // extension degree
  int q = 0;  // p^m

  static constexpr int max_q = 1024;

  FiniteField(int p_, int m_) : p(p_), m(m_) {
    if (p < 2 || m < 1) throw InvalidShape("field parameters must satisfy p >= 2, m >= 1");
    for (int d = 2; d * d <= p; ++d)
      if (p % d == 0) throw InvalidShape("field characteristic must be prime");
    long long size = 1;
    for (int i = 0; i < m; ++i) {
      size *= p;
      if (size > max_q) throw TooLarge("finite field too large to tabulate");
    }
    q = static_cast<int>(size);
    build_tables();
  }

  int add(int a, int b) const { return add_t_[a * q + b]; }
  int sub(int a, int b) const { return add_t_[a * q + neg_t_[b]]; }
  int neg(int a) const { return neg_t_[a]; }
  int mul(int a, int b) const { return mul_t_[a * q + b]; }
  int inv(int a) const {
    if (a == 0) throw InternalInconsistency("inverse of zero");
    return inv_t_[a];
  }
  int frob(int a) const { return frob_t_[a]; }  // a -> a^p
  int frob_iter(int a, int t) const {
    for (int i = 0; i < t; ++i) a = frob_t_[a];
    return a;
  }
  int pow(int a, long long e) const {
    int acc = 1;
    int base = a;
    while (e > 0) {
      if (e & 1) acc = mul(acc, base);
      base = mul(base, base);
      e >>= 1;
    }
    return acc;
  }

  // Direct access for hot loops.
  const std::uint16_t* mul_table() const { return mul_t_.data(); }
  const std::uint16_t* add_table() const { return add_t_.data(); }

 private:
  std::vector<std::uint16_t> add_t_, mul_t_;
  std::vector<std::uint16_t> neg_t_, inv_t_, frob_t_;

  std::vector<int> digits(int code) const {
    std::vector<int> d(m);
    for (int i = 0; i < m; ++i) {
      d[i] = code % p;
      code /= p;
    }
    return d;
  }
  int encode(const std::vector<int>& d) const {
    int code = 0;
    for (int i = m - 1; i >= 0; --i) code = code * p + d[i];
    return code;
  }

  void build_tables() {
    // Lexicographically first monic irreducible: scan the lower-coefficient
    // codes in ascending order and keep the first polynomial with no root
    // that also survives trial division by smaller-degree monics.
    std::vector<int> modulus;  // coefficients of x^m expressed in lower powers (negated modulus tail)
    if (m == 1) {
      modulus.assign(1, 0);
    } else {
      modulus = find_irreducible();
    }

    auto poly_mul_mod = [&](const std::vector<int>& a, const std::vector<int>& b) {
      std::vector<int> prod(2 * m - 1, 0);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) prod[i + j] = (prod[i + j] + a[i] * b[j]) % p;
      // Reduce x^t for t >= m using x^m = modulus (as lower-degree poly).
      for (int t = 2 * m - 2; t >= m; --t) {
        const int c = prod[t];
        if (c == 0) continue;
        prod[t] = 0;
        for (int i = 0; i < m; ++i) prod[t - m + i] = (prod[t - m + i] + c * modulus[i]) % p;
      }
      prod.resize(m);
      return prod;
    };

    add_t_.resize(static_cast<std::size_t>(q) * q);
    mul_t_.resize(static_cast<std::size_t>(q) * q);
    neg_t_.resize(q);
    inv_t_.assign(q, 0);
    frob_t_.resize(q);

    std::vector<std::vector<int>> digit_of(q);
    for (int a = 0; a < q; ++a) digit_of[a] = digits(a);
    for (int a = 0; a < q; ++a) {
      std::vector<int> nd(m);
      for (int i = 0; i < m; ++i) nd[i] = (p - digit_of[a][i]) % p;
      neg_t_[a] = static_cast<std::uint16_t>(encode(nd));
      for (int b = 0; b < q; ++b) {
        std::vector<int> sd(m);
        for (int i = 0; i < m; ++i) sd[i] = (digit_of[a][i] + digit_of[b][i]) % p;
        add_t_[static_cast<std::size_t>(a) * q + b] = static_cast<std::uint16_t>(encode(sd));
        const int prod = encode(poly_mul_mod(digit_of[a], digit_of[b]));
        mul_t_[static_cast<std::size_t>(a) * q + b] = static_cast<std::uint16_t>(prod);
      }
    }
    for (int a = 1; a < q; ++a)
      for (int b = 1; b < q; ++b)
        if (mul_t_[static_cast<std::size_t>(a) * q + b] == 1) {
          inv_t_[a] = static_cast<std::uint16_t>(b);
          break;
        }
    for (int a = 1; a < q; ++a)
      if (inv_t_[a] == 0) throw InternalInconsistency("field element without inverse; modulus not irreducible");
    for (int a = 0; a < q; ++a) {
      int acc = 1;
      for (int i = 0; i < p; ++i) acc = mul_t_[static_cast<std::size_t>(acc) * q + a];
      frob_t_[a] = static_cast<std::uint16_t>(acc);
    }
  }

  // Returns the reduction rule: x^m = sum_i rule[i] x^i, for the first monic
  // irreducible x^m + c_{m-1} x^{m-1} + ... + c_0 in ascending code order of
  // (c_0, ..., c_{m-1}).
  std::vector<int> find_irreducible() const {
    long long total = 1;
    for (int i = 0; i < m; ++i) total *= p;
    for (long long code = 0; code < total; ++code) {
      std::vector<int> c(m);
      long long rest = code;
      for (int i = 0; i < m; ++i) {
        c[i] = static_cast<int>(rest % p);
        rest /= p;
      }
      if (is_irreducible(c)) {
        std::vector<int> rule(m);
        for (int i = 0; i < m; ++i) rule[i] = (p - c[i]) % p;
        return rule;
      }
    }
    throw InternalInconsistency("no irreducible polynomial found");
  }

  // Irreducibility of x^m + c_{m-1} x^{m-1} + ... + c_0 over F_p by trial
  // division with every monic polynomial of degree 1..m/2.
  bool is_irreducible(const std::vector<int>& c) const {
    std::vector<int> poly(m + 1);
    for (int i = 0; i < m; ++i) poly[i] = c[i];
    poly[m] = 1;
    for (int deg = 1; deg * 2 <= m; ++deg) {
      long long count = 1;
      for (int i = 0; i < deg; ++i) count *= p;
      for (long long code = 0; code < count; ++code) {
        std::vector<int> div(deg + 1);
        long long rest = code;
        for (int i = 0; i < deg; ++i) {
          div[i] = static_cast<int>(rest % p);
          rest /= p;
        }
        div[deg] = 1;
        // Polynomial remainder of poly by div.
        std::vector<int> rem = poly;
        for (int t = m; t >= deg; --t) {
          const int lead = rem[t];
          if (lead == 0) continue;
          for (int i = 0; i <= deg; ++i)
            rem[t - deg + i] = ((rem[t - deg + i] - lead * div[i]) % p + p * p) % p;
        }
        bool zero = true;
        for (int i = 0; i < deg; ++i)
          if (rem[i] != 0) zero = false;
        if (zero) return false;
      }
    }
    return true;
  }
};

}  // namespace zipstrata
