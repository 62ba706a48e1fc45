#pragma once

// Shared error hierarchy and small utilities.
//
// Every failure the library can signal derives from zipstrata::Error, so
// callers can catch one type at the boundary.  The concrete classes below are
// part of the public contract: tests and the CLI distinguish them by type.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace zipstrata {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- construction-time input problems -------------------------------------
struct MalformedCartan : Error { using Error::Error; };   // not a valid (generalized) Cartan matrix / automorphism
struct NotFiniteType : Error { using Error::Error; };     // enumeration blew past the finiteness cap
struct TooLarge : Error { using Error::Error; };          // finite-group instance over the point cap
struct InvalidShape : Error { using Error::Error; };      // block shape parameters out of range

// --- element arithmetic ----------------------------------------------------
struct MixedRootSystems : Error { using Error::Error; };  // elements of two different groups combined
struct NotARepresentative : Error { using Error::Error; };
struct NotAMinimalRep : Error { using Error::Error; };
struct SigmaDoesNotPreserveJ : Error { using Error::Error; };

// --- finite-group oracle ----------------------------------------------------
struct NotInIntersection : Error { using Error::Error; }; // point outside the domain of a section map
struct NonStabilized : Error { using Error::Error; };     // orbit counts still moving at the top of the tower
struct NoFrameFound : Error { using Error::Error; };      // no group point aligns the two labelings
struct TowerTooShort : Error { using Error::Error; };     // need at least two field levels

// Raised when a property the mathematics guarantees fails to hold; always a
// bug in this library (or a caller-constructed datum violating its contract),
// never a data-dependent condition.
struct InternalInconsistency : Error { using Error::Error; };

// --- utilities ---------------------------------------------------------------

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), classes_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];  // path halving
      a = parent_[a];
    }
    return a;
  }

  // Returns true when the call actually merged two classes.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);  // keep the smaller index as the root
    parent_[b] = a;
    --classes_;
    return true;
  }

  bool same(std::size_t a, std::size_t b) { return find(a) == find(b); }
  std::size_t classes() const { return classes_; }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::size_t classes_;
};

// p-adic valuation of a positive integer.
inline int val_p(long long x, int p) {
  if (x <= 0) throw InternalInconsistency("val_p of a non-positive integer");
  int v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

}  // namespace zipstrata
