#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "zipstrata/finitezip.hpp"

using namespace zipstrata;

namespace {

Mat mk(int n, std::initializer_list<int> vals) {
  Mat a;
  a.n = n;
  int i = 0;
  for (int v : vals) a.e[i++] = static_cast<std::uint16_t>(v);
  return a;
}

std::multiset<long long> size_multiset(const OrbitTable& orbits) {
  return {orbits.sizes.begin(), orbits.sizes.end()};
}

using PairKey = std::pair<std::uint64_t, std::uint64_t>;

PairKey pair_key(const FiniteField& F, const std::pair<Mat, Mat>& z) {
  return {mat_key(F, z.first), mat_key(F, z.second)};
}

struct BatteryCounts {
  std::size_t D, Px, Qx, RuQx, EZ, UcapV;
};

// Structural checks of the two section maps over one alignment point:
// the downstairs map e lands onto the smaller zip set EZ, its section f
// splits it, and its kernel consists exactly of the transported unipotents.
void check_battery(const FiniteZipInstance& inst, const WeylElt& x, const BatteryCounts* want) {
  const FiniteField& F = inst.F;
  const SectionSets s = section_sets(inst, x);
  if (want) {
    CHECK(s.D.size() == want->D);
    CHECK(s.Px.size() == want->Px);
    CHECK(s.Qx.size() == want->Qx);
    CHECK(s.RuQx.size() == want->RuQx);
    CHECK(s.EZ.size() == want->EZ);
    CHECK(s.UcapV.size() == want->UcapV);
  }
  CHECK(s.D.size() == s.EZ.size() * s.UcapV.size());

  std::set<PairKey> ez_keys;
  for (const auto& z : s.EZ) ez_keys.insert(pair_key(F, z));
  CHECK(ez_keys.size() == s.EZ.size());
  std::set<std::uint64_t> d_keys;
  for (const Mat& pmat : s.D) d_keys.insert(mat_key(F, pmat));

  // e maps the intersection group onto EZ.
  const Mat I = mat_id(inst.n);
  std::set<PairKey> image;
  std::size_t kernel = 0;
  for (const Mat& pmat : s.D) {
    const auto z = e_x_map(inst, x, pmat);
    CHECK(ez_keys.count(pair_key(F, z)) == 1);
    image.insert(pair_key(F, z));
    if (z.first == I && z.second == I) ++kernel;
  }
  CHECK(image.size() == ez_keys.size());
  CHECK(kernel == s.UcapV.size());
  for (const Mat& u : s.UcapV) {
    CHECK(d_keys.count(mat_key(F, u)) == 1);
    const auto z = e_x_map(inst, x, u);
    CHECK(z.first == I);
    CHECK(z.second == I);
  }

  // f is a genuine section: it lands in the intersection and e undoes it.
  for (const auto& z : s.EZ) {
    const Mat pmat = f_x_section(inst, x, z);
    CHECK(d_keys.count(mat_key(F, pmat)) == 1);
    const auto back = e_x_map(inst, x, pmat);
    CHECK(back.first == z.first);
    CHECK(back.second == z.second);
  }
}

}  // namespace

TEST_CASE("field arithmetic satisfies the axioms", "[finitezip]") {
  const std::pair<int, int> shapes[] = {{2, 1}, {2, 2}, {2, 3}, {3, 2}, {5, 1}};
  for (const auto& [p, m] : shapes) {
    INFO("p=" << p << " m=" << m);
    const FiniteField F(p, m);
    long long q = 1;
    for (int i = 0; i < m; ++i) q *= p;
    REQUIRE(F.q == q);
    for (int a = 0; a < F.q; ++a) {
      CHECK(F.add(a, 0) == a);
      CHECK(F.mul(a, 1) == a);
      CHECK(F.mul(a, 0) == 0);
      CHECK(F.add(a, F.neg(a)) == 0);
      if (a != 0) CHECK(F.mul(a, F.inv(a)) == 1);
      CHECK(F.frob_iter(a, F.m) == a);  // Frobenius has order m
      for (int b = 0; b < F.q; ++b) {
        CHECK(F.add(a, b) == F.add(b, a));
        CHECK(F.mul(a, b) == F.mul(b, a));
        CHECK(F.frob(F.add(a, b)) == F.add(F.frob(a), F.frob(b)));
        CHECK(F.frob(F.mul(a, b)) == F.mul(F.frob(a), F.frob(b)));
        for (int c = 0; c < F.q; ++c) {
          CHECK(F.add(F.add(a, b), c) == F.add(a, F.add(b, c)));
          CHECK(F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c)));
          CHECK(F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c)));
        }
      }
    }
    // The prime subfield occupies the codes below p with mod-p arithmetic,
    // so base-level matrices embed into every higher level unchanged.
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) {
        CHECK(F.add(a, b) == (a + b) % p);
        CHECK(F.mul(a, b) == (a * b) % p);
        CHECK(F.frob(a) == a);
      }
  }
  CHECK_THROWS_AS(FiniteField(4, 1), InvalidShape);
  CHECK_THROWS_AS(FiniteField(33, 1), InvalidShape);
  CHECK_THROWS_AS(FiniteField(2, 11), TooLarge);
  CHECK_THROWS_AS(FiniteField(1031, 1), TooLarge);
}

TEST_CASE("matrix helpers round-trip", "[finitezip]") {
  const FiniteField F(2, 2);
  const Mat a = mk(2, {1, 2, 3, 0});  // determinant 2 * 3 = 1, invertible
  const auto ai = mat_inv(F, a);
  REQUIRE(ai.has_value());
  CHECK(mat_mul(F, a, *ai) == mat_id(2));
  CHECK(mat_mul(F, *ai, a) == mat_id(2));
  CHECK(mat_frob_iter(F, a, F.m) == a);
  // A visibly singular matrix: second row equals the first.
  const Mat rep = mk(2, {1, 2, 1, 2});
  CHECK_FALSE(mat_inv(F, rep).has_value());
}

TEST_CASE("general linear orders", "[finitezip]") {
  CHECK(gl_order(0, 2) == 1);
  CHECK(gl_order(1, 2) == 1);
  CHECK(gl_order(2, 2) == 6);
  CHECK(gl_order(3, 2) == 168);
  CHECK(gl_order(2, 3) == 48);
  CHECK(gl_order(2, 4) == 180);
  CHECK(gl_order(4, 2) == 20160);
  CHECK_THROWS_AS(gl_order(5, 1024), TooLarge);
}

TEST_CASE("instance enumeration matches closed-form orders", "[finitezip]") {
  {
    const FiniteZipInstance inst = build_instance(2, 1, 2, 1);
    CHECK(inst.g_order == 6);
    CHECK(inst.u_order == 2);
    CHECK(inst.l_order == 1);
    CHECK(inst.p_order == 2);
    CHECK(inst.e_order == 4);
    CHECK(inst.G_points.size() == 6);
    CHECK(inst.E_points.size() == 4);
    CHECK(inst.dim_P() == 3);
    CHECK(inst.dim_U() == 1);
  }
  {
    const FiniteZipInstance inst = build_instance(2, 1, 2, 2);
    CHECK(inst.g_order == 180);
    CHECK(inst.l_order == 9);
    CHECK(inst.u_order == 4);
    CHECK(inst.e_order == 144);
  }
  {
    const FiniteZipInstance inst = build_instance(3, 1, 2, 1);
    CHECK(inst.g_order == 168);
    CHECK(inst.l_order == 6);
    CHECK(inst.u_order == 4);
    CHECK(inst.p_order == 24);
    CHECK(inst.e_order == 96);
    CHECK(inst.dim_P() == 7);
    // Every parabolic point splits as unipotent times Levi.
    for (const Mat& pmat : inst.P_points) {
      const auto [u, l] = inst.split_P(pmat);
      CHECK(inst.in_U(u));
      CHECK(inst.in_L(l));
      CHECK(mat_mul(inst.F, u, l) == pmat);
      CHECK(inst.levi_part(pmat) == l);
    }
  }
  {
    const FiniteZipInstance inst = build_instance(2, 1, 3, 1);
    CHECK(inst.g_order == 48);
    CHECK(inst.u_order == 3);
    CHECK(inst.l_order == 4);
    CHECK(inst.e_order == 36);
  }
  CHECK_THROWS_AS(build_instance(6, 1, 2, 1), InvalidShape);
  CHECK_THROWS_AS(build_instance(2, 3, 2, 1), InvalidShape);
  CHECK_THROWS_AS(build_instance(0, 0, 2, 1), InvalidShape);
  CHECK_THROWS_AS(build_instance(3, 1, 5, 2), TooLarge);
  CHECK_THROWS_AS(build_instance(4, 2, 2, 2), TooLarge);
}

TEST_CASE("degenerate shape with an empty block", "[finitezip]") {
  const FiniteZipInstance inst = build_instance(2, 0, 2, 1);
  CHECK(inst.u_order == 1);
  CHECK(inst.p_order == inst.g_order);
  CHECK(inst.dim_P() == 4);  // the full group
  // With trivial unipotents at the base level the moves are plain
  // conjugation, so orbits are the three conjugacy classes.
  const OrbitTable orbits = zip_orbits(inst);
  CHECK(orbits.sizes.size() == 3);
  CHECK(size_multiset(orbits) == std::multiset<long long>{1, 2, 3});
}

TEST_CASE("the action set is a group", "[finitezip]") {
  const FiniteZipInstance inst = build_instance(2, 1, 2, 1);
  const FiniteField& F = inst.F;
  std::set<PairKey> keys;
  for (const auto& z : inst.E_points) keys.insert(pair_key(F, z));
  REQUIRE(keys.size() == inst.E_points.size());
  CHECK(keys.count({mat_key(F, mat_id(2)), mat_key(F, mat_id(2))}) == 1);
  for (const auto& a : inst.E_points) {
    CHECK(keys.count(pair_key(F, {*mat_inv(F, a.first), *mat_inv(F, a.second)})) == 1);
    for (const auto& b : inst.E_points)
      CHECK(keys.count(pair_key(F, {mat_mul(F, a.first, b.first),
                                    mat_mul(F, a.second, b.second)})) == 1);
  }
}

TEST_CASE("orbit partitions at the base of each tower", "[finitezip]") {
  {
    const FiniteZipInstance inst = build_instance(2, 1, 2, 1);
    const OrbitTable orbits = zip_orbits(inst);
    CHECK(size_multiset(orbits) == std::multiset<long long>{2, 4});
  }
  {
    const FiniteZipInstance inst = build_instance(2, 1, 3, 1);
    const OrbitTable orbits = zip_orbits(inst);
    CHECK(size_multiset(orbits) == std::multiset<long long>{6, 6, 9, 9, 9, 9});
  }
  for (int d : {1, 2}) {
    INFO("d=" << d);
    const FiniteZipInstance inst = build_instance(3, d, 2, 1);
    const OrbitTable orbits = zip_orbits(inst);
    CHECK(size_multiset(orbits) == std::multiset<long long>{16, 24, 32, 48, 48});
    long long total = 0;
    for (long long s : orbits.sizes) total += s;
    CHECK(total == inst.g_order);
    // Orbit sizes divide the action group order, quotient = stabilizer order.
    const ScanLevel level(3, d, 2, 1);
    for (std::size_t c = 0; c < orbits.sizes.size(); ++c) {
      CHECK(level.order_E() % orbits.sizes[c] == 0);
      CHECK(level.stab_order(inst.G_points[orbits.rep_index[c]]) ==
            level.order_E() / orbits.sizes[c]);
    }
    // Labels ascend with their least member.
    for (std::size_t c = 1; c < orbits.rep_index.size(); ++c)
      CHECK(orbits.rep_index[c - 1] < orbits.rep_index[c]);
  }
}

TEST_CASE("orbit towers reach the frozen counts", "[finitezip]") {
  {
    const TowerReport tower = geometric_orbit_count(2, 1, 2, 4);
    CHECK(tower.counts == std::vector<long long>{2, 2, 2, 2});
    CHECK(tower.stabilized);
    CHECK(tower.geometric_count == 2);
  }
  {
    const TowerReport tower = geometric_orbit_count(2, 1, 3, 5);
    CHECK(tower.counts == std::vector<long long>{6, 3, 3, 2, 2});
    CHECK(tower.stabilized);
    CHECK(tower.geometric_count == 2);
  }
  // The two three-by-three shapes truncated below their settling height:
  // the merged count is already correct, but the tail has not gone flat, so
  // matching refuses to run.
  const WeylGroupHandle A2 = WeylGroup::build(cartan_series("A2"));
  for (int d : {1, 2}) {
    INFO("d=" << d);
    const TowerReport tower = geometric_orbit_count(3, d, 2, 3);
    CHECK(tower.counts == std::vector<long long>{5, 4, 3});
    CHECK_FALSE(tower.stabilized);
    CHECK(tower.geometric_count == 3);
    const CosetTable jw = min_coset_reps(*A2, shape_type_J(3, d));
    CHECK_THROWS_AS(match_representatives(tower, jw), NonStabilized);
  }
}

TEST_CASE("frame matching aligns strata with orbit classes", "[finitezip]") {
  const TowerReport tower = geometric_orbit_count(2, 1, 2, 4);
  const WeylGroupHandle A1 = WeylGroup::build(cartan_series("A1"));
  CHECK(shape_type_J(2, 1).empty());
  const CosetTable jw = min_coset_reps(*A1, shape_type_J(2, 1));
  REQUIRE(jw.reps.size() == 2);

  const MatchResult match = match_representatives(tower, jw);
  CHECK(match.frame == mk(2, {0, 1, 1, 0}));
  CHECK(match.stratum_class.size() == 2);
  CHECK(match.stratum_class[0] != match.stratum_class[1]);

  for (int i = 0; i < 2; ++i) {
    const DimEstimate est = dimension_estimate(tower, match.translates[i], 3 + i);
    CHECK(est.within_tolerance);
    CHECK(est.padic == 3.0 + i);
  }
  // The plain logarithmic ratio misses the closed stratum by more than the
  // tolerance; it is reported but never trusted.
  const DimEstimate closed = dimension_estimate(tower, match.translates[0], 3);
  CHECK(closed.size_1 == 2);
  CHECK(closed.size_2 == 12);
  CHECK(std::abs(closed.naive - closed.expected) > DimEstimate::tolerance);

  // Stabilizer orders along the tower and their growth exponents.
  const StabReport stab_e = stabilizer_points(tower, match.translates[0], 0);
  CHECK(stab_e.orders == std::vector<long long>{2, 12, 8, 48});
  CHECK(stab_e.growth_exponent == 1.0);
  CHECK(stab_e.expected_exponent == 1);
  const StabReport stab_s = stabilizer_points(tower, match.translates[1], 1);
  CHECK(stab_s.orders == std::vector<long long>{1, 1, 1, 1});
  CHECK(stab_s.growth_exponent == 0.0);
  CHECK(stab_s.expected_exponent == 0);

  // Error precedence when the tower cannot support matching.
  const TowerReport flat = geometric_orbit_count(2, 1, 2, 1);
  CHECK_THROWS_AS(match_representatives(flat, jw), TowerTooShort);
  CHECK_THROWS_AS(dimension_estimate(flat, tower.base->G_points[1], 3), TowerTooShort);
  CHECK_THROWS_AS(stabilizer_points(flat, tower.base->G_points[1], 0), TowerTooShort);
  // A stratum list of the wrong size can never be aligned.
  const CosetTable wrong = min_coset_reps(*A1, {0});
  CHECK_THROWS_AS(match_representatives(tower, wrong), NoFrameFound);
}

TEST_CASE("frame matching over the larger prime", "[finitezip]") {
  const TowerReport tower = geometric_orbit_count(2, 1, 3, 5);
  const WeylGroupHandle A1 = WeylGroup::build(cartan_series("A1"));
  const CosetTable jw = min_coset_reps(*A1, shape_type_J(2, 1));
  const MatchResult match = match_representatives(tower, jw);
  CHECK(match.frame == mk(2, {0, 1, 1, 0}));
  for (int i = 0; i < 2; ++i) {
    const DimEstimate est = dimension_estimate(tower, match.translates[i], 3 + i);
    CHECK(est.within_tolerance);
  }
}

TEST_CASE("permutation lifts", "[finitezip]") {
  const WeylGroupHandle A2 = WeylGroup::build(cartan_series("A2"));
  const FiniteField F(2, 1);
  CHECK(one_line_permutation(A2->identity(), 3) == std::vector<int>{0, 1, 2});
  CHECK(one_line_permutation(A2->simple(0), 3) == std::vector<int>{1, 0, 2});
  CHECK(one_line_permutation(A2->simple(1), 3) == std::vector<int>{0, 2, 1});
  CHECK(weyl_lift(F, A2->identity(), 3) == mat_id(3));
  // The letter-by-letter value swaps compose contravariantly.
  for (std::size_t i = 0; i < A2->order; ++i)
    for (std::size_t j = 0; j < A2->order; ++j) {
      const WeylElt u = A2->element(static_cast<int>(i));
      const WeylElt v = A2->element(static_cast<int>(j));
      const auto pu = one_line_permutation(u, 3);
      const auto pv = one_line_permutation(v, 3);
      const auto puv = one_line_permutation(compose(u, v), 3);
      for (int b = 0; b < 3; ++b) CHECK(puv[b] == pv[pu[b]]);
    }
  // Lifting demands a chain diagram of matching rank.
  const WeylGroupHandle C2 = WeylGroup::build(cartan_series("C2"));
  CHECK_THROWS_AS(one_line_permutation(C2->simple(0), 3), InvalidShape);
  CHECK_THROWS_AS(one_line_permutation(A2->simple(0), 4), InvalidShape);
}

TEST_CASE("type sets per block shape", "[finitezip]") {
  CHECK(shape_type_J(2, 1) == std::vector<int>{});
  CHECK(shape_type_J(3, 1) == std::vector<int>{0});
  CHECK(shape_type_J(3, 2) == std::vector<int>{1});
  CHECK(shape_type_J(4, 2) == std::vector<int>{0, 2});
  CHECK(shape_type_J(5, 2) == std::vector<int>{0, 1, 3});
}

TEST_CASE("section maps over the two-by-two shape", "[finitezip]") {
  const WeylGroupHandle A1 = WeylGroup::build(cartan_series("A1"));
  const DoubleCosetTable dmr = min_double_coset_reps(*A1, {}, {});
  REQUIRE(dmr.reps.size() == 2);
  const BatteryCounts base_e = {2, 1, 1, 1, 1, 2};
  const BatteryCounts base_s = {1, 1, 1, 1, 1, 1};
  const BatteryCounts ext_e = {36, 9, 9, 1, 9, 4};
  const BatteryCounts ext_s = {9, 9, 9, 1, 9, 1};
  for (int m = 1; m <= 2; ++m) {
    INFO("m=" << m);
    FiniteZipInstance inst = build_instance(2, 1, 2, m);
    inst.frame = mk(2, {0, 1, 1, 0});
    check_battery(inst, dmr.reps[0], m == 1 ? &base_e : &ext_e);
    check_battery(inst, dmr.reps[1], m == 1 ? &base_s : &ext_s);
    // Off the intersection the maps refuse to evaluate.
    CHECK_THROWS_AS(e_x_map(inst, dmr.reps[0], inst.V_points[1]), NotInIntersection);
  }
  FiniteZipInstance bare = build_instance(2, 1, 2, 1);
  CHECK_THROWS_AS(frame_translate(bare, A1->identity()), std::logic_error);
}

TEST_CASE("section maps over the three-by-three shapes", "[finitezip]") {
  const WeylGroupHandle A2 = WeylGroup::build(cartan_series("A2"));
  const BatteryCounts closed_1 = {8, 2, 2, 2, 4, 2};
  const BatteryCounts closed_2 = {1728, 108, 108, 4, 432, 4};
  const BatteryCounts open_1 = {6, 6, 6, 1, 6, 1};
  const BatteryCounts open_2 = {540, 540, 540, 1, 540, 1};
  for (int d : {1, 2}) {
    INFO("d=" << d);
    const std::vector<int> J = shape_type_J(3, d);
    std::vector<int> K;
    for (int j : J) K.push_back(opposition(*A2, j));
    const DoubleCosetTable dmr = min_double_coset_reps(*A2, J, K);
    REQUIRE(dmr.reps.size() == 2);
    CHECK(length(dmr.reps[0]) == 0);
    CHECK(length(dmr.reps[1]) == 2);
    const Mat frame = d == 1 ? mk(3, {0, 1, 0, 0, 0, 1, 1, 0, 0})
                             : mk(3, {0, 0, 1, 1, 0, 0, 0, 1, 0});
    for (int m = 1; m <= 2; ++m) {
      INFO("m=" << m);
      FiniteZipInstance inst = build_instance(3, d, 2, m);
      inst.frame = frame;
      check_battery(inst, dmr.reps[0], m == 1 ? &closed_1 : &closed_2);
      check_battery(inst, dmr.reps[1], m == 1 ? &open_1 : &open_2);
    }
  }
}

TEST_CASE("twisted translation fibers are constant", "[finitezip]") {
  {
    const FiniteZipInstance inst = build_instance(2, 1, 2, 2);
    const LangReport report = lang_fiber_check(inst, mat_id(2));
    CHECK(report.fibers_constant);
    CHECK(report.fiber_size == 6);
    CHECK(report.image_size == 30);
    CHECK(report.twisted_fixed_order == 6);
    CHECK(report.product_identity);
    CHECK(fixed_points(inst).size() == 6);
    // Any base point gives constant fibers whose size is the order of the
    // twisted fixed subgroup; the untwisted counts are specific to points
    // that commute with their own translate.
    for (const Mat& x0 : inst.G_points) {
      const LangReport twisted = lang_fiber_check(inst, x0);
      CHECK(twisted.fibers_constant);
      CHECK(twisted.fiber_size == twisted.twisted_fixed_order);
      CHECK(twisted.product_identity);
    }
  }
  {
    const FiniteZipInstance inst = build_instance(2, 1, 2, 3);
    const LangReport report = lang_fiber_check(inst, mat_id(2));
    CHECK(report.fibers_constant);
    CHECK(report.fiber_size == 6);
    CHECK(report.image_size == 588);
    CHECK(report.twisted_fixed_order == 6);
    CHECK(report.product_identity);
    CHECK(fixed_points(inst).size() == 6);
  }
}
