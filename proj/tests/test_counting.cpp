#include <cmath>

#include "doctest.h"
#include "latscope/counting.hpp"
#include "latscope/errors.hpp"
#include "latscope/spectral.hpp"
#include "test_util.hpp"

using namespace latscope;

namespace {
const double kBump = 1e-9 * std::sqrt(2.0);
}

TEST_CASE("doubling profile matches hand counts and flags the cap") {
  Mat A = 2.0 * Mat::Identity(2, 2);
  auto p = count_profile(make_dilation(A), make_lattice(Mat::Identity(2, 2)),
                         1.5, -8, 12, 2);
  REQUIRE(p.rows.size() == 21);

  long long expect[] = {1, 1, 1, 1, 1, 1, 1, 1,  // j = -8..-1, radius < 1
                        9, 25, 109, 437, 1789, 7209, 28913,
                        115777, 463185, 1852921, 7411885};
  for (int i = 0; i < 19; ++i) {
    CHECK(p.rows[i].count == expect[i]);
    CHECK_FALSE(p.rows[i].overflow);
    CHECK_FALSE(p.rows[i].skipped);
  }
  // beyond j=10 the expected count tops 10^7
  for (int i = 19; i < 21; ++i) {
    CHECK(p.rows[i].overflow);
    CHECK(p.rows[i].count == 10'000'000);
  }

  CHECK(p.rows[8].ratio == doctest::Approx(9.0));
  CHECK(p.rows[11].ratio == doctest::Approx(437.0 / 64.0));
  CHECK(p.rows[0].ratio == doctest::Approx(1.0));

  Verdict v = lce_verdict(p);
  CHECK(v.trend == Trend::Bounded);
  CHECK(v.sup_ratio == doctest::Approx(9.0));
  CHECK(v.witness_j == 0);
  CHECK(v.window_min == -8);
  CHECK(v.window_max == 12);
  CHECK(v.evidence_only);
}

TEST_CASE("profile rows agree with a direct box scan") {
  Mat A(2, 2);
  A << 2, 1, -1, 1;  // det 3, complex spectrum
  Mat G(2, 2);
  G << 1, 0.3, 0, 0.7;
  auto p = count_profile(make_dilation(A), make_lattice(G), 1.8, -6, 5);
  for (auto& row : p.rows) {
    Mat M = matrix_power(A, -row.j);
    CHECK(row.count == testutil::box_scan_count(G, M, 1.8));
  }
}

TEST_CASE("j=0 row ignores the dilation") {
  Mat G(3, 3);
  G << 1, 0.2, 0, 0, 1.1, 0.4, 0.1, 0, 0.9;
  Lattice L = make_lattice(G);
  Mat A1 = 2.0 * Mat::Identity(3, 3);
  Mat A2(3, 3);
  A2 << 3, 1, 0, 0, 2, 1, 0, 0, 5;
  auto p1 = count_profile(make_dilation(A1), L, 2.5, 0, 0);
  auto p2 = count_profile(make_dilation(A2), L, 2.5, 0, 0);
  CHECK(p1.rows[0].count == p2.rows[0].count);
  CHECK(p1.rows[0].count >= 1);
}

TEST_CASE("engineered shear slope spikes near j = -150") {
  auto [A, L] = shear_counterexample(1.0 - 1.0 / 150.0 + kBump);
  CHECK(classify_dilation(A) == DilationClass::NotExpandingOnSubspace);
  CHECK(predict_lce(A) == LcePrediction::LatticeDependent);

  auto p = count_profile(A, L, 2.0, -200, 0, 4);
  auto at = [&](long long j) { return p.rows[size_t(j + 200)]; };
  CHECK(at(0).count == 27);
  CHECK(at(-1).count == 11);
  CHECK(at(-150).count == 601);
  CHECK(at(-151).count == 425);
  CHECK(at(-149).count == 425);
  CHECK(at(-152).count == 269);

  Verdict v = lce_verdict(p);
  CHECK(v.trend == Trend::GrowingNegSide);
  CHECK(v.sup_ratio == doctest::Approx(601.0));
  CHECK(v.witness_j == -150);
}

TEST_CASE("golden slope stays below the growth rule on [-500,0]") {
  double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto [A, L] = shear_counterexample(phi);
  auto p = count_profile(A, L, 2.0, -500, 0, 4);
  auto at = [&](long long j) { return p.rows[size_t(j + 500)]; };
  CHECK(at(-144).count == 65);
  CHECK(at(-143).count == 63);
  CHECK(at(-377).count == 47);

  long long best = 0, bestj = 0;
  for (auto& row : p.rows)
    if (row.count > best) {
      best = row.count;
      bestj = row.j;
    }
  CHECK(best == 65);
  CHECK(bestj == -144);

  // The true sup over all j is infinite for irrational slopes, but the
  // record counts grow like sqrt(|j|), far below the quartile rule on this
  // window. The verdict is explicitly finite-window evidence.
  Verdict v = lce_verdict(p);
  CHECK(v.trend == Trend::Bounded);
  CHECK(v.evidence_only);
}

TEST_CASE("rotation pair: counts are rotation-angle independent") {
  double alpha = 1.0 - 1.0 / 20.0 + kBump;
  auto [A7, L7] = rotation_counterexample(0.7, alpha);
  CHECK(A7.n() == 5);
  CHECK(A7.det_abs == doctest::Approx(2.0));
  CHECK(classify_dilation(A7) == DilationClass::NotExpandingOnSubspace);

  auto p7 = count_profile(A7, L7, 1.2, -30, 0, 4);
  auto at = [&](const CountProfile& p, long long j) {
    return p.rows[size_t(j + 30)];
  };
  CHECK(at(p7, 0).count == 11);
  CHECK(at(p7, -20).count == 1793);
  CHECK(at(p7, -21).count == 889);

  for (double theta : {0.0, 1.0}) {
    auto [At, Lt] = rotation_counterexample(theta, alpha);
    auto pt = count_profile(At, Lt, 1.2, -30, 0, 4);
    for (size_t i = 0; i < p7.rows.size(); ++i)
      CHECK(pt.rows[i].count == p7.rows[i].count);
  }

  Verdict v = lce_verdict(p7);
  CHECK(v.trend == Trend::GrowingNegSide);
  CHECK(v.witness_j == -20);
}

TEST_CASE("rotation pair rows agree with a direct box scan") {
  auto [A, L] = rotation_counterexample(0.7, 0.37);
  auto p = count_profile(A, L, 1.2, -4, 2);
  for (auto& row : p.rows) {
    Mat M = matrix_power(A.A, -row.j);
    CHECK(row.count == testutil::box_scan_count(L.basis, M, 1.2));
  }
}

TEST_CASE("theta = 0 degenerates to two axis-aligned shear planes") {
  auto [A, L] = rotation_counterexample(0.0, 0.41);
  Mat G(5, 5);
  G << 0, 1, 0, 0, 0,
       0, 0, 0, 1, 0,
       1, 0.41, 0, 0, 0,
       0, 0, 1, 0.41, 0,
       0, 0, 0, 0, 1;
  CHECK((L.basis - G).cwiseAbs().maxCoeff() < 1e-15);
  Mat J = Mat::Identity(5, 5);
  J(0, 2) = 1;
  J(1, 3) = 1;
  J(4, 4) = 2;
  CHECK((A.A - J).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("worker count does not change the profile") {
  double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto [A, L] = shear_counterexample(phi);
  auto base = count_profile(A, L, 2.0, -60, 0, 1);
  for (int threads : {2, 5, 8}) {
    auto p = count_profile(A, L, 2.0, -60, 0, threads);
    REQUIRE(p.rows.size() == base.rows.size());
    for (size_t i = 0; i < p.rows.size(); ++i) {
      CHECK(p.rows[i].count == base.rows[i].count);
      CHECK(p.rows[i].ratio == base.rows[i].ratio);
      CHECK(p.rows[i].tier == base.rows[i].tier);
    }
  }
}

TEST_CASE("rows beyond the precision guard are skipped, not wrong") {
  double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto [A, L] = shear_counterexample(phi);
  auto p = count_profile(A, L, 2.0, -2000, -1995, 1);
  for (auto& row : p.rows) {
    CHECK(row.skipped);
    CHECK_FALSE(row.note.empty());
  }
  CHECK_THROWS_AS(lce_verdict(p), WindowTooSmall);
}

TEST_CASE("verdict needs at least one side with 8 usable rows") {
  Mat A = 2.0 * Mat::Identity(2, 2);
  Lattice L = make_lattice(Mat::Identity(2, 2));
  auto narrow = count_profile(make_dilation(A), L, 1.5, -3, 3);
  CHECK_THROWS_AS(lce_verdict(narrow), WindowTooSmall);
  auto oneside = count_profile(make_dilation(A), L, 1.5, -20, 3);
  CHECK(lce_verdict(oneside).trend == Trend::Bounded);
}

TEST_CASE("profile input validation") {
  Lattice L2 = make_lattice(Mat::Identity(2, 2));
  Mat A1 = Mat::Identity(2, 2);  // det 1
  CHECK_THROWS_AS(count_profile(make_dilation(A1), L2, 1.0, -2, 2), Error);
  Mat A3 = 2.0 * Mat::Identity(3, 3);
  CHECK_THROWS_AS(count_profile(make_dilation(A3), L2, 1.0, -2, 2), Error);
  Mat A2 = 2.0 * Mat::Identity(2, 2);
  CHECK_THROWS_AS(count_profile(make_dilation(A2), L2, -1.0, -2, 2), Error);
  CHECK_THROWS_AS(count_profile(make_dilation(A2), L2, 1.0, 3, 2), Error);
  CHECK_THROWS_AS(predict_lce(make_dilation(A1)), Error);
}

TEST_CASE("volume sandwich on the integer lattice") {
  Lattice L = make_lattice(Mat::Identity(2, 2));
  auto rep = volume_packing_check(L, Mat::Identity(2, 2), 1.5);
  CHECK(rep.count == 9);
  CHECK(rep.spanning);
  CHECK(rep.lower_bound == doctest::Approx(M_PI * 2.25 / 4.0));
  CHECK(rep.lower_bound <= double(rep.count));
  CHECK(double(rep.count) <= rep.upper_bound);

  auto tiny = volume_packing_check(L, Mat::Identity(2, 2), 0.4);
  CHECK(tiny.count == 1);
  CHECK_FALSE(tiny.spanning);
  CHECK(tiny.lower_bound <= 1.0);
}

TEST_CASE("volume sandwich sweep over random instances") {
  Philox g(4242, 0);
  int spanning_seen = 0;
  for (int it = 0; it < 250; ++it) {
    int n = 2 + int(g.next_u32() % 2);
    Mat G = testutil::random_well_conditioned_basis(g, n);
    Mat M = testutil::random_well_conditioned_basis(g, n);
    double r = 0.5 + 2.5 * g.uniform01();
    Lattice L = make_lattice(G);
    PackingReport rep;
    try {
      rep = volume_packing_check(L, M, r);
    } catch (const Overflow&) {
      continue;
    }
    CHECK(rep.count >= 1);
    CHECK(rep.lower_bound <= double(rep.count) * (1 + 1e-12));
    if (rep.spanning) {
      ++spanning_seen;
      CHECK(double(rep.count) <= rep.upper_bound * (1 + 1e-12));
    }
  }
  CHECK(spanning_seen > 50);
}

TEST_CASE("expansion prediction by spectrum") {
  Mat E(2, 2);
  E << 2, 1, 0, 3;
  CHECK(predict_lce(make_dilation(E)) == LcePrediction::HoldsForAllLattices);
  Mat P(2, 2);
  P << 2, 0, 0, 1;  // expands only on a subspace, still safe
  CHECK(predict_lce(make_dilation(P)) == LcePrediction::HoldsForAllLattices);
  auto [S, L] = shear_counterexample(0.5);
  (void)L;
  CHECK(predict_lce(S) == LcePrediction::LatticeDependent);
}
