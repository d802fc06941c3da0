// Acceptance battery: one line per criterion, measured values inline.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "latscope/counting.hpp"
#include "latscope/dioph.hpp"
#include "latscope/errors.hpp"
#include "latscope/json_io.hpp"
#include "latscope/lattice.hpp"
#include "latscope/region.hpp"
#include "latscope/rng.hpp"
#include "latscope/spectral.hpp"
#include "latscope/wavelet.hpp"
#include "test_util.hpp"

using namespace latscope;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Mat diag2(double a, double b) {
  Mat M(2, 2);
  M << a, 0, 0, b;
  return M;
}

Mat diag3(double a, double b, double c) {
  Mat M(3, 3);
  M << a, 0, 0, 0, b, 0, 0, 0, c;
  return M;
}

Lattice Zn(int n) { return make_lattice(Mat::Identity(n, n)); }

// 1: library counts against the coefficient-box brute force
Outcome enumeration_vs_box_scan() {
  std::vector<Dilation> pool2 = {make_dilation(diag2(2, 3))};
  {
    Mat R(2, 2);
    R << 1, 1, -1, 1;
    pool2.push_back(make_dilation(R));
    Mat T(2, 2);
    T << 2, 1, 0, 3;
    pool2.push_back(make_dilation(T));
  }
  std::vector<Dilation> pool3 = {make_dilation(diag3(2, 3, 2))};
  {
    Mat S(3, 3);
    S << 1, 1, 0, 0, 1, 0, 0, 0, 2;
    pool3.push_back(make_dilation(S));
    Mat R(3, 3);
    R << 1, 1, 0, -1, 1, 0, 0, 0, 3;
    pool3.push_back(make_dilation(R));
  }
  int done = 0, mismatches = 0;
  for (int i = 0; i < 210; ++i) {
    Philox g = substream(1001, (std::uint64_t)i);
    const int n = 2 + (i % 2);
    const Dilation& A = n == 2 ? pool2[i % 3] : pool3[i % 3];
    Mat G = testutil::random_well_conditioned_basis(g, n);
    Lattice L = make_lattice(G);
    long long j = (long long)(g.uniform01() * 13) - 6;
    double r = 0.5 + 3.5 * g.uniform01();
    long long want;
    for (;;) {
      try {
        // tight cell cap keeps the oracle honest and the battery fast;
        // r halves until the coefficient box fits
        want = testutil::box_scan_count(G, matrix_power(A.A, -j), r,
                                        2'000'000);
        break;
      } catch (const std::runtime_error&) {
        r *= 0.5;
      }
    }
    long long got = count_in_dilated_ball(L, A, j, r);
    if (got != want) ++mismatches;
    ++done;
  }
  Outcome o;
  o.pass = done >= 200 && mismatches == 0;
  std::ostringstream ss;
  ss << done << " instances, " << mismatches << " mismatches";
  o.detail = ss.str();
  return o;
}

// 2: hand-derived spectral classes
Outcome classification_battery() {
  using C = DilationClass;
  std::vector<std::pair<Mat, C>> cases;
  cases.push_back({diag2(2, 3), C::Expanding});
  cases.push_back({Mat(Mat::Identity(2, 2) * 2), C::Expanding});
  {
    Mat R(2, 2);
    R << 1, 1, -1, 1;
    cases.push_back({R, C::Expanding});
  }
  {
    Mat one(1, 1);
    one << 3;
    cases.push_back({one, C::Expanding});
  }
  cases.push_back({diag2(1, 2), C::ExpandingOnSubspace});
  cases.push_back({diag3(1, 1, 3), C::ExpandingOnSubspace});
  {
    Mat R(3, 3);
    double c = std::cos(0.7), s = std::sin(0.7);
    R << c, -s, 0, s, c, 0, 0, 0, 2;
    cases.push_back({R, C::ExpandingOnSubspace});
  }
  {
    Mat S(3, 3);
    S << 1, 1, 0, 0, 1, 0, 0, 0, 2;
    cases.push_back({S, C::NotExpandingOnSubspace});
  }
  cases.push_back(
      {rotation_counterexample(1.0, 0.61).first.A, C::NotExpandingOnSubspace});
  {
    Mat S(2, 2);
    S << 1, 1, 0, 1;
    cases.push_back({S, C::NotExpandingOnSubspace});
  }
  cases.push_back({diag2(0.5, 2), C::NotExpandingOnSubspace});
  {
    Mat P(2, 2);
    P << 0, 1, 1, 0;
    cases.push_back({P, C::NotExpandingOnSubspace});
  }
  int wrong = 0;
  for (const auto& [M, want] : cases)
    if (classify_dilation(M, 1e-9) != want) ++wrong;
  Outcome o;
  o.pass = cases.size() >= 12 && wrong == 0;
  std::ostringstream ss;
  ss << cases.size() << " matrices, " << wrong << " misclassified";
  o.detail = ss.str();
  return o;
}

// 3: expanding dilations keep integer counts flat over a symmetric window
Outcome expanding_count_boundedness() {
  std::vector<Mat> As = {Mat(Mat::Identity(2, 2) * 2), diag2(2, 3)};
  {
    Mat R(2, 2);
    R << 1, 1, -1, 1;
    As.push_back(R);
  }
  Lattice Z2 = Zn(2);
  bool all_ok = true;
  double worst_ratio = 0;
  long long worst_j0 = 0;
  for (const Mat& M : As) {
    Dilation A = make_dilation(M);
    CountProfile p = count_profile(A, Z2, 1.0, -15, 15);
    Verdict v = lce_verdict(p);
    worst_ratio = std::max(worst_ratio, v.sup_ratio);
    long long j0 = 99;
    for (long long t = 0; t <= 15; ++t) {
      bool flat = true;
      for (const auto& row : p.rows)
        if (row.j <= -t && row.count != 1) flat = false;
      if (flat) {
        j0 = t;
        break;
      }
    }
    worst_j0 = std::max(worst_j0, j0);
    if (v.trend != Trend::Bounded || v.sup_ratio > 20.0 || j0 > 5)
      all_ok = false;
  }
  Outcome o;
  o.pass = all_ok;
  std::ostringstream ss;
  ss << "sup ratio " << worst_ratio << ", flat below j0 <= " << worst_j0;
  o.detail = ss.str();
  return o;
}

// 4: deep-window growth thresholds for the golden-slope shear
Outcome deep_window_count_growth() {
  Preset sg = preset("shear-golden");
  CountProfile p =
      count_profile(*sg.dilation, *sg.lattice, 2.0, -500, 0, 8);
  long long c0 = 0, max500 = 0, max250 = 0, arg = 0;
  for (const auto& row : p.rows) {
    if (row.j == 0) c0 = row.count;
    if (row.count > max500) {
      max500 = row.count;
      arg = row.j;
    }
    if (row.j >= -250) max250 = std::max(max250, row.count);
  }
  const bool big = max500 >= 100;
  const bool rel = max500 >= 50 * c0;
  const bool inc = max500 > max250;
  Outcome o;
  o.pass = big && rel && inc;
  std::ostringstream ss;
  ss << "max " << max500 << " at j=" << arg << ", j=0 count " << c0
     << ", window max " << max250 << " -> " << max500 << " (need >=100, >="
     << 50 * c0 << ", strict increase)";
  o.detail = ss.str();
  return o;
}

// 5: coordinate-product minima: integer zero, admissible one, rotated decay
Outcome product_minimum_suite() {
  Lattice Z2 = Zn(2);
  bool int_zero = true;
  for (double rho : {2.0, 10.0, 100.0, 1000.0})
    if (nu(Z2, rho).value != 0.0) int_zero = false;

  Lattice ad = *preset("sqrt2-norm").lattice;
  bool adm_one = true;
  for (double rho : {2.0, 5.0, 10.0, 25.0, 50.0}) {
    double v = nu(ad, rho).value;
    if (std::abs(v - 1.0) > 1e-9) adm_one = false;
    double brute = 1e300;  // independent scan in coefficients
    for (int a = -80; a <= 80; ++a)
      for (int b = -80; b <= 80; ++b) {
        if (a == 0 && b == 0) continue;
        Vec x = (double)a * ad.basis.col(0) + (double)b * ad.basis.col(1);
        if (x.norm() < rho) brute = std::min(brute, std::abs(norm_form(x)));
      }
    if (std::abs(v - brute) > 1e-12) adm_one = false;
  }

  const double rhos[3] = {10, 100, 1000};
  int per_rho[3] = {0, 0, 0};
  int all3 = 0;
  for (int t = 0; t < 100; ++t) {
    Philox g = substream(424242, (std::uint64_t)t);
    Lattice L = make_lattice(haar_rotation(2, g));
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      double bound = std::pow(std::log(rhos[k]), -1.5);
      if (nu(L, rhos[k]).value > bound)
        ++per_rho[k];
      else
        ok = false;
    }
    if (ok) ++all3;
  }
  Outcome o;
  o.pass = int_zero && adm_one && all3 >= 95;
  std::ostringstream ss;
  ss << "integer zero " << (int_zero ? "ok" : "BAD") << ", admissible one "
     << (adm_one ? "ok" : "BAD") << ", rotated above slow-log bound "
     << per_rho[0] << "/" << per_rho[1] << "/" << per_rho[2]
     << " per radius, " << all3 << "/100 all three (need >= 95)";
  o.detail = ss.str();
  return o;
}

// 6: count sandwiched between volume bounds
Outcome volume_packing_bounds() {
  int lower_viol = 0, upper_viol = 0, spanning_count = 0;
  for (int i = 0; i < 500; ++i) {
    Philox g = substream(2002, (std::uint64_t)i);
    const int n = 2 + (i % 2);
    Lattice L = make_lattice(testutil::random_well_conditioned_basis(g, n));
    Mat M = testutil::random_well_conditioned_basis(g, n);
    double r = 0.3 + 2.7 * g.uniform01();
    PackingReport pr = volume_packing_check(L, M, r);
    if ((double)pr.count < pr.lower_bound - 1e-9) ++lower_viol;
    if (pr.spanning) {
      ++spanning_count;
      if ((double)pr.count > pr.upper_bound + 1e-9) ++upper_viol;
    }
  }
  Outcome o;
  o.pass = lower_viol == 0 && upper_viol == 0;
  std::ostringstream ss;
  ss << "500 instances, " << lower_viol << " lower / " << upper_viol
     << " upper violations, " << spanning_count << " spanning";
  o.detail = ss.str();
  return o;
}

// 7: extracted progressions are proper, contained, and carry mass
Outcome progression_extraction() {
  int structural_bad = 0, ratio_ok = 0, verified = 0, resampled = 0;
  for (int i = 0; i < 200; ++i) {
    SymAP ap;
    int n = 0;
    Lattice L;
    Mat M;
    double r = 0;
    bool got = false;
    for (std::uint64_t a = 0; !got && a < 32; ++a) {
      Philox g = substream(3003, (std::uint64_t)i + 100'000 * a);
      n = 2 + (i % 2);
      L = make_lattice(testutil::random_well_conditioned_basis(g, n));
      M = i % 3 == 0 ? testutil::random_well_conditioned_basis(g, n)
                     : Mat(Mat::Identity(n, n));
      r = 1.0 + 4.0 * g.uniform01();
      try {
        ap = arithmetic_progression(L, M, r);
        got = true;
      } catch (const EmptyBody&) {
        ++resampled;  // no nonzero point in the body: nothing to extract
      }
    }
    if (!got) {
      ++structural_bad;
      continue;
    }
    if (ap.rank > n) ++structural_bad;
    long long card = 1;
    for (long long N : ap.bounds) card *= 2 * N + 1;
    if (card != ap.cardinality) ++structural_bad;
    if (ap.achieved_ratio >= 0.05) ++ratio_ok;

    if (ap.cardinality <= 20001 && ap.rank > 0) {
      // walk the coefficient box: distinct, inside the body, on the lattice
      ++verified;
      std::set<std::vector<long long>> seen;
      std::vector<long long> c(ap.rank);
      for (int k = 0; k < ap.rank; ++k) c[k] = -ap.bounds[k];
      bool ok = true;
      for (;;) {
        Vec x = Vec::Zero(n);
        for (int k = 0; k < ap.rank; ++k)
          x += (double)c[k] * ap.generators[k];
        std::vector<long long> key(n);
        for (int k = 0; k < n; ++k) key[k] = std::llround(x(k) * 1048576.0);
        if (!seen.insert(key).second) ok = false;
        if ((M * x).norm() >= r) ok = false;
        if (!is_member(L, x)) ok = false;
        int k = 0;
        while (k < ap.rank && ++c[k] > ap.bounds[k]) {
          c[k] = -ap.bounds[k];
          ++k;
        }
        if (k == ap.rank || !ok) break;
      }
      if (!ok) ++structural_bad;
    }
  }
  Outcome o;
  o.pass = structural_bad == 0 && ratio_ok >= 180;
  std::ostringstream ss;
  ss << ratio_ok << "/200 reach ratio 0.05, " << structural_bad
     << " structural failures, " << verified << " walked in full, "
     << resampled << " empty-body draws redrawn";
  o.detail = ss.str();
  return o;
}

// 8: annuli cover each orbit exactly once
Outcome multiplicative_tiling() {
  TilingSampleSpec spec;
  spec.n_samples = 10'000;
  spec.seed = 808;
  spec.band = 1e-9;

  Mat one(1, 1);
  one << 2;
  Dilation d1 = make_dilation(one);
  double rate1 =
      tiling_check(d1, tiling_annulus(d1), spec, 60).single_cover_rate;

  Dilation d2 = make_dilation(diag2(2, 3));
  double rate2 =
      tiling_check(d2, tiling_annulus(d2), spec, 60).single_cover_rate;

  Mat R(2, 2);
  R << 1, 1, -1, 1;
  Dilation d3 = make_dilation(R);
  double rate3 =
      tiling_check(d3, tiling_annulus(d3), spec, 60).single_cover_rate;

  Outcome o;
  o.pass = rate1 == 1.0 && rate2 >= 0.999 && rate3 >= 0.999;
  std::ostringstream ss;
  ss << "cover rates " << rate1 << " / " << rate2 << " / " << rate3;
  o.detail = ss.str();
  return o;
}

// 9: orbit sums are one for tiles, divergent for the unit interval
Outcome orbit_sum_normalization() {
  Preset sh = preset("shannon");
  auto xs = calderon_samples(*sh.psi, *sh.dilation, 10'000, 60, 909);
  auto cal = calderon_sum(*sh.psi, *sh.dilation, xs, 60);
  long long exact1 = 0;
  for (const auto& row : cal.rows)
    if (row.sum == 1.0) ++exact1;

  Preset da = preset("dyadic-annulus", 2);
  auto xs2 = calderon_samples(*da.psi, *da.dilation, 10'000, 60, 910);
  auto cal2 = calderon_sum(*da.psi, *da.dilation, xs2, 60);
  long long exact2 = 0;
  for (const auto& row : cal2.rows)
    if (row.sum == 1.0) ++exact2;

  Vec lo(1), hi(1), xi(1);
  lo << 0;
  hi << 1;
  xi << 0.3;
  FreqFunction ramp = freq_indicator(box_region(lo, hi));
  bool flagged = calderon_sum(ramp, *sh.dilation, {xi}, 16).growth_flag;

  Outcome o;
  o.pass = exact1 == 10'000 && exact2 >= 9990 && flagged;
  std::ostringstream ss;
  ss << "tile " << exact1 << "/10000 exact, annulus " << exact2
     << "/10000 exact, interval flagged " << (flagged ? "yes" : "NO");
  o.detail = ss.str();
  return o;
}

// 10: truncations settle for the matched system and blow up for the
// adversarial one, whose own orbit sums stay summable
Outcome truncation_dichotomy() {
  Dilation d = make_dilation(Mat(Mat::Identity(2, 2) * 2));
  Lattice Z2 = Zn(2);
  FreqFunction msf = freq_indicator(tiling_annulus(d));
  Vec lo = Vec::Constant(2, 0.3), hi = Vec::Constant(2, 0.4);
  TestFunction f{box_region(lo, hi), 1.0};
  McOptions mo;
  mo.n_samples = 20'000;
  mo.seed = 7;
  LICReport conv = lic_functional({msf}, d, Z2, f, 30, 4096, mo);
  double incr = std::abs(conv.checkpoints[2].second -
                         conv.checkpoints[1].second);

  const double alpha = 0.33805 + 1e-9 * std::sqrt(2.0);
  Mat A(3, 3);
  A << 1, 1, 0, 0, 1, 0, 0, 0, 2;
  Mat Gb(3, 3);
  Gb << 0, 1, 0, 1, alpha, 0, 0, 0, 1;
  Dilation Ad = make_dilation(A);
  Dilation Bt = make_dilation(Mat(A.transpose()));
  Lattice G = make_lattice(Gb);
  auto [psi, spec] =
      lic_counterexample_psi(Bt, dual(G), 0.32, LICSide::PosJ, 3);
  McOptions md;
  md.n_samples = 10'000;
  md.seed = 5;
  TestFunction fT{spec.T, 1.0};
  LICReport div = lic_functional({psi}, Ad, G, fT, 240, 100'000, md);
  const double first = div.checkpoints.front().second;
  const double last = div.checkpoints.back().second;
  const bool blew = last > 1e3 * first && last > 0;

  // the adversary's own orbit sums stay below its reciprocal-count budget
  BoundingBox bb = spec.T.bounding_box();
  std::vector<Vec> xs;
  Philox g(1010, 0);
  for (int i = 0; i < 200; ++i) {
    Vec x(3);
    for (int k = 0; k < 3; ++k)
      x(k) = bb.lo(k) + g.uniform01() * (bb.hi(k) - bb.lo(k));
    xs.push_back(x);
  }
  auto cal = calderon_sum(psi, Bt, xs, 240);
  double mx = 0;
  for (const auto& row : cal.rows) mx = std::max(mx, row.sum);
  const bool summable = mx <= spec.inv_sum + 1e-9 && spec.inv_sum <= 2.0;

  Outcome o;
  o.pass = incr < 1e-6 && blew && summable;
  std::ostringstream ss;
  ss << "settled increment " << incr << ", adversary " << first << " -> "
     << last << ", orbit-sum max " << mx << " <= " << spec.inv_sum;
  o.detail = ss.str();
  return o;
}

// 11: shift-equation residuals vanish for the tile, twin run is bit-equal
Outcome residual_equations() {
  Preset sh = preset("shannon");
  auto xs = calderon_samples(*sh.psi, *sh.dilation, 1000, 60, 1111);
  std::vector<Vec> alphas;
  for (int a = -3; a <= 3; ++a) {
    Vec v(1);
    v << a;
    alphas.push_back(v);
  }
  Lattice Z1 = Zn(1);
  auto rep = char_eq_residual({*sh.psi}, *sh.dilation, Z1, alphas, xs, 60);
  auto mirror =
      dual_eq_residual({*sh.psi}, {*sh.psi}, *sh.dilation, Z1, alphas, xs, 60);
  bool bitwise = rep.rows.size() == mirror.rows.size();
  for (std::size_t i = 0; bitwise && i < rep.rows.size(); ++i)
    if (rep.rows[i].t != mirror.rows[i].t ||
        rep.rows[i].residual != mirror.rows[i].residual)
      bitwise = false;
  Outcome o;
  o.pass = rep.max_residual_zero_alpha == 0.0 &&
           rep.max_residual_other == 0.0 && bitwise;
  std::ostringstream ss;
  ss << "residuals " << rep.max_residual_zero_alpha << " / "
     << rep.max_residual_other << " over " << rep.rows.size()
     << " rows, twin " << (bitwise ? "bit-equal" : "DIFFERS");
  o.detail = ss.str();
  return o;
}

// 12: every rotated lattice leaves a certifying exponent
Outcome packing_certificates() {
  Dilation d = make_dilation(diag2(2, 3));
  int found = 0;
  for (int t = 0; t < 50; ++t) {
    Philox g = substream(1212, (std::uint64_t)t);
    Lattice Ld = make_lattice(haar_rotation(2, g));
    if (!msf_certificate(d, Ld, 1.0, -40, 0).certifying_j.empty()) ++found;
  }
  Outcome o;
  o.pass = found == 50;
  std::ostringstream ss;
  ss << found << "/50 rotations certified";
  o.detail = ss.str();
  return o;
}

// 13: seeded experiments are identical across worker counts and reruns
Outcome worker_determinism() {
  bool ok = true;
  std::string first_bad;

  Dilation d = make_dilation(diag2(2, 3));
  Region S = tiling_annulus(d);
  McOptions m1;
  m1.n_samples = 50'000;
  m1.seed = 13;
  McOptions m8 = m1;
  m8.threads = 8;
  auto a = measure_mc(S, S.bounding_box(), m1);
  auto b = measure_mc(S, S.bounding_box(), m8);
  if (a.value != b.value || a.stderr_ != b.stderr_) {
    ok = false;
    first_bad = "measure";
  }

  Lattice Z2 = Zn(2);
  CountProfile p1 = count_profile(d, Z2, 3.0, -10, 10, 1);
  CountProfile p8 = count_profile(d, Z2, 3.0, -10, 10, 8);
  for (std::size_t i = 0; i < p1.rows.size(); ++i)
    if (p1.rows[i].count != p8.rows[i].count ||
        p1.rows[i].ratio != p8.rows[i].ratio) {
      ok = false;
      if (first_bad.empty()) first_bad = "profile";
    }

  ExperimentReport e1 = ubiquity_experiment(d, Z2, 1.0, 4, -15, 15, 9, 1);
  ExperimentReport e8 = ubiquity_experiment(d, Z2, 1.0, 4, -15, 15, 9, 8);
  for (int i = 0; i < 4; ++i)
    if (e1.diagnostics[i].pass != e8.diagnostics[i].pass ||
        e1.diagnostics[i].sup_ratio != e8.diagnostics[i].sup_ratio) {
      ok = false;
      if (first_bad.empty()) first_bad = "ubiquity";
    }

  TilingSampleSpec t1;
  t1.n_samples = 2000;
  t1.seed = 5;
  TilingSampleSpec t8 = t1;
  t8.threads = 8;
  auto r1 = tiling_check(d, S, t1, 40);
  auto r8 = tiling_check(d, S, t8, 40);
  if (r1.single_cover_rate != r8.single_cover_rate) {
    ok = false;
    if (first_bad.empty()) first_bad = "tiling";
  }

  FreqFunction psi = freq_indicator(S);
  auto s1 = calderon_samples(psi, d, 100, 30, 14);
  auto s2 = calderon_samples(psi, d, 100, 30, 14);
  for (std::size_t i = 0; i < s1.size(); ++i)
    if (s1[i] != s2[i]) {
      ok = false;
      if (first_bad.empty()) first_bad = "samples";
    }

  Outcome o;
  o.pass = ok;
  o.detail = ok ? "measure, profile, ubiquity, tiling, sampling all bit-equal"
              : "first divergence in " + first_bad;
  return o;
}

}  // namespace

int main() {
  struct Row {
    const char* name;
    double limit_s;  // 0 = untimed
    std::function<Outcome()> fn;
  };
  const std::vector<Row> rows = {
      {"enumeration-vs-box-scan", 10, enumeration_vs_box_scan},
      {"classification-battery", 1, classification_battery},
      {"expanding-count-boundedness", 5, expanding_count_boundedness},
      {"deep-window-count-growth", 30, deep_window_count_growth},
      {"product-minimum-suite", 60, product_minimum_suite},
      {"volume-packing-bounds", 20, volume_packing_bounds},
      {"progression-extraction", 20, progression_extraction},
      {"multiplicative-tiling", 30, multiplicative_tiling},
      {"orbit-sum-normalization", 10, orbit_sum_normalization},
      {"truncation-dichotomy", 60, truncation_dichotomy},
      {"residual-equations", 10, residual_equations},
      {"packing-certificates", 20, packing_certificates},
      {"worker-determinism", 0, worker_determinism},
  };

  int failed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = rows[i].fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    bool timed_out = rows[i].limit_s > 0 && secs > rows[i].limit_s;
    bool pass = o.pass && !timed_out;
    if (!pass) ++failed;
    std::printf("%2zu %-28s %s  %s%s  [%.1fs]\n", i + 1, rows[i].name,
                pass ? "PASS" : "FAIL", o.detail.c_str(),
                timed_out ? " (over time budget)" : "", secs);
  }
  std::printf("%d/%zu criteria passed\n", (int)rows.size() - failed,
              rows.size());
  return failed;
}
