#include "latscope/counting.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "latscope/errors.hpp"

namespace latscope {

namespace {

double log_det_scale(const Dilation& A, long long j) {
  // log of max(1, |det A|^j)
  return std::max(0.0, double(j) * std::log(A.det_abs));
}

void fill_row(const Dilation& A, const Lattice& L, double r,
              const EnumOptions& opt, ProfileRow& row) {
  try {
    row.tier = dilated_ball_tier(L, A, row.j);
    row.count = count_in_dilated_ball(L, A, row.j, r, opt);
  } catch (const Overflow&) {
    row.overflow = true;
    row.count = opt.cap;
    row.note = "count capped";
  } catch (const IllConditioned& e) {
    row.skipped = true;
    row.count = 0;
    row.note = e.what();
    return;
  }
  row.ratio =
      std::exp(std::log(double(std::max<long long>(row.count, 1))) -
               log_det_scale(A, row.j));
}

}  // namespace

CountProfile count_profile(const Dilation& A, const Lattice& L, double r,
                           long long j_min, long long j_max, int threads,
                           const EnumOptions& opt) {
  if (A.n() != L.n())
    throw Error("count_profile: dimension mismatch");
  if (!(A.det_abs > 1.0))
    throw Error("count_profile: |det A| must exceed 1");
  if (j_min > j_max)
    throw Error("count_profile: empty j window");
  if (!(r > 0.0))
    throw Error("count_profile: radius must be positive");

  CountProfile p;
  p.dilation = A;
  p.lattice = L;
  p.radius = r;
  p.rows.resize(size_t(j_max - j_min + 1));
  for (size_t i = 0; i < p.rows.size(); ++i)
    p.rows[i].j = j_min + (long long)i;

  int nw = std::max(1, std::min<int>(threads, (int)p.rows.size()));
  if (nw == 1) {
    for (auto& row : p.rows) fill_row(A, L, r, opt, row);
    return p;
  }

  // Round-robin row assignment into preallocated slots keeps the result
  // byte-identical for any worker count.
  std::vector<std::exception_ptr> errs(nw);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (size_t i = (size_t)w; i < p.rows.size(); i += (size_t)nw)
          fill_row(A, L, r, opt, p.rows[i]);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return p;
}

const char* to_string(Trend t) {
  switch (t) {
    case Trend::Bounded: return "Bounded";
    case Trend::GrowingNegSide: return "GrowingNegSide";
    case Trend::GrowingPosSide: return "GrowingPosSide";
  }
  return "?";
}

namespace {

struct SideStats {
  bool usable = false;
  double inner_max = 0.0, outer_max = 0.0;
};

// rows must be ordered by |j| ascending
SideStats side_stats(const std::vector<const ProfileRow*>& rows) {
  SideStats s;
  size_t m = rows.size();
  if (m < 8) return s;
  s.usable = true;
  size_t q = (m + 3) / 4;
  for (size_t i = 0; i < q; ++i)
    s.inner_max = std::max(s.inner_max, rows[i]->ratio);
  for (size_t i = m - q; i < m; ++i)
    s.outer_max = std::max(s.outer_max, rows[i]->ratio);
  return s;
}

}  // namespace

Verdict lce_verdict(const CountProfile& p, double growth_factor) {
  Verdict v;
  v.window_min = p.rows.empty() ? 0 : p.rows.front().j;
  v.window_max = p.rows.empty() ? 0 : p.rows.back().j;

  std::vector<const ProfileRow*> neg, pos;
  bool have_any = false;
  for (const auto& row : p.rows) {
    if (row.skipped || row.overflow) continue;
    if (!have_any || row.ratio > v.sup_ratio) {
      v.sup_ratio = row.ratio;
      v.witness_j = row.j;
      have_any = true;
    }
    if (row.j <= 0) neg.push_back(&row);
    if (row.j >= 0) pos.push_back(&row);
  }
  std::sort(neg.begin(), neg.end(),
            [](const ProfileRow* a, const ProfileRow* b) { return a->j > b->j; });
  std::sort(pos.begin(), pos.end(),
            [](const ProfileRow* a, const ProfileRow* b) { return a->j < b->j; });

  SideStats sn = side_stats(neg), sp = side_stats(pos);
  if (!sn.usable && !sp.usable)
    throw WindowTooSmall(
        "lce_verdict: fewer than 8 usable rows on both sides of j=0");

  double excess_n = 0.0, excess_p = 0.0;
  if (sn.usable && sn.outer_max > growth_factor * sn.inner_max)
    excess_n = sn.outer_max / std::max(sn.inner_max, 1e-300);
  if (sp.usable && sp.outer_max > growth_factor * sp.inner_max)
    excess_p = sp.outer_max / std::max(sp.inner_max, 1e-300);

  if (excess_n > 0.0 || excess_p > 0.0)
    v.trend = excess_n >= excess_p ? Trend::GrowingNegSide
                                   : Trend::GrowingPosSide;
  return v;
}

std::pair<Dilation, Lattice> shear_counterexample(double alpha, double scale) {
  Mat A = Mat::Zero(3, 3);
  A(0, 0) = 1; A(0, 1) = 1;
  A(1, 1) = 1;
  A(2, 2) = scale;
  std::vector<JordanBlock> blocks;
  blocks.push_back({std::complex<double>(scale, 0.0), 1, false});
  blocks.push_back({std::complex<double>(1.0, 0.0), 2, false});
  Dilation D = make_dilation_structured(A, blocks, Mat::Identity(3, 3));

  Mat G = Mat::Zero(3, 3);
  G(1, 0) = 1;
  G(0, 1) = 1; G(1, 1) = alpha;
  G(2, 2) = 1;
  return {std::move(D), make_lattice(G)};
}

std::pair<Dilation, Lattice> rotation_counterexample(double theta,
                                                     double alpha) {
  double c = std::cos(theta), s = std::sin(theta);
  Mat R(2, 2);
  R << c, -s, s, c;
  Mat A = Mat::Zero(5, 5);
  A.block<2, 2>(0, 0) = R;
  A.block<2, 2>(0, 2) = Mat::Identity(2, 2);
  A.block<2, 2>(2, 2) = R;
  A(4, 4) = 2;

  std::vector<JordanBlock> blocks;
  blocks.push_back({std::complex<double>(2.0, 0.0), 1, false});
  if (std::abs(s) < 1e-12) {
    blocks.push_back({std::complex<double>(c > 0 ? 1.0 : -1.0, 0.0), 2, false});
    blocks.push_back({std::complex<double>(c > 0 ? 1.0 : -1.0, 0.0), 2, false});
  } else {
    blocks.push_back({std::complex<double>(c, std::abs(s)), 2, true});
  }
  Dilation D = make_dilation_structured(A, blocks, Mat::Identity(5, 5));

  // Two slope-alpha shear lattices on the coordinate pairs (x1,x3) and
  // (x2,x4), rotated in the lower block so the rotation part of A^j maps
  // the lattice family onto itself.
  Mat G = Mat::Zero(5, 5);
  G(2, 0) = c;         G(3, 0) = s;
  G(0, 1) = 1;         G(2, 1) = alpha * c;  G(3, 1) = alpha * s;
  G(2, 2) = -s;        G(3, 2) = c;
  G(1, 3) = 1;         G(2, 3) = -alpha * s; G(3, 3) = alpha * c;
  G(4, 4) = 1;
  return {std::move(D), make_lattice(G)};
}

PackingReport volume_packing_check(const Lattice& L, const Mat& M, double r,
                                   const EnumOptions& opt) {
  int n = L.n();
  std::vector<Vec> pts = enumerate_in_ellipsoid(L, M, r, opt);

  PackingReport rep;
  rep.count = (long long)pts.size();
  if (!pts.empty()) {
    Mat P(n, (int)pts.size());
    for (int i = 0; i < (int)pts.size(); ++i) P.col(i) = pts[i];
    Eigen::JacobiSVD<Mat> svd(P);
    double smax = svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-9 * std::max(smax, 1.0)) ++rank;
    rep.spanning = rank == n;
  }

  double log_vol_ball = 0.5 * n * std::log(M_PI) -
                        std::lgamma(0.5 * n + 1.0) + n * std::log(r);
  double vol = std::exp(log_vol_ball) / std::abs(M.determinant());
  double base = vol / (std::ldexp(1.0, n) * L.covolume);
  rep.lower_bound = base;
  double fact = 1.0;
  for (int k = 2; k <= n; ++k) fact *= k;
  rep.upper_bound = fact * std::pow(3.0, n) * base;
  return rep;
}

const char* to_string(LcePrediction p) {
  return p == LcePrediction::HoldsForAllLattices ? "HoldsForAllLattices"
                                                 : "LatticeDependent";
}

LcePrediction predict_lce(const Dilation& A) {
  if (!(A.det_abs > 1.0))
    throw Error("predict_lce: |det A| must exceed 1");
  DilationClass c = classify_dilation(A);
  return c == DilationClass::NotExpandingOnSubspace
             ? LcePrediction::LatticeDependent
             : LcePrediction::HoldsForAllLattices;
}

}  // namespace latscope
