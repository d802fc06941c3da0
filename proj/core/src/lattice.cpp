#include "latscope/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "enum_engine.hpp"
#include "latscope/errors.hpp"

namespace latscope {

namespace {

void check_basis(const Mat& G) {
  if (G.rows() != G.cols() || G.rows() < 1 || G.rows() > 8)
    throw Error("lattice basis must be square with 1 <= n <= 8");
  if (std::abs(G.determinant()) <= 1e-12)
    throw Error("lattice basis is singular (|det| <= 1e-12)");
}

bool integral_entries(const Mat& M, double limit = 1 << 20) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      double v = M(i, j);
      if (v != std::round(v) || std::abs(v) > limit) return false;
    }
  return true;
}

}  // namespace

Lattice make_lattice(const Mat& basis) {
  check_basis(basis);
  return {basis, std::abs(basis.determinant())};
}

Lattice dual(const Lattice& L) {
  Mat Gt = L.basis.transpose();
  return {Gt.inverse(), 1.0 / L.covolume};
}

Lattice lll_reduce(const Lattice& L, double delta) {
  if (!(delta > 0.25 && delta < 1.0))
    throw Error("LLL delta must lie in (0.25, 1)");
  detail::Enumerator<double> e(L.basis,
                               detail::SmallSquare<double>::from(L.basis));
  e.reduce(delta);
  Mat R(L.n(), L.n());
  for (int c = 0; c < L.n(); ++c) R.col(c) = e.reduced_point_basis_col(c);
  return {R, L.covolume};
}

ShortestVec shortest_vector(const Lattice& L) {
  Lattice R = lll_reduce(L);
  // the cheapest reduced column already bounds the minimum from above
  double r = std::numeric_limits<double>::infinity();
  for (int c = 0; c < R.n(); ++c) r = std::min(r, R.basis.col(c).norm());
  r *= 1.0 + 1e-9;
  ShortestVec best;
  best.norm = std::numeric_limits<double>::infinity();
  enumerate_in_ellipsoid(L, Mat::Identity(L.n(), L.n()), r,
                         [&best](const Vec& x) {
                           double nx = x.norm();
                           if (nx > 0 && nx < best.norm) {
                             best.norm = nx;
                             best.v = x;
                           }
                           return true;
                         });
  return best;
}

namespace {

MinimaResult minima_impl(const Lattice& L, const Mat& M, double r_max) {
  const int n = L.n();
  Mat W = M * L.basis;
  detail::Enumerator<double> eng(L.basis, detail::SmallSquare<double>::from(W));
  eng.reduce();
  double max_col = std::sqrt(static_cast<double>(eng.max_col_norm_sq()));
  double r = std::min(r_max, max_col * (1.0 + 1e-9));

  struct Cand {
    Vec x;
    double norm;
  };
  std::vector<Cand> cands;
  enumerate_in_ellipsoid(L, M, r, [&](const Vec& x) {
    double nx = (M * x).norm();
    if (nx > 0) cands.push_back({x, nx});
    return true;
  });
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    for (int i = 0; i < a.x.size(); ++i)
      if (a.x(i) != b.x(i)) return a.x(i) < b.x(i);
    return false;
  });

  MinimaResult out;
  Mat U(n, 0);  // orthonormal basis of the chosen span
  for (const auto& c : cands) {
    if (out.minima.size() == static_cast<size_t>(n)) break;
    Vec res = c.x;
    if (U.cols() > 0) res -= U * (U.transpose() * c.x);
    if (res.norm() <= 1e-9 * c.x.norm()) continue;
    U.conservativeResize(n, U.cols() + 1);
    U.col(U.cols() - 1) = res / res.norm();
    out.minima.push_back(c.norm);
    out.witnesses.push_back(c.x);
  }
  return out;
}

}  // namespace

MinimaResult successive_minima(const Lattice& L, double r_max) {
  return minima_impl(L, Mat::Identity(L.n(), L.n()), r_max);
}

MinimaResult successive_minima_norm(const Lattice& L, const Mat& M,
                                    double r_max) {
  return minima_impl(L, M, r_max);
}

SymAP arithmetic_progression(const Lattice& L, const Mat& M, double r,
                             const EnumOptions& opt) {
  long long body = 0;
  enumerate_in_ellipsoid(
      L, M, r,
      [&body](const Vec&) {
        ++body;
        return true;
      },
      opt);
  if (body <= 1) throw EmptyBody("no nonzero lattice points in the body");

  MinimaResult mins = successive_minima_norm(L, M, r);
  SymAP ap;
  ap.body_points = body;

  std::vector<double> mu;
  for (size_t i = 0; i < mins.minima.size(); ++i) {
    if (mins.minima[i] < r) {
      ap.generators.push_back(mins.witnesses[i]);
      mu.push_back(mins.minima[i]);
    }
  }
  std::vector<long long> N(mu.size(), 0);
  // Greedy budget split: grow the bound whose next increment buys the most
  // cardinality per unit of triangle-inequality budget.
  double used = 0.0;
  while (true) {
    int best = -1;
    double best_gain = 0.0;
    for (size_t i = 0; i < mu.size(); ++i) {
      if (used + mu[i] >= r * (1.0 - 1e-12)) continue;
      double gain =
          std::log((2.0 * N[i] + 3.0) / (2.0 * N[i] + 1.0)) / mu[i];
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) break;
    ++N[best];
    used += mu[best];
  }

  std::vector<Vec> gens;
  std::vector<long long> bounds;
  double card = 1.0;
  ap.cardinality = 1;
  for (size_t i = 0; i < mu.size(); ++i) {
    if (N[i] == 0) continue;
    gens.push_back(ap.generators[i]);
    bounds.push_back(N[i]);
    card *= 2.0 * N[i] + 1.0;
    ap.cardinality *= 2 * N[i] + 1;
  }
  if (card > 9e17) throw Overflow("progression cardinality exceeds 2^63");
  ap.generators = std::move(gens);
  ap.bounds = std::move(bounds);
  ap.rank = static_cast<int>(ap.bounds.size());
  ap.achieved_ratio =
      static_cast<double>(ap.cardinality) / static_cast<double>(body);
  return ap;
}

bool is_member(const Lattice& L, const Vec& x, double tol) {
  if (x.size() != L.n()) throw Error("point dimension mismatch");
  Vec z = L.basis.partialPivLu().solve(x);
  Vec zr = z.array().round().matrix();
  if (integral_entries(L.basis) && integral_entries(Mat(x.transpose())) &&
      zr.cwiseAbs().maxCoeff() <= 1e12) {
    // exact integer check
    for (int i = 0; i < L.n(); ++i) {
      long long s = 0;
      for (int k = 0; k < L.n(); ++k)
        s += static_cast<long long>(L.basis(i, k)) *
             static_cast<long long>(zr(k));
      if (s != static_cast<long long>(x(i))) return false;
    }
    return true;
  }
  return (L.basis * zr - x).norm() < tol * (1.0 + x.norm());
}

}  // namespace latscope
