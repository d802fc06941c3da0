#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <sstream>

#include "enum_engine.hpp"
#include "latscope/lattice.hpp"

namespace latscope {

namespace {

namespace bmp = boost::multiprecision;
using mp130 = bmp::number<bmp::mpfr_float_backend<130>, bmp::et_off>;
using mp250 = bmp::number<bmp::mpfr_float_backend<250>, bmp::et_off>;

double vol_ball(int n, double r) {
  return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0) *
         std::pow(r, n);
}

// Volume heuristic: refuse up front when the expected count is clearly past
// the cap. Thin ellipsoids can beat this estimate; the in-search guards
// catch those.
void check_predicted(int n, double r, double log10_det_M, double covol,
                     long long cap) {
  double log10_pred =
      std::log10(vol_ball(n, r)) - log10_det_M - std::log10(covol);
  if (log10_pred > std::log10(static_cast<double>(cap)) + 0.15) {
    std::ostringstream os;
    os << "predicted count 10^" << log10_pred << " exceeds cap " << cap;
    throw Overflow(os.str());
  }
}

unsigned long long abs_ull(long long j) {
  return j == std::numeric_limits<long long>::min()
             ? static_cast<unsigned long long>(
                   std::numeric_limits<long long>::max()) +
                   1ull
             : static_cast<unsigned long long>(j < 0 ? -j : j);
}

template <typename Real>
long long run_dilated(const Lattice& L, const Mat& A, long long j, double r,
                      const PointVisitor& visit, const EnumOptions& opt) {
  using SS = detail::SmallSquare<Real>;
  const int n = L.n();
  SS M;
  if (j == 0) {
    M = SS::identity(n);
  } else if (j < 0) {
    M = SS::from(A).power(abs_ull(j));
  } else {
    M = SS::from(A).inverse().power(abs_ull(j));
  }
  SS W = M.mul(SS::from(L.basis));
  detail::Enumerator<Real> e(L.basis, std::move(W));
  e.reduce();
  return e.run(r, opt.cap, visit);
}

}  // namespace

int dilated_ball_tier(const Lattice& L, const Dilation& A, long long j) {
  const double aj = static_cast<double>(abs_ull(j));
  const double lmax = A.spectral.max_modulus();
  const double lmin = A.spectral.min_modulus();
  double spread = aj * std::log10(lmax / lmin) +
                  (L.n() - 1) * std::log10(1.0 + aj);  // Jordan growth margin
  double logk = spread + std::log10(cond_estimate(L.basis)) + 1.0;
  double lmag = aj * std::max(std::log10(lmax), -std::log10(lmin)) +
                std::log10(std::max(1.0, spectral_norm(L.basis)));
  if (logk < 10.0 && lmag < 250.0) return 1;
  if (logk < 95.0) return 2;
  if (logk < 231.0) return 3;
  std::ostringstream os;
  os << "condition estimate 10^" << logk
     << " beyond the widest precision tier (limit 10^231)";
  throw IllConditioned(os.str());
}

long long enumerate_in_dilated_ball(const Lattice& L, const Dilation& A,
                                    long long j, double r,
                                    const PointVisitor& visit,
                                    const EnumOptions& opt) {
  if (!(r > 0)) throw Error("radius must be positive");
  check_predicted(L.n(), r, -static_cast<double>(j) * std::log10(A.det_abs),
                  L.covolume, opt.cap);
  switch (dilated_ball_tier(L, A, j)) {
    case 1:
      return run_dilated<double>(L, A.A, j, r, visit, opt);
    case 2:
      return run_dilated<mp130>(L, A.A, j, r, visit, opt);
    default:
      return run_dilated<mp250>(L, A.A, j, r, visit, opt);
  }
}

long long count_in_dilated_ball(const Lattice& L, const Dilation& A,
                                long long j, double r,
                                const EnumOptions& opt) {
  return enumerate_in_dilated_ball(L, A, j, r, nullptr, opt);
}

long long enumerate_in_ellipsoid(const Lattice& L, const Mat& M, double r,
                                 const PointVisitor& visit,
                                 const EnumOptions& opt) {
  if (!(r > 0)) throw Error("radius must be positive");
  if (M.rows() != L.n() || M.cols() != L.n())
    throw Error("norm matrix dimension mismatch");
  Mat W = M * L.basis;
  double c = cond_estimate(W);
  if (!(c <= 1e12)) {
    std::ostringstream os;
    os << "cond(M*basis) = " << c << " exceeds 1e12";
    throw IllConditioned(os.str());
  }
  check_predicted(L.n(), r, std::log10(std::abs(M.determinant())), L.covolume,
                  opt.cap);
  detail::Enumerator<double> e(L.basis, detail::SmallSquare<double>::from(W));
  e.reduce();
  return e.run(r, opt.cap, visit);
}

std::vector<Vec> enumerate_in_ellipsoid(const Lattice& L, const Mat& M,
                                        double r, const EnumOptions& opt) {
  std::vector<Vec> out;
  enumerate_in_ellipsoid(
      L, M, r,
      [&out](const Vec& x) {
        out.push_back(x);
        return true;
      },
      opt);
  return out;
}

}  // namespace latscope
