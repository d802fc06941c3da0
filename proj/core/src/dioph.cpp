#include "latscope/dioph.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "latscope/errors.hpp"

namespace latscope {

double norm_form(const Vec& x) {
  double p = 1.0;
  for (int i = 0; i < x.size(); ++i) p *= x(i);
  return p;
}

NuResult nu(const Lattice& L, double rho, const EnumOptions& opt) {
  ShortestVec sv = shortest_vector(L);
  if (!(rho > sv.norm))
    throw RhoTooSmall("nu: rho must exceed the shortest vector length");

  NuResult best;
  bool have = false;
  enumerate_in_ellipsoid(
      L, Mat::Identity(L.n(), L.n()), rho,
      [&](const Vec& x) {
        if (x.isZero(0.0)) return true;
        double v = std::abs(norm_form(x));
        if (!have || v < best.value) {
          have = true;
          best.value = v;
          best.witness = x;
        }
        return true;
      },
      opt);
  if (!have) throw RhoTooSmall("nu: no nonzero point below rho");
  return best;
}

NmResult nm_lattice(const Lattice& L, double rho_max, const EnumOptions& opt) {
  NuResult r = nu(L, rho_max, opt);
  NmResult out;
  out.value = r.value;
  out.witness = r.witness;
  out.rho_max = rho_max;
  out.truncated = true;
  return out;
}

Mat haar_rotation(int n, Philox& g) {
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) G(i, k) = g.normal();
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (R(i, i) < 0) Q.col(i) = -Q.col(i);
  if (Q.determinant() < 0) Q.col(n - 1) = -Q.col(n - 1);
  return Q;
}

NuProfile nu_scan(const Lattice& L, const Mat& P, const Mat* U,
                  const std::vector<double>& rho_list,
                  const EnumOptions& opt) {
  NuProfile prof;
  prof.lattice = L;
  prof.P = P;
  if (U) {
    prof.U = *U;
    prof.has_U = true;
  }
  Mat T = U ? Mat(P * *U) : P;
  Lattice M = make_lattice(Mat(T * L.basis));
  for (double rho : rho_list) {
    NuResult r = nu(M, rho, opt);
    prof.samples.push_back({rho, r.value, r.witness});
  }
  return prof;
}

std::vector<SkriganovRow> skriganov_scan(const Lattice& L, const Mat& P,
                                         const Mat& U,
                                         const std::vector<double>& rho_list,
                                         double epsilon,
                                         const EnumOptions& opt) {
  if (!(epsilon > 0)) throw Error("skriganov_scan: epsilon must be positive");
  int n = L.n();
  Lattice M = make_lattice(Mat(P * U * L.basis));
  std::vector<SkriganovRow> rows;
  for (double rho : rho_list) {
    if (!(rho > 1.0))
      throw Error("skriganov_scan: rho must exceed 1 for the log bound");
    SkriganovRow row;
    row.rho = rho;
    NuResult r = nu(M, rho, opt);
    row.nu_value = r.value;
    row.witness = r.witness;
    row.bound = std::pow(std::log(rho), 1.0 - n - epsilon);
    row.pass = row.nu_value > row.bound;
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentReport ubiquity_experiment(const Dilation& A, const Lattice& L,
                                     double r, int trials, long long j_min,
                                     long long j_max,
                                     std::optional<std::uint64_t> seed,
                                     int threads, bool force_identity,
                                     const EnumOptions& opt) {
  if (!(A.det_abs > 1.0))
    throw Error("ubiquity_experiment: |det A| must exceed 1");
  if (trials <= 0) throw Error("ubiquity_experiment: need trials");

  ExperimentReport rep;
  rep.seed = resolve_seed(seed ? &*seed : nullptr);
  rep.trials = trials;
  rep.growth_factor = 4.0;
  rep.diagnostics.resize((size_t)trials);

  auto run_trial = [&](int t) {
    TrialDiagnostic& d = rep.diagnostics[(size_t)t];
    d.index = t;
    try {
      Mat U;
      if (force_identity) {
        U = Mat::Identity(A.n(), A.n());
      } else {
        Philox g = substream(rep.seed, (std::uint64_t)t);
        U = haar_rotation(A.n(), g);
      }
      Lattice M = make_lattice(Mat(U * L.basis));
      CountProfile p = count_profile(A, M, r, j_min, j_max, 1, opt);
      Verdict v = lce_verdict(p, rep.growth_factor);
      d.sup_ratio = v.sup_ratio;
      d.trend = v.trend;
      d.witness_j = v.witness_j;
      d.pass = v.trend == Trend::Bounded;
    } catch (const Error& e) {
      d.errored = true;
      d.pass = false;
      d.note = e.what();
    }
  };

  int nw = std::max(1, std::min(threads, trials));
  if (nw == 1) {
    for (int t = 0; t < trials; ++t) run_trial(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w)
      pool.emplace_back([&, w] {
        for (int t = w; t < trials; t += nw) run_trial(t);
      });
    for (auto& t : pool) t.join();
  }

  for (auto& d : rep.diagnostics)
    if (d.pass) ++rep.pass_count;
  return rep;
}

NormGrowth norm_growth_bound(const Dilation& A, const Vec& x, long long j,
                             double epsilon, double r,
                             long long sweep_half_width, int samples_per_j,
                             std::optional<std::uint64_t> seed) {
  if (!A.spectral.has_basis())
    throw ConfluentSpectrum(
        "norm_growth_bound: dilation carries no usable Jordan basis");
  if (!(r > 0) || !(epsilon >= 0))
    throw Error("norm_growth_bound: bad r or epsilon");
  int n = A.n();
  if ((int)x.size() != n) throw Error("norm_growth_bound: dimension mismatch");

  Mat Pinv = A.spectral.similarity_basis.inverse();
  double ldet = std::log(A.det_abs);
  Vec y = matrix_power(A.A, -j) * x;
  if (!(y.norm() < r * (1.0 + 1e-9)))
    throw Error("norm_growth_bound: x is not inside the dilated ball");

  NormGrowth out;
  out.lhs = std::abs(norm_form(Pinv * x));

  std::uint64_t s = resolve_seed(seed ? &*seed : nullptr);
  double C = 0.0;
  for (long long jj = -sweep_half_width; jj <= sweep_half_width; ++jj) {
    // per-exponent substream: widening the sweep only adds candidates
    Philox g = substream(s, (std::uint64_t)(jj + (1LL << 32)));
    Mat Bj = matrix_power(A.A, jj);
    double denom =
        std::exp((double(jj) + double(std::llabs(jj)) * epsilon) * ldet);
    for (int k = 0; k < samples_per_j; ++k) {
      Vec v(n);
      double nrm = 0;
      do {
        for (int d = 0; d < n; ++d) v(d) = g.normal();
        nrm = v.norm();
      } while (nrm < 1e-300);
      double rad = r * std::pow(g.uniform01(), 1.0 / n);
      Vec pt = Bj * (v * (rad / nrm));
      C = std::max(C, std::abs(norm_form(Pinv * pt)) / denom);
    }
  }
  out.C_fitted = C;
  out.rhs = C * std::exp((double(j) + double(std::llabs(j)) * epsilon) * ldet);
  return out;
}

SpEstimate s_p_estimate(const Mat& P, double theta, long long samples,
                        std::optional<std::uint64_t> seed) {
  if (P.rows() != P.cols() || P.rows() == 0)
    throw Error("s_p_estimate: P must be square");
  int n = (int)P.rows();
  if (smallest_singular_value(P) <= 1e-12 * std::max(1.0, spectral_norm(P)))
    throw Error("s_p_estimate: P must be invertible");
  double pinv_norm = spectral_norm(P.inverse());
  double limit = 1.0 / (std::sqrt(double(n)) * std::pow(pinv_norm, n));
  if (!(theta > 0) || !(theta < limit))
    throw ThetaOutOfRange("s_p_estimate: theta outside (0, " +
                          std::to_string(limit) + ")");
  if (samples <= 0) throw Error("s_p_estimate: need samples");

  std::uint64_t s = resolve_seed(seed ? &*seed : nullptr);
  Philox g = substream(s, 0x7370);
  long long hits = 0;
  Vec v(n);
  for (long long i = 0; i < samples; ++i) {
    double nrm = 0;
    do {
      for (int d = 0; d < n; ++d) v(d) = g.normal();
      nrm = v.norm();
    } while (nrm < 1e-300);
    if (std::abs(norm_form(P * (v / nrm))) < theta) ++hits;
  }
  SpEstimate est;
  est.samples = samples;
  double phat = double(hits) / double(samples);
  est.value = phat;
  est.stderr_ = std::sqrt(std::max(phat * (1 - phat), 0.0) / double(samples));
  est.shape_ratio =
      est.value /
      (theta * std::pow(1.0 + std::log(1.0 / theta), double(n - 2)));
  return est;
}

}  // namespace latscope
