#include "latscope/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "latscope/errors.hpp"
#include "latscope/rng.hpp"

namespace latscope {

namespace {

constexpr std::uint64_t kSeedMix = 0x9e3779b97f4a7c15ULL;

// B^k for k in [-J, J], built incrementally from both ends; table[k + J].
std::vector<Mat> power_table(const Mat& B, int J) {
  const int n = (int)B.rows();
  std::vector<Mat> table(2 * J + 1);
  table[J] = Mat::Identity(n, n);
  Mat Binv = B.inverse();
  for (int k = 1; k <= J; ++k) {
    table[J + k] = B * table[J + k - 1];
    table[J - k] = Binv * table[J - k + 1];
  }
  return table;
}

BoundingBox finite_hull(const FreqFunction& psi, const char* who) {
  if (psi.terms.empty()) throw EmptyBody(std::string(who) + ": no terms");
  BoundingBox hull = psi.terms[0].support.bounding_box();
  for (std::size_t i = 1; i < psi.terms.size(); ++i) {
    BoundingBox b = psi.terms[i].support.bounding_box();
    for (int d = 0; d < hull.dim(); ++d) {
      hull.lo(d) = std::min(hull.lo(d), b.lo(d));
      hull.hi(d) = std::max(hull.hi(d), b.hi(d));
    }
  }
  for (int d = 0; d < hull.dim(); ++d)
    if (!std::isfinite(hull.lo(d)) || !std::isfinite(hull.hi(d)))
      throw Error(std::string(who) + ": support is unbounded");
  return hull;
}

Vec draw_in_box(const BoundingBox& box, Philox& g) {
  Vec x(box.dim());
  for (int d = 0; d < box.dim(); ++d)
    x(d) = box.lo(d) + g.uniform01() * (box.hi(d) - box.lo(d));
  return x;
}

// Direction uniform on the sphere, radius volume-uniform in [r_min, r_max].
Vec draw_in_annulus(int n, double r_min, double r_max, Philox& g) {
  Vec dir(n);
  double norm2 = 0;
  do {
    for (int d = 0; d < n; ++d) dir(d) = g.normal();
    norm2 = dir.squaredNorm();
  } while (norm2 == 0);
  dir /= std::sqrt(norm2);
  double u = g.uniform01();
  double rn = std::pow(r_min, n) + u * (std::pow(r_max, n) - std::pow(r_min, n));
  return std::pow(rn, 1.0 / n) * dir;
}

}  // namespace

int FreqFunction::dim() const {
  return terms.empty() ? 0 : terms[0].support.dim();
}

std::complex<double> FreqFunction::eval(const Vec& xi) const {
  std::complex<double> v = 0;
  for (const auto& t : terms)
    if (t.support.contains(xi)) v += t.coeff;
  return v;
}

double FreqFunction::min_abs_margin(const Vec& xi) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : terms)
    m = std::min(m, std::abs(t.support.boundary_margin(xi)));
  return m;
}

FreqFunction freq_indicator(Region support, std::complex<double> coeff) {
  FreqFunction f;
  f.terms.push_back({coeff, std::move(support)});
  f.disjoint = true;
  return f;
}

FreqFunction shannon_msf() {
  Vec lo(1), hi(1);
  lo << -1.0;
  hi << -0.5;
  Region left = box_region(lo, hi);
  lo << 0.5;
  hi << 1.0;
  Region right = box_region(lo, hi);
  FreqFunction f;
  f.terms.push_back({1.0, std::move(left)});
  f.terms.push_back({1.0, std::move(right)});
  f.disjoint = true;
  return f;
}

MeasureEstimate l2_norm_sq(const FreqFunction& psi, const McOptions& opt) {
  MeasureEstimate out;
  if (psi.terms.empty()) return out;
  out.bbox = finite_hull(psi, "l2_norm_sq");
  std::uint64_t seed =
      resolve_seed(opt.seed ? &*opt.seed : nullptr, 0);
  if (psi.disjoint) {
    double var = 0;
    for (std::size_t i = 0; i < psi.terms.size(); ++i) {
      McOptions per = opt;
      per.seed = seed ^ (kSeedMix * (i + 1));
      const Region& R = psi.terms[i].support;
      MeasureEstimate m = measure_mc(R, R.bounding_box(), per);
      double c2 = std::norm(psi.terms[i].coeff);
      out.value += c2 * m.value;
      var += c2 * c2 * m.stderr_ * m.stderr_;
      out.samples += m.samples;
    }
    out.stderr_ = std::sqrt(var);
    return out;
  }
  const long long N = std::max<long long>(1, opt.n_samples);
  const double vol = out.bbox.volume();
  const int n = out.bbox.dim();
  double sum = 0, sum2 = 0;
  for (long long i = 0; i < N; ++i) {
    Vec x(n);
    if (opt.halton) {
      auto h = halton_point((std::uint64_t)i, n);
      for (int d = 0; d < n; ++d)
        x(d) = out.bbox.lo(d) + h[d] * (out.bbox.hi(d) - out.bbox.lo(d));
    } else {
      Philox g = substream(seed, (std::uint64_t)i);
      x = draw_in_box(out.bbox, g);
    }
    double v = std::norm(psi.eval(x));
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / N;
  double var = std::max(0.0, sum2 / N - mean * mean);
  out.value = vol * mean;
  out.stderr_ = vol * std::sqrt(var / N);
  out.samples = N;
  return out;
}

CalderonReport calderon_sum(const FreqFunction& psi, const Dilation& B,
                            const std::vector<Vec>& xi_samples, int J,
                            double tol_growth) {
  if (J < 0) throw Error("calderon_sum: J must be nonnegative");
  CalderonReport rep;
  rep.tol_growth = tol_growth;
  std::vector<Mat> pw = power_table(B.A, J);
  const int half = J / 2;
  rep.rows.reserve(xi_samples.size());
  for (const Vec& xi : xi_samples) {
    CalderonRow row;
    row.xi = xi;
    for (int j = -J; j <= J; ++j) {
      double term = std::norm(psi.eval(pw[J - j] * xi));
      row.sum += term;
      if (std::abs(j) <= half) row.half_sum += term;
    }
    if (row.sum - row.half_sum > tol_growth) rep.growth_flag = true;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::vector<Vec> calderon_samples(const FreqFunction& psi, const Dilation& B,
                                  long long count, int J,
                                  std::optional<std::uint64_t> seed,
                                  double r_min, double r_max, double band) {
  const int n = psi.dim();
  if (n == 0) throw EmptyBody("calderon_samples: psi has no terms");
  if (!(0 < r_min && r_min < r_max))
    throw Error("calderon_samples: need 0 < r_min < r_max");
  std::uint64_t s = resolve_seed(seed ? &*seed : nullptr, 0);
  std::vector<Mat> pw = power_table(B.A, J);
  std::vector<Vec> out;
  out.reserve((std::size_t)count);
  for (long long i = 0; i < count; ++i) {
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      Philox g = substream(s, (std::uint64_t)(i + (long long)attempt * count));
      Vec xi = draw_in_annulus(n, r_min, r_max, g);
      ok = true;
      for (int k = -J; k <= J && ok; ++k)
        if (psi.min_abs_margin(pw[J + k] * xi) < band) ok = false;
      if (ok) out.push_back(std::move(xi));
    }
    if (!ok)
      throw Error("calderon_samples: could not keep orbits clear of "
                  "support boundaries");
  }
  return out;
}

std::vector<CalderonViolation> calderon_bound_check(
    const std::vector<FreqFunction>& Psi, const Dilation& B,
    const std::vector<Vec>& xi_samples, int J, double C, double tol) {
  std::vector<Mat> pw = power_table(B.A, J);
  std::vector<CalderonViolation> out;
  for (const Vec& xi : xi_samples) {
    double total = 0;
    for (int j = -J; j <= J; ++j) {
      Vec z = pw[J - j] * xi;
      for (const auto& psi : Psi) total += std::norm(psi.eval(z));
    }
    if (total > C + tol) out.push_back({xi, total});
  }
  return out;
}

double min_split_f_norm(const Region& R, const SubspaceSplit& split,
                        long long samples, std::optional<std::uint64_t> seed) {
  BoundingBox box = R.bounding_box();
  for (int d = 0; d < box.dim(); ++d)
    if (!std::isfinite(box.lo(d)) || !std::isfinite(box.hi(d)))
      throw Error("min_split_f_norm: region is unbounded");
  std::uint64_t s = resolve_seed(seed ? &*seed : nullptr, 0);
  double best = std::numeric_limits<double>::infinity();
  long long hits = 0;
  for (long long i = 0; i < samples; ++i) {
    Philox g = substream(s, (std::uint64_t)i);
    Vec x = draw_in_box(box, g);
    if (!R.contains(x)) continue;
    ++hits;
    best = std::min(best, split.f_norm(x));
  }
  if (hits == 0)
    throw EmptyBody("min_split_f_norm: no interior samples hit the region");
  return best;
}

LICReport lic_functional(const std::vector<FreqFunction>& Psi,
                         const Dilation& A, const Lattice& G,
                         const TestFunction& f, int J, int K_lat,
                         const McOptions& opt) {
  if (J < 0) throw Error("lic_functional: J must be nonnegative");
  if (Psi.empty()) throw EmptyBody("lic_functional: no generators");
  const int n = A.n();
  if (f.support.dim() != n)
    throw Error("lic_functional: dimension mismatch");
  const Mat Bt = A.A.transpose();
  const Lattice Gs = dual(G);

  BoundingBox box = f.support.bounding_box();
  for (int d = 0; d < n; ++d)
    if (!std::isfinite(box.lo(d)) || !std::isfinite(box.hi(d)))
      throw Error("lic_functional: test support is unbounded");
  const double vol = box.volume();
  if (vol <= 0) throw EmptyBox("lic_functional: degenerate support box");

  const long long N = std::max<long long>(1, opt.n_samples);
  const std::uint64_t seed =
      resolve_seed(opt.seed ? &*opt.seed : nullptr, 0);

  std::vector<Vec> pts((std::size_t)N);
  std::vector<char> in_T((std::size_t)N);
  for (long long i = 0; i < N; ++i) {
    Philox g = substream(seed, (std::uint64_t)i);
    pts[(std::size_t)i] = draw_in_box(box, g);
    in_T[(std::size_t)i] = f.support.contains(pts[(std::size_t)i]) ? 1 : 0;
  }

  const double D = (box.hi - box.lo).norm() * (1 + 1e-9);
  const double c2 = f.sup_norm * f.sup_norm;
  std::vector<Mat> pw = power_table(Bt, J);
  const Dilation Bd = make_dilation(Bt);

  std::vector<double> acc((std::size_t)N, 0.0);
  std::vector<int> orbit_hits((std::size_t)N, 0);
  LICReport rep;
  rep.samples = N;

  const int cp1 = J / 4, cp2 = J / 2;
  auto record = [&](int level) {
    double total = 0;
    for (double a : acc) total += a;
    rep.checkpoints.push_back({level, vol * total / (double)N});
  };

  std::vector<double> weight((std::size_t)N);
  for (int level = 0; level <= J; ++level) {
    for (int sgn = 0; sgn < (level == 0 ? 1 : 2); ++sgn) {
      const int j = sgn == 0 ? level : -level;
      const Mat& Mback = pw[J - j];  // B^{-j}
      std::vector<long long> active;
      for (long long m = 0; m < N; ++m) {
        Vec z = Mback * pts[(std::size_t)m];
        double wgt = 0;
        for (const auto& psi : Psi) wgt += std::norm(psi.eval(z));
        weight[(std::size_t)m] = wgt;
        if (in_T[(std::size_t)m] && f.support.contains(z))
          ++orbit_hits[(std::size_t)m];
        if (wgt > 0 && in_T[(std::size_t)m]) active.push_back(m);
      }
      if (active.empty()) continue;
      // Translations with |B^j k| below the support diameter; the dilated
      // ball engine escalates precision for deep exponents.
      std::vector<Vec> ks;
      try {
        enumerate_in_dilated_ball(
            Gs, Bd, -j, D,
            [&](const Vec& k) {
              ks.push_back(k);
              return true;
            },
            EnumOptions{});
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "j=" << j << ": translation set skipped (" << e.what() << ")";
        rep.notes.push_back(msg.str());
        continue;
      }
      if ((long long)ks.size() > K_lat) {
        std::sort(ks.begin(), ks.end(), [&](const Vec& a, const Vec& b) {
          double na = (pw[J + j] * a).squaredNorm();
          double nb = (pw[J + j] * b).squaredNorm();
          if (na != nb) return na < nb;
          return std::lexicographical_compare(a.data(), a.data() + a.size(),
                                              b.data(), b.data() + b.size());
        });
        ks.resize((std::size_t)K_lat);
        rep.k_capped = true;
      }
      for (const Vec& k : ks) {
        Vec shift = pw[J + j] * k;  // B^j k
        for (long long m : active) {
          if (f.support.contains(pts[(std::size_t)m] + shift))
            acc[(std::size_t)m] += c2 * weight[(std::size_t)m];
        }
      }
      double running = 0;
      for (double a : acc) running += a;
      if (vol * running / (double)N > 1e9) {
        std::ostringstream msg;
        msg << "lic_functional: partial sum passed 1e9 at |j| <= " << level
            << "; treat as divergence evidence";
        throw Overflow(msg.str());
      }
    }
    if (level == cp1 || level == cp2) record(level);
  }
  record(J);

  double mean = 0;
  for (double a : acc) mean += a;
  mean /= (double)N;
  double var = 0;
  for (double a : acc) var += (a - mean) * (a - mean);
  var /= (double)N;
  rep.value = vol * mean;
  rep.stderr_ = vol * std::sqrt(var / (double)N);
  for (long long m = 0; m < N; ++m)
    rep.K_orbit = std::max(rep.K_orbit, orbit_hits[(std::size_t)m]);

  // A zero first checkpoint with later mass reads as an infinite ratio.
  const double first = rep.checkpoints.front().second;
  const double last = rep.checkpoints.back().second;
  rep.divergence_evidence = last > 1e3 * first;
  return rep;
}

std::pair<FreqFunction, LICCounterexampleSpec> lic_counterexample_psi(
    const Dilation& B, const Lattice& Gdual, double r, LICSide side, int I,
    long long search_limit, const EnumOptions& opt) {
  if (I < 1) throw Error("lic_counterexample_psi: need I >= 1");
  if (r <= 0) throw Error("lic_counterexample_psi: need r > 0");
  SubspaceSplit split = ef_split(B);
  if (split.dim_F() == 0)
    throw NoExpansionOnF("lic_counterexample_psi: no expanding part");

  double kappa_F = std::numeric_limits<double>::infinity();
  for (const auto& lam : B.spectral.eigenvalues) {
    double m = std::abs(lam);
    if (m > 1 + 1e-9) kappa_F = std::min(kappa_F, m);
  }
  const int n = B.n();
  const double Pn = spectral_norm(split.projection);
  const double Qn =
      spectral_norm(Mat(Mat::Identity(n, n) - split.projection));
  const double kappa = std::max(Pn, Qn);

  LICCounterexampleSpec spec;
  spec.side = side;
  spec.r = r;
  spec.s = 1.1 * (kappa + Pn) * r;
  spec.q = kappa_F * spec.s;
  spec.p = spec.s;
  spec.S = qset(split, spec.p, spec.q, spec.s);
  spec.T = qset(split, spec.p + kappa * r, spec.q + kappa * r,
                spec.s - kappa * r);

  // v_j = #(B^j dual ∩ ball r) = #(dual ∩ B^{-j} ball r)
  auto count_v = [&](long long j) -> double {
    try {
      return (double)count_in_dilated_ball(Gdual, B, -j, r, opt);
    } catch (const Overflow&) {
      return (double)opt.cap;
    }
  };

  const double log_det = std::log(B.det_abs);
  long long j = side == LICSide::NegJ ? -1 : 0;
  const long long step = side == LICSide::NegJ ? -1 : 1;
  for (int i = 1; i <= I; ++i) {
    const double need = std::pow(2.0, i);
    bool found = false;
    for (; std::llabs(j) <= search_limit; j += step) {
      double v;
      try {
        v = count_v(j);
      } catch (const Error&) {
        continue;  // precision guard tripped; skip this exponent
      }
      double w = v * std::exp((double)j * log_det);
      double sel = side == LICSide::NegJ ? w : v;
      if (sel >= need) {
        spec.j_i.push_back(j);
        spec.v.push_back(v);
        spec.w.push_back(w);
        spec.inv_sum += 1.0 / sel;
        j += step;
        found = true;
        break;
      }
    }
    if (!found) {
      std::ostringstream msg;
      msg << "lic_counterexample_psi: no exponent with selected count >= "
          << need << " within |j| <= " << search_limit << " (step " << i
          << " of " << I << ")";
      throw SearchBudgetExceeded(msg.str());
    }
  }

  FreqFunction psi;
  psi.disjoint = true;
  for (std::size_t i = 0; i < spec.j_i.size(); ++i) {
    Mat Mj = matrix_power(B.A, -spec.j_i[i]);
    Mat Mj_inv = matrix_power(B.A, spec.j_i[i]);
    psi.terms.push_back(
        {1.0 / std::sqrt(spec.v[i]), linear_image(Mj, Mj_inv, spec.S)});
  }
  return {std::move(psi), std::move(spec)};
}

ResidualReport dual_eq_residual(const std::vector<FreqFunction>& Psi,
                                const std::vector<FreqFunction>& Phi,
                                const Dilation& A, const Lattice& G,
                                const std::vector<Vec>& alphas,
                                const std::vector<Vec>& xi_samples, int J,
                                double tol_mem) {
  if (Psi.size() != Phi.size())
    throw Error("dual_eq_residual: generator count mismatch");
  const Mat Bt = A.A.transpose();
  const Lattice Gs = dual(G);
  std::vector<Mat> pw = power_table(Bt, J);

  ResidualReport rep;
  for (const Vec& alpha : alphas) {
    const bool zero_alpha = alpha.isZero(0);
    std::vector<int> js;
    for (int j = -J; j <= J; ++j)
      if (is_member(Gs, pw[J - j] * alpha, tol_mem)) js.push_back(j);
    for (const Vec& xi : xi_samples) {
      ResidualRow row;
      row.alpha = alpha;
      row.xi = xi;
      std::complex<double> t = 0;
      for (int j : js) {
        Vec z = pw[J - j] * xi;
        Vec zs = pw[J - j] * (xi + alpha);
        for (std::size_t l = 0; l < Psi.size(); ++l)
          t += Psi[l].eval(z) * std::conj(Phi[l].eval(zs));
      }
      row.t = t;
      row.residual = zero_alpha ? std::abs(t - 1.0) : std::abs(t);
      if (zero_alpha)
        rep.max_residual_zero_alpha =
            std::max(rep.max_residual_zero_alpha, row.residual);
      else
        rep.max_residual_other = std::max(rep.max_residual_other, row.residual);
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

ResidualReport char_eq_residual(const std::vector<FreqFunction>& Psi,
                                const Dilation& A, const Lattice& G,
                                const std::vector<Vec>& alphas,
                                const std::vector<Vec>& xi_samples, int J,
                                double tol_mem) {
  return dual_eq_residual(Psi, Psi, A, G, alphas, xi_samples, J, tol_mem);
}

MsfCertificate msf_certificate(const Dilation& B, const Lattice& Gdual,
                               double r, long long j_min, long long j_max,
                               const EnumOptions& opt) {
  if (r <= 0) throw Error("msf_certificate: need r > 0");
  if (j_min > j_max) throw Error("msf_certificate: empty exponent range");
  MsfCertificate cert;
  for (long long j = j_min; j <= j_max; ++j) {
    long long c;
    try {
      c = count_in_dilated_ball(Gdual, B, j, r, opt);
    } catch (const Overflow&) {
      continue;  // count cap exceeded, certainly more than the origin
    } catch (const IllConditioned&) {
      cert.skipped_j.push_back(j);
      continue;
    }
    if (c == 1) {
      cert.certifying_j.push_back(j);
      if (j < 0)
        ++cert.neg_count;
      else
        ++cert.pos_count;
    }
  }
  return cert;
}

}  // namespace latscope
