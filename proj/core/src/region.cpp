#include "latscope/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "latscope/errors.hpp"
#include "latscope/rng.hpp"

namespace latscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using NodePtr = std::shared_ptr<const Region::Node>;

NodePtr combine(Region::Kind k, const Region& a, const Region& b) {
  if (!a.valid() || !b.valid())
    throw Error("region combinator: empty operand");
  if (a.dim() != b.dim())
    throw Error("region combinator: dimension mismatch");
  auto n = std::make_shared<Region::Node>();
  n->kind = k;
  n->dim = a.dim();
  n->a = std::make_shared<Region::Node>(a.root());
  n->b = std::make_shared<Region::Node>(b.root());
  return n;
}

}  // namespace

bool BoundingBox::degenerate() const {
  if (lo.size() == 0 || lo.size() != hi.size()) return true;
  for (int i = 0; i < lo.size(); ++i)
    if (!std::isfinite(lo(i)) || !std::isfinite(hi(i)) || !(hi(i) > lo(i)))
      return true;
  return false;
}

double BoundingBox::volume() const {
  double v = 1.0;
  for (int i = 0; i < lo.size(); ++i) v *= hi(i) - lo(i);
  return v;
}

const Region::Node& Region::root() const {
  if (!node_) throw Error("empty region");
  return *node_;
}

Region ball(const Vec& center, double radius) {
  if (!(radius > 0)) throw Error("ball: radius must be positive");
  auto n = std::make_shared<Region::Node>();
  n->kind = Region::Kind::Ball;
  n->dim = (int)center.size();
  n->center = center;
  n->radius = radius;
  return Region(std::move(n));
}

Region box_region(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw Error("box: bad bounds");
  for (int i = 0; i < lo.size(); ++i)
    if (!std::isfinite(lo(i)) || !std::isfinite(hi(i)) || !(hi(i) > lo(i)))
      throw Error("box: need finite lo < hi in every coordinate");
  auto n = std::make_shared<Region::Node>();
  n->kind = Region::Kind::Box;
  n->dim = (int)lo.size();
  n->lo = lo;
  n->hi = hi;
  return Region(std::move(n));
}

Region ellipsoid_region(const Mat& M, double level) {
  if (M.rows() != M.cols() || M.rows() == 0)
    throw Error("ellipsoid: matrix must be square");
  if (!(level > 0)) throw Error("ellipsoid: level must be positive");
  if (smallest_singular_value(M) <= 1e-12 * std::max(1.0, spectral_norm(M)))
    throw Error("ellipsoid: matrix must be invertible");
  auto n = std::make_shared<Region::Node>();
  n->kind = Region::Kind::Ellipsoid;
  n->dim = (int)M.rows();
  n->M = M;
  n->level = level;
  return Region(std::move(n));
}

Region qset(const SubspaceSplit& split, double p, double q, double s) {
  if (!(p > 0) || !(q > 0) || !(s >= 0) || (std::isfinite(q) && !(s < q)))
    throw Error("qset: need p,q > 0 and 0 <= s < q");
  auto n = std::make_shared<Region::Node>();
  n->kind = Region::Kind::QSet;
  n->dim = split.dim_E() + split.dim_F();
  if (n->dim == 0) throw Error("qset: empty split");
  n->split = split;
  n->p = p;
  n->q = q;
  n->s = s;
  return Region(std::move(n));
}

Region linear_image(const Mat& M, const Region& R) {
  if (!R.valid()) throw Error("linear_image: empty region");
  if (M.rows() != M.cols() || (int)M.rows() != R.dim())
    throw Error("linear_image: matrix shape mismatch");
  double smin = smallest_singular_value(M);
  if (smin <= 1e-12 * std::max(1.0, spectral_norm(M)))
    throw Error("linear_image: matrix must be invertible");
  auto n = std::make_shared<Region::Node>();
  n->kind = Region::Kind::Image;
  n->dim = R.dim();
  n->M = M;
  n->M_inv = M.inverse();
  n->sigma_min = smin;
  n->a = std::make_shared<Region::Node>(R.root());
  return Region(std::move(n));
}

Region linear_image(const Mat& M, const Mat& M_inv, const Region& R) {
  if (!R.valid()) throw Error("linear_image: empty region");
  if (M.rows() != M.cols() || (int)M.rows() != R.dim() ||
      M_inv.rows() != M.rows() || M_inv.cols() != M.cols())
    throw Error("linear_image: matrix shape mismatch");
  if (!(M * M_inv - Mat::Identity(M.rows(), M.cols())).isZero(1e-6))
    throw Error("linear_image: supplied inverse does not match");
  auto n = std::make_shared<Region::Node>();
  n->kind = Region::Kind::Image;
  n->dim = R.dim();
  n->M = M;
  n->M_inv = M_inv;
  n->sigma_min = smallest_singular_value(M);
  n->a = std::make_shared<Region::Node>(R.root());
  return Region(std::move(n));
}

Region region_union(const Region& a, const Region& b) {
  return Region(combine(Region::Kind::Union, a, b));
}
Region region_intersect(const Region& a, const Region& b) {
  return Region(combine(Region::Kind::Intersect, a, b));
}
Region region_diff(const Region& a, const Region& b) {
  return Region(combine(Region::Kind::Diff, a, b));
}

namespace {

bool node_contains(const Region::Node& n, const Vec& x);

bool qset_contains(const Region::Node& n, const Vec& x) {
  double e = n.split.dim_E() ? n.split.e_norm(x) : 0.0;
  double f = n.split.dim_F() ? n.split.f_norm(x) : 0.0;
  return e < n.p && f > n.s && f < n.q;
}

bool node_contains(const Region::Node& n, const Vec& x) {
  switch (n.kind) {
    case Region::Kind::Ball:
      return (x - n.center).norm() < n.radius;
    case Region::Kind::Box:
      for (int i = 0; i < n.dim; ++i)
        if (!(x(i) >= n.lo(i) && x(i) < n.hi(i))) return false;
      return true;
    case Region::Kind::Ellipsoid:
      return (n.M * x).norm() <= n.level;
    case Region::Kind::QSet:
      return qset_contains(n, x);
    case Region::Kind::Image:
      return node_contains(*n.a, n.M_inv * x);
    case Region::Kind::Union:
      return node_contains(*n.a, x) || node_contains(*n.b, x);
    case Region::Kind::Intersect:
      return node_contains(*n.a, x) && node_contains(*n.b, x);
    case Region::Kind::Diff:
      return node_contains(*n.a, x) && !node_contains(*n.b, x);
  }
  return false;
}

double node_margin(const Region::Node& n, const Vec& x) {
  switch (n.kind) {
    case Region::Kind::Ball:
      return n.radius - (x - n.center).norm();
    case Region::Kind::Box: {
      double m = kInf;
      for (int i = 0; i < n.dim; ++i)
        m = std::min({m, x(i) - n.lo(i), n.hi(i) - x(i)});
      return m;
    }
    case Region::Kind::Ellipsoid:
      return n.level - (n.M * x).norm();
    case Region::Kind::QSet: {
      double m = kInf;
      if (n.split.dim_E() && std::isfinite(n.p))
        m = std::min(m, n.p - n.split.e_norm(x));
      double f = n.split.dim_F() ? n.split.f_norm(x) : 0.0;
      m = std::min(m, f - n.s);
      if (std::isfinite(n.q)) m = std::min(m, n.q - f);
      return m;
    }
    case Region::Kind::Image:
      return n.sigma_min * node_margin(*n.a, n.M_inv * x);
    case Region::Kind::Union:
      return std::max(node_margin(*n.a, x), node_margin(*n.b, x));
    case Region::Kind::Intersect:
      return std::min(node_margin(*n.a, x), node_margin(*n.b, x));
    case Region::Kind::Diff:
      return std::min(node_margin(*n.a, x), -node_margin(*n.b, x));
  }
  return -kInf;
}

BoundingBox node_bbox(const Region::Node& n) {
  BoundingBox bb;
  bb.lo = Vec::Constant(n.dim, -kInf);
  bb.hi = Vec::Constant(n.dim, kInf);
  switch (n.kind) {
    case Region::Kind::Ball:
      bb.lo = n.center.array() - n.radius;
      bb.hi = n.center.array() + n.radius;
      break;
    case Region::Kind::Box:
      bb.lo = n.lo;
      bb.hi = n.hi;
      break;
    case Region::Kind::Ellipsoid: {
      Mat Minv = n.M.inverse();
      for (int i = 0; i < n.dim; ++i) {
        double e = n.level * Minv.row(i).norm();
        bb.lo(i) = -e;
        bb.hi(i) = e;
      }
      break;
    }
    case Region::Kind::QSet:
      if (std::isfinite(n.p) && std::isfinite(n.q)) {
        double e = (n.split.dim_E() ? n.p : 0.0) + n.q;
        bb.lo = Vec::Constant(n.dim, -e);
        bb.hi = Vec::Constant(n.dim, e);
      }
      break;
    case Region::Kind::Image: {
      BoundingBox in = node_bbox(*n.a);
      bool finite = true;
      for (int i = 0; i < n.dim; ++i)
        finite = finite && std::isfinite(in.lo(i)) && std::isfinite(in.hi(i));
      if (!finite) break;
      bb.lo = Vec::Constant(n.dim, kInf);
      bb.hi = Vec::Constant(n.dim, -kInf);
      for (unsigned mask = 0; mask < (1u << n.dim); ++mask) {
        Vec c(n.dim);
        for (int i = 0; i < n.dim; ++i)
          c(i) = (mask >> i) & 1 ? in.hi(i) : in.lo(i);
        Vec y = n.M * c;
        bb.lo = bb.lo.cwiseMin(y);
        bb.hi = bb.hi.cwiseMax(y);
      }
      break;
    }
    case Region::Kind::Union: {
      BoundingBox x = node_bbox(*n.a), y = node_bbox(*n.b);
      bb.lo = x.lo.cwiseMin(y.lo);
      bb.hi = x.hi.cwiseMax(y.hi);
      break;
    }
    case Region::Kind::Intersect: {
      BoundingBox x = node_bbox(*n.a), y = node_bbox(*n.b);
      bb.lo = x.lo.cwiseMax(y.lo);
      bb.hi = x.hi.cwiseMin(y.hi);
      break;
    }
    case Region::Kind::Diff:
      bb = node_bbox(*n.a);
      break;
  }
  return bb;
}

}  // namespace

bool Region::contains(const Vec& x) const {
  if (!node_) return false;
  if ((int)x.size() != node_->dim)
    throw Error("region contains: dimension mismatch");
  return node_contains(*node_, x);
}

double Region::boundary_margin(const Vec& x) const {
  if (!node_) return -kInf;
  if ((int)x.size() != node_->dim)
    throw Error("region margin: dimension mismatch");
  return node_margin(*node_, x);
}

BoundingBox Region::bounding_box() const {
  if (!node_) throw Error("empty region");
  return node_bbox(*node_);
}

namespace {

Vec box_point(const BoundingBox& bb, const double* u) {
  Vec x(bb.dim());
  for (int i = 0; i < bb.dim(); ++i)
    x(i) = bb.lo(i) + u[i] * (bb.hi(i) - bb.lo(i));
  return x;
}

void audit_faces(const Region& R, const BoundingBox& bb, double band) {
  int n = bb.dim();
  for (int i = 0; i < n; ++i) {
    for (int side = 0; side < 2; ++side) {
      for (int k = 0; k < 8; ++k) {
        auto u = halton_point(k * (2 * n) + 2 * i + side, n);
        Vec x = box_point(bb, u.data());
        x(i) = side ? bb.hi(i) : bb.lo(i);
        if (R.contains(x) && R.boundary_margin(x) > band)
          throw Error("measure_mc: region extends beyond the box");
      }
    }
  }
}

}  // namespace

MeasureEstimate measure_mc(const Region& R, const BoundingBox& bbox,
                           const McOptions& opt) {
  if (bbox.degenerate()) throw EmptyBox("measure_mc: degenerate box");
  if (!R.valid() || R.dim() != bbox.dim())
    throw Error("measure_mc: region/box dimension mismatch");
  if (opt.n_samples <= 0) throw Error("measure_mc: need samples");
  if (R.dim() > 8 && opt.halton)
    throw Error("measure_mc: halton limited to dimension 8");

  audit_faces(R, bbox, opt.band);

  std::uint64_t seed = resolve_seed(opt.seed ? &*opt.seed : nullptr);
  const long long block = 4096;
  const long long nblocks = (opt.n_samples + block - 1) / block;
  std::vector<long long> hits((size_t)nblocks, 0);
  int n = R.dim();

  auto run_block = [&](long long b) {
    long long lo = b * block, hi = std::min(opt.n_samples, lo + block);
    Philox g = substream(seed, (std::uint64_t)b);
    long long h = 0;
    for (long long i = lo; i < hi; ++i) {
      Vec x(n);
      for (int attempt = 0;; ++attempt) {
        if (opt.halton) {
          auto u = halton_point((std::uint64_t)i +
                                    (std::uint64_t)(attempt)*
                                        (std::uint64_t)opt.n_samples,
                                n);
          x = box_point(bbox, u.data());
        } else {
          for (int d = 0; d < n; ++d)
            x(d) = bbox.lo(d) + g.uniform01() * (bbox.hi(d) - bbox.lo(d));
        }
        if (attempt >= 8 || std::abs(R.boundary_margin(x)) >= opt.band) break;
      }
      if (R.contains(x)) ++h;
    }
    hits[(size_t)b] = h;
  };

  int nw = (int)std::max<long long>(1, std::min<long long>(opt.threads, nblocks));
  if (nw == 1) {
    for (long long b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w)
      pool.emplace_back([&, w] {
        for (long long b = w; b < nblocks; b += nw) run_block(b);
      });
    for (auto& t : pool) t.join();
  }

  long long total = 0;
  for (long long h : hits) total += h;
  double vol = bbox.volume();
  double phat = double(total) / double(opt.n_samples);
  MeasureEstimate est;
  est.value = phat * vol;
  est.stderr_ =
      vol * std::sqrt(std::max(phat * (1.0 - phat), 0.0) /
                      double(opt.n_samples));
  est.samples = opt.n_samples;
  est.bbox = bbox;
  return est;
}

Region tiling_annulus(const Dilation& B) {
  Mat Q = lyapunov_form(B);  // throws NotExpanding otherwise
  Eigen::SelfAdjointEigenSolver<Mat> es(Q);
  Mat root = es.operatorSqrt();
  return region_diff(ellipsoid_region(root * B.A.inverse(), 1.0),
                     ellipsoid_region(root, 1.0));
}

TilingReport tiling_check(const Dilation& B, const Region& S,
                          const TilingSampleSpec& spec, int J) {
  int n = B.n();
  if (S.dim() != n) throw Error("tiling_check: dimension mismatch");
  if (J <= 0) throw Error("tiling_check: J must be positive");
  if (!(spec.r_min > 0 && spec.r_max > spec.r_min))
    throw Error("tiling_check: bad sampling annulus");

  std::vector<Mat> pw((size_t)(2 * J + 1));  // pw[j+J] = B^{-j}
  pw[(size_t)J] = Mat::Identity(n, n);
  Mat Binv = B.A.inverse();
  for (int j = 1; j <= J; ++j) {
    pw[(size_t)(J + j)] = Binv * pw[(size_t)(J + j - 1)];
    pw[(size_t)(J - j)] = B.A * pw[(size_t)(J - j + 1)];
  }

  std::uint64_t seed = resolve_seed(spec.seed ? &*spec.seed : nullptr);
  const long long block = 1024;
  const long long nblocks = (spec.n_samples + block - 1) / block;

  struct BlockOut {
    long long singles = 0;
    std::vector<Vec> multi, uncovered;
  };
  std::vector<BlockOut> outs((size_t)nblocks);

  double rlo_n = std::pow(spec.r_min, n), rhi_n = std::pow(spec.r_max, n);
  auto draw_annulus = [&](Philox& g) {
    Vec xi(n);
    double nrm = 0;
    do {
      for (int d = 0; d < n; ++d) xi(d) = g.normal();
      nrm = xi.norm();
    } while (nrm < 1e-300);
    double rad = std::pow(rlo_n + g.uniform01() * (rhi_n - rlo_n), 1.0 / n);
    return Vec(xi * (rad / nrm));
  };

  auto run_block = [&](long long b) {
    long long lo = b * block, hi = std::min(spec.n_samples, lo + block);
    Philox g = substream(seed, (std::uint64_t)b);
    BlockOut& out = outs[(size_t)b];
    for (long long i = lo; i < hi; ++i) {
      Vec xi(n);
      bool clean = false;
      for (int attempt = 0; attempt < spec.max_resample && !clean; ++attempt) {
        xi = draw_annulus(g);
        clean = true;
        for (auto& P : pw)
          if (std::abs(S.boundary_margin(P * xi)) < spec.band) {
            clean = false;
            break;
          }
      }
      int cover = 0;
      for (auto& P : pw)
        if (S.contains(P * xi)) ++cover;
      if (cover == 1) {
        ++out.singles;
      } else if (cover > 1) {
        if (out.multi.size() < 100) out.multi.push_back(xi);
      } else {
        if (out.uncovered.size() < 100) out.uncovered.push_back(xi);
      }
    }
  };

  int nw =
      (int)std::max<long long>(1, std::min<long long>(spec.threads, nblocks));
  if (nw == 1) {
    for (long long b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w)
      pool.emplace_back([&, w] {
        for (long long b = w; b < nblocks; b += nw) run_block(b);
      });
    for (auto& t : pool) t.join();
  }

  TilingReport rep;
  rep.samples = spec.n_samples;
  long long singles = 0;
  for (auto& o : outs) {
    singles += o.singles;
    for (auto& w : o.multi)
      if (rep.multi_cover_witnesses.size() < 100)
        rep.multi_cover_witnesses.push_back(w);
    for (auto& w : o.uncovered)
      if (rep.uncovered_witnesses.size() < 100)
        rep.uncovered_witnesses.push_back(w);
  }
  rep.single_cover_rate = double(singles) / double(spec.n_samples);
  return rep;
}

PushResult push_tiling_toward_F(const Region& S0, const Dilation& B,
                                const SubspaceSplit& split, double s,
                                double eps, const McOptions& opt) {
  if (split.dim_F() == 0)
    throw NoExpansionOnF("push_tiling_toward_F: split has trivial F");
  if (!(s > 0) || !(eps > 0 && eps < 1))
    throw Error("push_tiling_toward_F: need s > 0 and eps in (0,1)");

  BoundingBox bb0 = S0.bounding_box();
  MeasureEstimate m0 = measure_mc(S0, bb0, opt);
  if (!(m0.value > 0))
    throw Error("push_tiling_toward_F: S0 measure estimate is zero");
  double target = 0.5 * eps * m0.value;

  auto sliver = [&](double delta) {
    return measure_mc(region_diff(S0, qset(split, kInf, kInf, delta)), bb0,
                      opt);
  };

  // largest delta <= s whose sliver near E stays under the budget
  double delta = s;
  MeasureEstimate sl = sliver(delta);
  if (sl.value + 3.0 * sl.stderr_ > target) {
    double hi = delta, lo = delta;
    int k = 0;
    for (; k < 40; ++k) {
      lo *= 0.5;
      sl = sliver(lo);
      if (sl.value + 3.0 * sl.stderr_ <= target) break;
    }
    if (k == 40)
      throw SearchBudgetExceeded(
          "push_tiling_toward_F: no admissible delta found");
    for (int it = 0; it < 20; ++it) {
      double mid = 0.5 * (lo + hi);
      MeasureEstimate sm = sliver(mid);
      if (sm.value + 3.0 * sm.stderr_ <= target)
        lo = mid;
      else
        hi = mid;
    }
    delta = lo;
  }

  // smallest j pushing {|x_F| > delta} inside {|x_F| > s}, sampled over
  // F directions at the worst-case radius
  std::uint64_t seed = resolve_seed(opt.seed ? &*opt.seed : nullptr);
  Philox g = substream(seed, 0x9e3779b9u);
  std::vector<Vec> probes;
  for (int i = 0; i < 256; ++i) {
    Vec w(split.dim_F());
    for (int d = 0; d < split.dim_F(); ++d) w(d) = g.normal();
    Vec f = split.F_basis * w;
    double fn = split.f_norm(f);
    if (fn <= 0) continue;
    probes.push_back(f * (delta * (1.0 + 1e-6) / fn));
  }
  long long j = -1;
  Mat Bj = Mat::Identity(B.n(), B.n());
  for (int cand = 0; cand <= 200; ++cand) {
    bool ok = true;
    for (auto& f : probes)
      if (!(split.f_norm(Bj * f) > s)) {
        ok = false;
        break;
      }
    if (ok) {
      j = cand;
      break;
    }
    Bj = B.A * Bj;
  }
  if (j < 0)
    throw SearchBudgetExceeded(
        "push_tiling_toward_F: no admissible power found within budget");

  Region Q_delta = qset(split, kInf, kInf, delta);
  Region S_j = region_union(
      linear_image(matrix_power(B.A, j), region_intersect(S0, Q_delta)),
      region_diff(S0, Q_delta));

  // fit containing p, q from sampled points of S_j
  BoundingBox bbj = S_j.bounding_box();
  Philox h = substream(seed, 0xbb67ae85u);
  double pmax = 0, qmax = 0;
  long long found = 0;
  for (long long i = 0; i < 50'000 && found < 10'000; ++i) {
    Vec x(S_j.dim());
    for (int d = 0; d < S_j.dim(); ++d)
      x(d) = bbj.lo(d) + h.uniform01() * (bbj.hi(d) - bbj.lo(d));
    if (!S_j.contains(x)) continue;
    ++found;
    if (split.dim_E()) pmax = std::max(pmax, split.e_norm(x));
    qmax = std::max(qmax, split.f_norm(x));
  }
  double p_fit = split.dim_E() ? pmax * 1.05 + 1e-9 : 1.0;
  double q_fit = qmax * 1.05 + 1e-9;

  MeasureEstimate mj = measure_mc(S_j, bbj, opt);
  MeasureEstimate md =
      measure_mc(region_diff(S_j, qset(split, p_fit, q_fit, s)), bbj, opt);

  PushResult res;
  res.S = S_j;
  res.delta = delta;
  res.j = j;
  res.p = p_fit;
  res.q = q_fit;
  res.deficit_rel = mj.value > 0 ? md.value / mj.value : 0.0;
  res.deficit_stderr = mj.value > 0 ? md.stderr_ / mj.value : 0.0;
  return res;
}

}  // namespace latscope
