#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "latscope/la.hpp"
#include "latscope/spectral.hpp"

namespace latscope {

struct BoundingBox {
  Vec lo, hi;
  int dim() const { return (int)lo.size(); }
  bool degenerate() const;
  double volume() const;
};

// Immutable set-expression tree over R^n. Membership is evaluated exactly
// from the tree; measure is always estimated by sampling. Conventions:
// balls are open, boxes are half-open [lo, hi), ellipsoids |Mx| <= level
// are closed, QSet {|x_E| < p, s < |x_F| < q} is open.
class Region {
 public:
  enum class Kind { Ball, Box, Ellipsoid, QSet, Image, Union, Intersect, Diff };

  struct Node {
    Kind kind;
    int dim = 0;
    Vec center;           // Ball
    double radius = 0;    // Ball
    Vec lo, hi;           // Box
    Mat M;                // Ellipsoid / Image
    double level = 0;     // Ellipsoid
    SubspaceSplit split;  // QSet
    double p = 0, q = 0, s = 0;
    Mat M_inv;            // Image
    double sigma_min = 0; // Image: smallest singular value of M
    std::shared_ptr<const Node> a, b;
  };

  Region() = default;
  explicit Region(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  bool valid() const { return node_ != nullptr; }
  int dim() const { return node_ ? node_->dim : 0; }
  const Node& root() const;

  bool contains(const Vec& x) const;

  // Signed margin: positive inside, negative outside. Its magnitude is a
  // lower bound on how far x sits from any boundary where membership can
  // flip, each primitive measured in its natural metric (linear images
  // rescale by the smallest singular value). Used for boundary-band
  // resampling, not as an exact distance.
  double boundary_margin(const Vec& x) const;

  // Outer axis-aligned box; entries may be infinite for unbounded sets.
  BoundingBox bounding_box() const;

 private:
  std::shared_ptr<const Node> node_;
};

Region ball(const Vec& center, double radius);
Region box_region(const Vec& lo, const Vec& hi);
Region ellipsoid_region(const Mat& M, double level);
Region qset(const SubspaceSplit& split, double p, double q, double s);
Region linear_image(const Mat& M, const Region& R);
// Variant for extreme but structurally exact maps (deep matrix powers):
// the caller supplies the inverse, and the conditioning guard is skipped.
Region linear_image(const Mat& M, const Mat& M_inv, const Region& R);
Region region_union(const Region& a, const Region& b);
Region region_intersect(const Region& a, const Region& b);
Region region_diff(const Region& a, const Region& b);

struct MeasureEstimate {
  double value = 0;
  double stderr_ = 0;
  long long samples = 0;
  BoundingBox bbox;
};

struct McOptions {
  long long n_samples = 100'000;
  std::optional<std::uint64_t> seed;
  bool halton = false;       // low-discrepancy; stderr then a conservative bound
  int threads = 1;
  double band = 1e-9;        // boundary resampling band
};

// Hit-fraction estimate of |R| over the given box. The caller promises
// R is inside the box; a face audit throws if that visibly fails.
MeasureEstimate measure_mc(const Region& R, const BoundingBox& bbox,
                           const McOptions& opt = {});

// S = B(E) \ E for the Lyapunov ellipsoid E of the expanding dilation B.
// The dilates {B^j S} cover each nonzero point exactly once.
Region tiling_annulus(const Dilation& B);

struct TilingSampleSpec {
  long long n_samples = 10'000;
  double r_min = 0.1, r_max = 10.0;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  double band = 1e-9;
  int max_resample = 64;
};

struct TilingReport {
  double single_cover_rate = 0;
  std::vector<Vec> multi_cover_witnesses;
  std::vector<Vec> uncovered_witnesses;
  long long samples = 0;
};

// For sampled xi != 0, counts #{j in [-J, J] : B^{-j} xi in S}; points whose
// orbit grazes a boundary within the band are resampled.
TilingReport tiling_check(const Dilation& B, const Region& S,
                          const TilingSampleSpec& spec, int J);

struct PushResult {
  Region S;
  double delta = 0;
  long long j = 0;
  double p = 0, q = 0;       // fitted QSet radii for the deficit report
  double deficit_rel = 0;    // |S_j \ Q(p,q,s)| / |S_j|
  double deficit_stderr = 0;
};

// Rebuilds the tiling set S0 so that all but an eps-fraction of it lies in
// Q(p,q,s): the part with |x_F| > delta is dilated by B^j until it clears
// |x_F| > s, the sliver near E stays put. Tiling is preserved.
PushResult push_tiling_toward_F(const Region& S0, const Dilation& B,
                                const SubspaceSplit& split, double s,
                                double eps, const McOptions& opt = {});

}  // namespace latscope
