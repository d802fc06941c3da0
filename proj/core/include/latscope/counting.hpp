#pragma once

#include <string>
#include <utility>
#include <vector>

#include "latscope/lattice.hpp"

namespace latscope {

struct ProfileRow {
  long long j = 0;
  long long count = 0;    // cap value when overflowed (a lower bound)
  double ratio = 0.0;     // count / max(1, |det A|^j)
  bool overflow = false;
  bool skipped = false;   // row refused by the precision guard
  int tier = 0;
  std::string note;
};

struct CountProfile {
  Dilation dilation;
  Lattice lattice;
  double radius = 0.0;
  std::vector<ProfileRow> rows;
};

// One row per j in [j_min, j_max]. Rows that overflow the cap are flagged
// with count = cap; rows beyond the precision guard are marked skipped.
CountProfile count_profile(const Dilation& A, const Lattice& L, double r,
                           long long j_min, long long j_max, int threads = 1,
                           const EnumOptions& opt = {});

enum class Trend { Bounded, GrowingNegSide, GrowingPosSide };

const char* to_string(Trend t);

struct Verdict {
  double sup_ratio = 0.0;
  Trend trend = Trend::Bounded;
  long long witness_j = 0;       // argmax of the ratio
  long long window_min = 0, window_max = 0;
  bool evidence_only = true;     // finite windows cannot prove boundedness
};

// Quartile rule per side (rows ordered by |j| from the center outward):
// growing when the max ratio of the outer quartile exceeds growth_factor
// times the max ratio of the inner quartile. A side with fewer than 8 usable
// rows is not evaluated; if neither side has 8, WindowTooSmall.
Verdict lce_verdict(const CountProfile& p, double growth_factor = 4.0);

// Planar unipotent shear plus a doubling third axis, with the lattice line
// of slope alpha that realizes unbounded counts for irrational alpha.
std::pair<Dilation, Lattice> shear_counterexample(double alpha,
                                                  double scale = 2.0);

// Five-dimensional variant: a rotation carrying an order-2 block, padded by
// a doubling axis. Counts are theta-independent by construction (the
// rotation factors out of the ball), which tests exercise.
std::pair<Dilation, Lattice> rotation_counterexample(double theta,
                                                     double alpha);

struct PackingReport {
  long long count = 0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;  // meaningful only when spanning
  bool spanning = false;
};

// Volume sandwich for Omega = {x : |Mx| < r}: vol/(2^n covol) <= count, and
// count <= 3^n n! vol/(2^n covol) when the intersected points span R^n.
PackingReport volume_packing_check(const Lattice& L, const Mat& M, double r,
                                   const EnumOptions& opt = {});

enum class LcePrediction { HoldsForAllLattices, LatticeDependent };

const char* to_string(LcePrediction p);

LcePrediction predict_lce(const Dilation& A);

}  // namespace latscope
