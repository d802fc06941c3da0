#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latscope/counting.hpp"
#include "latscope/lattice.hpp"
#include "latscope/rng.hpp"

namespace latscope {

// Product of coordinates.
double norm_form(const Vec& x);

struct NuResult {
  double value = 0;
  Vec witness;
};

// Exact min |Nm(gamma)| over nonzero lattice points with |gamma| < rho.
// Requires rho above the shortest vector length.
NuResult nu(const Lattice& L, double rho, const EnumOptions& opt = {});

struct NmResult {
  double value = 0;
  Vec witness;
  double rho_max = 0;
  bool truncated = true;  // the untruncated inf runs over the whole lattice
};

NmResult nm_lattice(const Lattice& L, double rho_max,
                    const EnumOptions& opt = {});

// QR of an iid normal matrix, R-diagonal signs fixed, then a column flip
// if needed so det = +1.
Mat haar_rotation(int n, Philox& g);

struct NuSample {
  double rho = 0;
  double value = 0;
  Vec witness;
};

struct NuProfile {
  Lattice lattice;
  Mat P, U;
  bool has_U = false;
  std::vector<NuSample> samples;
};

NuProfile nu_scan(const Lattice& L, const Mat& P, const Mat* U,
                  const std::vector<double>& rho_list,
                  const EnumOptions& opt = {});

struct SkriganovRow {
  double rho = 0;
  double nu_value = 0;
  Vec witness;
  double bound = 0;  // (log rho)^{1-n-eps}
  bool pass = false;
};

// Compares nu(P U L, rho) against the slow-decay bound per rho. The bound
// is asymptotic, so small-rho failures are data, not judgments.
std::vector<SkriganovRow> skriganov_scan(const Lattice& L, const Mat& P,
                                         const Mat& U,
                                         const std::vector<double>& rho_list,
                                         double epsilon,
                                         const EnumOptions& opt = {});

struct TrialDiagnostic {
  int index = 0;
  bool pass = false;
  bool errored = false;
  std::string note;
  double sup_ratio = 0;
  Trend trend = Trend::Bounded;
  long long witness_j = 0;
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  int trials = 0;
  int pass_count = 0;
  double growth_factor = 0;
  std::vector<TrialDiagnostic> diagnostics;
};

// Rotates L by an independent Haar rotation per trial, runs the count
// profile, and records whether the verdict stays Bounded. force_identity
// pins U = I to reproduce engineered exceptions.
ExperimentReport ubiquity_experiment(const Dilation& A, const Lattice& L,
                                     double r, int trials, long long j_min,
                                     long long j_max,
                                     std::optional<std::uint64_t> seed = {},
                                     int threads = 1,
                                     bool force_identity = false,
                                     const EnumOptions& opt = {});

struct NormGrowth {
  double lhs = 0;       // |Nm(P^{-1} x)|
  double rhs = 0;       // C_fitted * |det B|^(j + |j| eps)
  double C_fitted = 0;  // max of lhs/denominator over the sweep
};

// Checks the norm-form growth bound at (x, j) for a dilation with a known
// real Jordan basis P; the constant is fitted by sweeping sampled points of
// B^{j'} applied to the r-ball over j' in [-sweep, sweep].
NormGrowth norm_growth_bound(const Dilation& A, const Vec& x, long long j,
                             double epsilon, double r,
                             long long sweep_half_width = 40,
                             int samples_per_j = 64,
                             std::optional<std::uint64_t> seed = {});

struct SpEstimate {
  double value = 0;    // spherical fraction with |Nm(Px)| < theta
  double stderr_ = 0;
  long long samples = 0;
  double shape_ratio = 0;  // value / [theta (1 + log(1/theta))^{n-2}]
};

SpEstimate s_p_estimate(const Mat& P, double theta, long long samples,
                        std::optional<std::uint64_t> seed = {});

}  // namespace latscope
