#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latscope/lattice.hpp"
#include "latscope/region.hpp"

namespace latscope {

// Finite linear combination of indicator functions on region supports,
// representing a frequency-side function psi-hat.
struct FreqTerm {
  std::complex<double> coeff;
  Region support;
};

struct FreqFunction {
  std::vector<FreqTerm> terms;
  bool disjoint = false;  // caller declares pairwise-disjoint supports

  int dim() const;
  std::complex<double> eval(const Vec& xi) const;
  // smallest |margin| over the term supports, for boundary-band tests
  double min_abs_margin(const Vec& xi) const;
};

FreqFunction freq_indicator(Region support,
                            std::complex<double> coeff = 1.0);

// chi on [-1,-1/2) u [1/2,1): the classical frequency-tile wavelet.
FreqFunction shannon_msf();

// Squared L2 norm: exact-by-parts for declared-disjoint supports, Monte
// Carlo over the union's box otherwise.
MeasureEstimate l2_norm_sq(const FreqFunction& psi,
                           const McOptions& opt = {});

struct CalderonRow {
  Vec xi;
  double sum = 0;       // truncation |j| <= J
  double half_sum = 0;  // truncation |j| <= J/2
};

struct CalderonReport {
  std::vector<CalderonRow> rows;
  bool growth_flag = false;  // some sample still climbing past J/2
  double tol_growth = 0;
};

// Sum of |psi-hat(B^{-j} xi)|^2 over |j| <= J per sample, evaluated exactly.
CalderonReport calderon_sum(const FreqFunction& psi, const Dilation& B,
                            const std::vector<Vec>& xi_samples, int J,
                            double tol_growth = 1e-9);

// Samples from an annulus whose whole orbit under B^{-j}, |j| <= J, stays
// clear of every support boundary.
std::vector<Vec> calderon_samples(const FreqFunction& psi, const Dilation& B,
                                  long long count, int J,
                                  std::optional<std::uint64_t> seed = {},
                                  double r_min = 0.1, double r_max = 10.0,
                                  double band = 1e-9);

struct CalderonViolation {
  Vec xi;
  double sum = 0;
};

// Flags samples where the multi-generator truncated sum exceeds C + tol.
std::vector<CalderonViolation> calderon_bound_check(
    const std::vector<FreqFunction>& Psi, const Dilation& B,
    const std::vector<Vec>& xi_samples, int J, double C, double tol = 1e-9);

struct TestFunction {
  Region support;
  double sup_norm = 1.0;
};

// Smallest f-part split norm over sampled points of the region: positive
// means the closure stays away from the non-expanding subspace E.
double min_split_f_norm(const Region& R, const SubspaceSplit& split,
                        long long samples = 20'000,
                        std::optional<std::uint64_t> seed = {});

struct LICReport {
  // (truncation level, partial sum) at roughly J/4, J/2 and J
  std::vector<std::pair<int, double>> checkpoints;
  double value = 0;
  double stderr_ = 0;
  bool divergence_evidence = false;
  int K_orbit = 0;  // max orbit hits of supp f among the samples
  long long samples = 0;
  bool k_capped = false;  // some translation set was cut at K_lat
  std::vector<std::string> notes;
};

// Truncated local-integrability functional of the wavelet system (A, G)
// applied to f: translations run over dual-lattice points that can map the
// support of f-hat back onto itself, the integral is seeded Monte Carlo.
// Throws Overflow past 1e9, which the caller should read as divergence
// evidence, not as a numeric failure.
LICReport lic_functional(const std::vector<FreqFunction>& Psi,
                         const Dilation& A, const Lattice& G,
                         const TestFunction& f, int J, int K_lat = 4096,
                         const McOptions& opt = {});

enum class LICSide { NegJ, PosJ };

struct LICCounterexampleSpec {
  LICSide side = LICSide::NegJ;
  std::vector<long long> j_i;
  std::vector<double> v;  // counts #(B^j dual ∩ ball r) at the chosen j_i
  std::vector<double> w;  // v_j * |det B|^j
  Region S;               // packing shell whose dilates stay disjoint
  double p = 0, q = 0, s = 0;
  double r = 0;
  Region T;               // companion test-function support, away from E
  double inv_sum = 0;     // sum of reciprocals of the selected quantities
};

// Builds the adversarial generator: psi-hat = sum_i v_{j_i}^{-1/2} on
// B^{-j_i}(S), with exponents picked greedily so the selected count doubles
// each step (w_j on the negative side, v_j on the positive side). The
// truncated Calderon sum stays below inv_sum while the LIC blows up.
std::pair<FreqFunction, LICCounterexampleSpec> lic_counterexample_psi(
    const Dilation& B, const Lattice& Gdual, double r, LICSide side, int I,
    long long search_limit = 400, const EnumOptions& opt = {});

struct ResidualRow {
  Vec alpha;
  Vec xi;
  std::complex<double> t;
  double residual = 0;  // |t - 1| at alpha = 0, |t| otherwise
};

struct ResidualReport {
  std::vector<ResidualRow> rows;
  double max_residual_zero_alpha = 0;
  double max_residual_other = 0;
};

// Frame characterization residuals t_alpha(xi) for the system (A, G); the
// frequency-side dilation is A transposed and alphas come from the dual
// lattice. j contributes only when B^{-j} alpha stays in the dual.
ResidualReport char_eq_residual(const std::vector<FreqFunction>& Psi,
                                const Dilation& A, const Lattice& G,
                                const std::vector<Vec>& alphas,
                                const std::vector<Vec>& xi_samples, int J,
                                double tol_mem = 1e-9);

// Mixed version for a candidate dual pair; Phi = Psi reduces exactly to
// char_eq_residual.
ResidualReport dual_eq_residual(const std::vector<FreqFunction>& Psi,
                                const std::vector<FreqFunction>& Phi,
                                const Dilation& A, const Lattice& G,
                                const std::vector<Vec>& alphas,
                                const std::vector<Vec>& xi_samples, int J,
                                double tol_mem = 1e-9);

struct MsfCertificate {
  std::vector<long long> certifying_j;  // dual ∩ B^j(ball r) = {origin}
  std::vector<long long> skipped_j;     // beyond the precision guard
  int neg_count = 0, pos_count = 0;
};

// Exact trivial-intersection exponents: each certifies translational
// packing, hence the existence of a frequency-tile wavelet for the pair.
MsfCertificate msf_certificate(const Dilation& B, const Lattice& Gdual,
                               double r, long long j_min, long long j_max,
                               const EnumOptions& opt = {});

}  // namespace latscope
