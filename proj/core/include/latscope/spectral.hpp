#pragma once

#include <complex>
#include <vector>

#include "latscope/la.hpp"

namespace latscope {

// A Jordan block description. A block with complex_pair=true stands for the
// conjugate pair (lambda, conj(lambda)) and occupies 2*order real dimensions.
struct JordanBlock {
  std::complex<double> lambda;
  int order = 1;
  bool complex_pair = false;
};

struct SpectralData {
  // All n eigenvalues (conjugates included), modulus descending.
  std::vector<std::complex<double>> eigenvalues;
  std::vector<JordanBlock> blocks;
  // Real block-diagonalizing basis when available (always for structured
  // input with a basis, and for detected diagonalizable matrices). Columns
  // follow block order: a real block of order k contributes k columns, a
  // complex-pair block contributes 2k columns (Re,Im interleaved per chain).
  Mat similarity_basis;
  bool structured = false;

  bool has_basis() const { return similarity_basis.size() > 0; }
  double max_modulus() const;
  double min_modulus() const;
};

enum class DilationClass { Expanding, ExpandingOnSubspace, NotExpandingOnSubspace };

const char* to_string(DilationClass c);

// An invertible matrix with cached spectral data.
struct Dilation {
  Mat A;
  SpectralData spectral;
  double det_abs = 0.0;

  int n() const { return static_cast<int>(A.rows()); }
};

Dilation make_dilation(const Mat& A, double tol = 1e-9);
Dilation make_dilation_structured(const Mat& A, std::vector<JordanBlock> blocks,
                                  const Mat& basis = Mat());

// Oblique splitting into the contracting-or-neutral part E (|lambda| <= 1+tol)
// and the expanding part F (|lambda| > 1+tol). Part bases have orthonormal
// columns; the split itself is generally oblique.
struct SubspaceSplit {
  Mat E_basis;     // n x dimE
  Mat F_basis;     // n x dimF
  Mat C;           // [F_basis | E_basis]
  Mat C_inv;
  Mat projection;  // onto span(F_basis) along span(E_basis)

  int dim_E() const { return static_cast<int>(E_basis.cols()); }
  int dim_F() const { return static_cast<int>(F_basis.cols()); }
  // Euclidean norms of the two components of x in the split coordinates.
  double e_norm(const Vec& x) const;
  double f_norm(const Vec& x) const;
};

SpectralData eigen_decompose(const Mat& M, double tol = 1e-9);

DilationClass classify_dilation(const SpectralData& sd, double tol = 1e-9);
DilationClass classify_dilation(const Mat& M, double tol = 1e-9);
DilationClass classify_dilation(const Dilation& d, double tol = 1e-9);

SubspaceSplit ef_split(const Mat& M, const SpectralData& sd, double tol = 1e-9);
SubspaceSplit ef_split(const Mat& M, double tol = 1e-9);
SubspaceSplit ef_split(const Dilation& d, double tol = 1e-9);

// M^j by repeated squaring. Exact for integer matrices with j >= 0 while
// entries stay below 2^53. Throws IllConditioned when the result cannot be
// represented at double range/accuracy.
Mat matrix_power(const Mat& M, long long j);

// Q = sum_{k>=0} (M^-k)^T (M^-k), so M^-T Q M^-1 = Q - I and the ellipsoid
// {x^T Q x <= 1} is mapped strictly inside itself by M^-1.
Mat lyapunov_form(const Mat& M);
Mat lyapunov_form(const Dilation& d);

}  // namespace latscope
