#pragma once

#include <functional>
#include <vector>

#include "latscope/la.hpp"
#include "latscope/spectral.hpp"

namespace latscope {

struct Lattice {
  Mat basis;       // columns generate the lattice
  double covolume = 0.0;

  int n() const { return static_cast<int>(basis.rows()); }
};

Lattice make_lattice(const Mat& basis);

Lattice dual(const Lattice& L);

// Same lattice, LLL-reduced basis.
Lattice lll_reduce(const Lattice& L, double delta = 0.99);

struct ShortestVec {
  Vec v;
  double norm = 0.0;
};
ShortestVec shortest_vector(const Lattice& L);

struct EnumOptions {
  long long cap = 10'000'000;
};

// Visitor receives each lattice point (ambient coordinates); return false to
// stop early.
using PointVisitor = std::function<bool(const Vec&)>;

// All x in L with |Mx| < r (strict). Double-precision path; requires
// cond(M * basis) <= 1e12.
long long enumerate_in_ellipsoid(const Lattice& L, const Mat& M, double r,
                                 const PointVisitor& visit,
                                 const EnumOptions& opt = {});
std::vector<Vec> enumerate_in_ellipsoid(const Lattice& L, const Mat& M,
                                        double r, const EnumOptions& opt = {});

// Points of L inside A^j(B(0,r)), i.e. |A^{-j} x| < r. The normalizing
// matrix is formed at a working precision chosen from a condition estimate;
// deep exponents escalate to wider floats instead of failing.
long long enumerate_in_dilated_ball(const Lattice& L, const Dilation& A,
                                    long long j, double r,
                                    const PointVisitor& visit,
                                    const EnumOptions& opt = {});
long long count_in_dilated_ball(const Lattice& L, const Dilation& A,
                                long long j, double r,
                                const EnumOptions& opt = {});

// Which precision tier the dilated-ball path would pick (1 = double,
// 2 and 3 = wide floats); used for reporting.
int dilated_ball_tier(const Lattice& L, const Dilation& A, long long j);

struct MinimaResult {
  std::vector<double> minima;    // nondecreasing
  std::vector<Vec> witnesses;    // linearly independent
};

// Successive minima in the Euclidean norm, or in the norm |Mx|.
MinimaResult successive_minima(const Lattice& L, double r_max = 1e4);
MinimaResult successive_minima_norm(const Lattice& L, const Mat& M,
                                    double r_max = 1e4);

struct SymAP {
  std::vector<Vec> generators;
  std::vector<long long> bounds;  // N_i >= 1
  int rank = 0;
  long long cardinality = 1;      // prod(2 N_i + 1)
  long long body_points = 0;      // #(Omega cap Gamma)
  double achieved_ratio = 0.0;    // cardinality / body_points
};

// Proper symmetric arithmetic progression inside Omega = {x : |Mx| < r}.
SymAP arithmetic_progression(const Lattice& L, const Mat& M, double r,
                             const EnumOptions& opt = {});

bool is_member(const Lattice& L, const Vec& x, double tol = 1e-9);

}  // namespace latscope
