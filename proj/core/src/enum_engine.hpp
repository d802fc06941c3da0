#pragma once

// Shared enumeration kernel, templated on the working scalar so the same
// code runs in double and in the higher-precision tiers. Sizes are tiny
// (n <= 8), so everything is hand-rolled on fixed arrays.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>

#include "latscope/errors.hpp"
#include "latscope/la.hpp"

namespace latscope::detail {

template <typename Real>
Real r_round(const Real& x) {
  using std::round;
  return round(x);
}
template <typename Real>
Real r_floor(const Real& x) {
  using std::floor;
  return floor(x);
}
template <typename Real>
Real r_ceil(const Real& x) {
  using std::ceil;
  return ceil(x);
}
template <typename Real>
Real r_sqrt(const Real& x) {
  using std::sqrt;
  return sqrt(x);
}
template <typename Real>
Real r_abs(const Real& x) {
  using std::abs;
  return abs(x);
}

template <typename Real>
using Col = std::array<Real, 8>;

template <typename Real>
struct SmallSquare {
  int n = 0;
  std::array<Col<Real>, 8> col;  // column-major

  static SmallSquare identity(int n) {
    SmallSquare m;
    m.n = n;
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) m.col[c][r] = Real(c == r ? 1 : 0);
    return m;
  }

  static SmallSquare from(const Mat& M) {
    SmallSquare m;
    m.n = static_cast<int>(M.rows());
    for (int c = 0; c < m.n; ++c)
      for (int r = 0; r < m.n; ++r) m.col[c][r] = Real(M(r, c));
    return m;
  }

  SmallSquare mul(const SmallSquare& o) const {
    SmallSquare out;
    out.n = n;
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) {
        Real s(0);
        for (int k = 0; k < n; ++k) s += col[k][r] * o.col[c][k];
        out.col[c][r] = s;
      }
    return out;
  }

  // Gauss-Jordan inverse with partial pivoting.
  SmallSquare inverse() const {
    SmallSquare a = *this;
    SmallSquare inv = identity(n);
    for (int p = 0; p < n; ++p) {
      int best = p;
      Real mx = r_abs(a.col[p][p]);
      for (int r = p + 1; r < n; ++r) {
        Real v = r_abs(a.col[p][r]);
        if (v > mx) {
          mx = v;
          best = r;
        }
      }
      if (!(mx > Real(0))) throw IllConditioned("singular matrix in enumeration tier");
      if (best != p)
        for (int c = 0; c < n; ++c) {
          std::swap(a.col[c][p], a.col[c][best]);
          std::swap(inv.col[c][p], inv.col[c][best]);
        }
      Real piv = a.col[p][p];
      for (int c = 0; c < n; ++c) {
        a.col[c][p] /= piv;
        inv.col[c][p] /= piv;
      }
      for (int r = 0; r < n; ++r) {
        if (r == p) continue;
        Real f = a.col[p][r];
        if (f == Real(0)) continue;
        for (int c = 0; c < n; ++c) {
          a.col[c][r] -= f * a.col[c][p];
          inv.col[c][r] -= f * inv.col[c][p];
        }
      }
    }
    return inv;
  }

  SmallSquare power(unsigned long long e) const {
    SmallSquare result = identity(n);
    SmallSquare base = *this;
    while (e > 0) {
      if (e & 1ull) result = result.mul(base);
      e >>= 1;
      if (e > 0) base = base.mul(base);
    }
    return result;
  }
};

// Fincke-Pohst enumeration of {c integer : |W c| < r} streaming lattice-space
// points Y c. Column operations on W are mirrored on Y, so Y c is the point
// of the original lattice corresponding to a coefficient vector of the
// reduced basis.
template <typename Real>
class Enumerator {
 public:
  Enumerator(const Mat& lattice_basis, SmallSquare<Real> W_in)
      : n_(W_in.n), W_(std::move(W_in)) {
    Y_ = SmallSquare<Real>::from(lattice_basis);
  }

  void reduce(double delta = 0.99) {
    sort_columns();
    gram_schmidt();
    int k = 1;
    long long guard = 0;
    while (k < n_) {
      if (++guard > 50'000'000)
        throw Error("basis reduction failed to converge");
      for (int j = k - 1; j >= 0; --j) size_reduce(k, j);
      Real lhs = B_[k];
      Real rhs = (Real(delta) - mu_[k][k - 1] * mu_[k][k - 1]) * B_[k - 1];
      if (lhs >= rhs) {
        ++k;
      } else {
        swap_cols(k - 1, k);
        gram_schmidt();
        k = std::max(k - 1, 1);
      }
    }
  }

  // Squared norm of the shortest Gram-Schmidt vector; lower bound for the
  // squared norm of any nonzero lattice vector.
  Real min_gs_sq() const {
    Real m = B_[0];
    for (int i = 1; i < n_; ++i)
      if (B_[i] < m) m = B_[i];
    return m;
  }

  Real max_col_norm_sq() const {
    Real m(0);
    for (int c = 0; c < n_; ++c) {
      Real s(0);
      for (int r = 0; r < n_; ++r) s += W_.col[c][r] * W_.col[c][r];
      if (s > m) m = s;
    }
    return m;
  }

  // Reduced lattice-space basis column, narrowed to double.
  Vec reduced_point_basis_col(int c) const {
    Vec v(n_);
    for (int r = 0; r < n_; ++r) v(r) = static_cast<double>(Y_.col[c][r]);
    return v;
  }

  // visit may be empty; when set it receives each point in the original
  // (lattice-space) coordinates and can return false to stop early.
  long long run(double radius, long long cap,
                const std::function<bool(const Vec&)>& visit) {
    Real r2 = Real(radius) * Real(radius);
    if (min_gs_sq() >= r2) {
      if (visit) visit(Vec::Zero(n_));
      return 1;
    }
    count_ = 0;
    stopped_ = false;
    dfs(n_ - 1, r2, cap, visit);
    return count_;
  }

 private:
  void sort_columns() {
    for (int i = 0; i < n_; ++i) {
      int best = i;
      Real bn = col_norm_sq(i);
      for (int j = i + 1; j < n_; ++j) {
        Real v = col_norm_sq(j);
        if (v < bn) {
          bn = v;
          best = j;
        }
      }
      if (best != i) swap_cols(i, best);
    }
  }

  Real col_norm_sq(int c) const {
    Real s(0);
    for (int r = 0; r < n_; ++r) s += W_.col[c][r] * W_.col[c][r];
    return s;
  }

  void swap_cols(int a, int b) {
    std::swap(W_.col[a], W_.col[b]);
    std::swap(Y_.col[a], Y_.col[b]);
  }

  void gram_schmidt() {
    for (int i = 0; i < n_; ++i) {
      star_[i] = W_.col[i];
      for (int j = 0; j < i; ++j) {
        Real d(0);
        for (int r = 0; r < n_; ++r) d += W_.col[i][r] * star_[j][r];
        mu_[i][j] = d / B_[j];
        for (int r = 0; r < n_; ++r) star_[i][r] -= mu_[i][j] * star_[j][r];
      }
      Real b(0);
      for (int r = 0; r < n_; ++r) b += star_[i][r] * star_[i][r];
      if (!(b > Real(0)))
        throw IllConditioned("degenerate basis at working precision");
      B_[i] = b;
    }
  }

  void size_reduce(int k, int j) {
    Real q = r_round(mu_[k][j]);
    if (q == Real(0)) return;
    for (int r = 0; r < n_; ++r) {
      W_.col[k][r] -= q * W_.col[j][r];
      Y_.col[k][r] -= q * Y_.col[j][r];
    }
    for (int l = 0; l < j; ++l) mu_[k][l] -= q * mu_[j][l];
    mu_[k][j] -= q;
  }

  bool dfs(int i, const Real& remaining, long long cap,
           const std::function<bool(const Vec&)>& visit) {
    if (i < 0) {
      if (++count_ > cap) {
        std::ostringstream os;
        os << "enumeration exceeded cap of " << cap << " points";
        throw Overflow(os.str());
      }
      if (visit) {
        Vec x(n_);
        for (int r = 0; r < n_; ++r) {
          Real s(0);
          for (int c = 0; c < n_; ++c) s += Y_.col[c][r] * Real(coef_[c]);
          x(r) = static_cast<double>(s);
        }
        if (!visit(x)) {
          stopped_ = true;
          return false;
        }
      }
      return true;
    }
    Real s(0);
    for (int j = i + 1; j < n_; ++j) s += mu_[j][i] * Real(coef_[j]);
    Real bound2 = remaining / B_[i];
    Real bound = r_sqrt(bound2);
    Real lo = r_ceil(-s - bound);
    Real hi = r_floor(-s + bound);
    if (hi < lo) return true;
    if (hi - lo > Real(cap) || r_abs(lo) > Real(4e18) || r_abs(hi) > Real(4e18)) {
      std::ostringstream os;
      os << "coefficient range at level " << i << " exceeds cap";
      throw Overflow(os.str());
    }
    long long clo = static_cast<long long>(lo);
    long long chi = static_cast<long long>(hi);
    for (long long ci = clo; ci <= chi; ++ci) {
      Real t = Real(ci) + s;
      Real contrib = t * t * B_[i];
      if (!(contrib < remaining)) continue;
      coef_[i] = ci;
      if (!dfs(i - 1, remaining - contrib, cap, visit)) return false;
    }
    coef_[i] = 0;
    return true;
  }

  int n_;
  SmallSquare<Real> W_, Y_;
  std::array<Col<Real>, 8> star_;
  std::array<std::array<Real, 8>, 8> mu_;
  std::array<Real, 8> B_;
  std::array<long long, 8> coef_{};
  long long count_ = 0;
  bool stopped_ = false;
};

}  // namespace latscope::detail
