#include "latscope/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "latscope/errors.hpp"

namespace latscope {

namespace {

constexpr int kMaxDim = 8;

void check_square_small(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() < 1 || M.rows() > kMaxDim)
    throw Error("matrix must be square with 1 <= n <= 8");
}

int rank_with_cutoff(const Eigen::VectorXd& sv, double cutoff) {
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return r;
}

// Nullities of (M - lambda I)^k for k = 1..m, real path.
std::vector<int> nullity_profile_real(const Mat& M, double lambda, int m,
                                      double h, double scale) {
  const int n = static_cast<int>(M.rows());
  Mat N = M - lambda * Mat::Identity(n, n);
  Mat P = Mat::Identity(n, n);
  std::vector<int> d;
  double cutoff = h;
  for (int k = 1; k <= m; ++k) {
    P = P * N;
    Eigen::JacobiSVD<Mat> svd(P);
    d.push_back(n - rank_with_cutoff(svd.singularValues(), cutoff));
    cutoff *= 2.0 * scale;
  }
  return d;
}

std::vector<int> nullity_profile_complex(const Mat& M,
                                         std::complex<double> lambda, int m,
                                         double h, double scale) {
  const int n = static_cast<int>(M.rows());
  CMat N = M.cast<std::complex<double>>() - lambda * CMat::Identity(n, n);
  CMat P = CMat::Identity(n, n);
  std::vector<int> d;
  double cutoff = h;
  for (int k = 1; k <= m; ++k) {
    P = P * N;
    Eigen::JacobiSVD<CMat> svd(P);
    d.push_back(n - rank_with_cutoff(svd.singularValues(), cutoff));
    cutoff *= 2.0 * scale;
  }
  return d;
}

// Turn a nullity profile into block orders; throws if the profile is not a
// valid Jordan staircase summing to the algebraic multiplicity.
std::vector<int> orders_from_nullities(const std::vector<int>& d, int m) {
  std::vector<int> ge;  // ge[k-1] = #blocks of order >= k
  int prev = 0, total = 0;
  for (int dk : d) {
    int b = dk - prev;
    if (b < 0 || (!ge.empty() && b > ge.back())) return {};
    ge.push_back(b);
    prev = dk;
    total += b;
    if (total == m) break;
  }
  if (total != m) return {};
  std::vector<int> orders;
  for (int k = static_cast<int>(ge.size()); k >= 1; --k) {
    int exact = ge[k - 1] - (k < static_cast<int>(ge.size()) ? ge[k] : 0);
    for (int b = 0; b < exact; ++b) orders.push_back(k);
  }
  return orders;
}

Mat real_kernel_basis(const Mat& M, double lambda, int m, double h,
                      double scale) {
  const int n = static_cast<int>(M.rows());
  Mat N = M - lambda * Mat::Identity(n, n);
  Mat P = Mat::Identity(n, n);
  double cutoff = h;
  for (int k = 1; k < m; ++k) cutoff *= 2.0 * scale;
  for (int k = 0; k < m; ++k) P = P * N;
  Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeFullV);
  int r = rank_with_cutoff(svd.singularValues(), cutoff);
  int nullity = n - r;
  if (nullity != m)
    throw ConfluentSpectrum("generalized eigenspace dimension mismatch");
  return svd.matrixV().rightCols(nullity);
}

Mat complex_kernel_basis(const Mat& M, std::complex<double> lambda, int m,
                         double h, double scale) {
  const int n = static_cast<int>(M.rows());
  CMat N = M.cast<std::complex<double>>() - lambda * CMat::Identity(n, n);
  CMat P = CMat::Identity(n, n);
  double cutoff = h;
  for (int k = 1; k < m; ++k) cutoff *= 2.0 * scale;
  for (int k = 0; k < m; ++k) P = P * N;
  Eigen::JacobiSVD<CMat> svd(P, Eigen::ComputeFullV);
  int r = rank_with_cutoff(svd.singularValues(), cutoff);
  int nullity = n - r;
  if (nullity != m)
    throw ConfluentSpectrum("generalized eigenspace dimension mismatch");
  CMat K = svd.matrixV().rightCols(nullity);
  Mat out(n, 2 * nullity);
  for (int c = 0; c < nullity; ++c) {
    out.col(2 * c) = K.col(c).real();
    out.col(2 * c + 1) = K.col(c).imag();
  }
  return out;
}

struct Cluster {
  std::complex<double> rep;  // mean of members (upper half for complex)
  int multiplicity = 0;      // counting upper-half members only for complex
  bool is_complex = false;
};

// Snap near-real eigenvalues, single-linkage cluster at radius h, demand a
// 10h separation between clusters.
std::vector<Cluster> cluster_eigenvalues(
    std::vector<std::complex<double>> evs, double h) {
  for (auto& l : evs)
    if (std::abs(l.imag()) <= h) l = {l.real(), 0.0};

  const int n = static_cast<int>(evs.size());
  std::vector<int> id(n);
  for (int i = 0; i < n; ++i) id[i] = i;
  std::function<int(int)> find = [&](int i) {
    while (id[i] != i) i = id[i] = id[id[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(evs[i] - evs[j]) <= h) id[find(i)] = find(j);

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double dist = std::abs(evs[i] - evs[j]);
      if (find(i) != find(j) && dist < 10.0 * h) {
        std::ostringstream os;
        os << "eigenvalue clusters separated by only " << dist
           << " (need >= " << 10.0 * h
           << "); supply a structured block spec";
        throw ConfluentSpectrum(os.str());
      }
    }

  std::map<int, std::vector<std::complex<double>>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(evs[i]);

  std::vector<Cluster> out;
  for (auto& [root, members] : groups) {
    bool complex = members.front().imag() != 0.0;
    if (complex && members.front().imag() < 0) continue;  // mirror of another
    std::complex<double> mean{0, 0};
    for (auto& m : members) mean += m;
    mean /= static_cast<double>(members.size());
    if (!complex) mean = {mean.real(), 0.0};
    out.push_back({mean, static_cast<int>(members.size()), complex});
  }
  return out;
}

void sort_spectral(SpectralData& sd) {
  std::sort(sd.eigenvalues.begin(), sd.eigenvalues.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              double ma = std::abs(a), mb = std::abs(b);
              if (ma != mb) return ma > mb;
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });
  std::sort(sd.blocks.begin(), sd.blocks.end(),
            [](const JordanBlock& a, const JordanBlock& b) {
              double ma = std::abs(a.lambda), mb = std::abs(b.lambda);
              if (ma != mb) return ma > mb;
              return a.order > b.order;
            });
}

}  // namespace

double SpectralData::max_modulus() const {
  double m = 0;
  for (auto& l : eigenvalues) m = std::max(m, std::abs(l));
  return m;
}

double SpectralData::min_modulus() const {
  double m = std::numeric_limits<double>::infinity();
  for (auto& l : eigenvalues) m = std::min(m, std::abs(l));
  return m;
}

const char* to_string(DilationClass c) {
  switch (c) {
    case DilationClass::Expanding:
      return "Expanding";
    case DilationClass::ExpandingOnSubspace:
      return "ExpandingOnSubspace";
    default:
      return "NotExpandingOnSubspace";
  }
}

SpectralData eigen_decompose(const Mat& M, double tol) {
  check_square_small(M);
  const int n = static_cast<int>(M.rows());
  const double scale = std::max(1.0, spectral_norm(M));
  const double h = std::max(tol, 1e-7) * scale;

  SpectralData sd;
  if (n == 1) {
    sd.eigenvalues = {{M(0, 0), 0.0}};
    sd.blocks = {{{M(0, 0), 0.0}, 1, false}};
    sd.similarity_basis = Mat::Identity(1, 1);
    return sd;
  }

  Eigen::EigenSolver<Mat> es(M);
  if (es.info() != Eigen::Success) throw Error("eigenvalue iteration failed");
  std::vector<std::complex<double>> evs(n);
  for (int i = 0; i < n; ++i) evs[i] = es.eigenvalues()(i);

  auto clusters = cluster_eigenvalues(evs, h);

  int dim_total = 0;
  bool diagonalizable = true;
  for (const auto& cl : clusters) {
    std::vector<int> d =
        cl.is_complex ? nullity_profile_complex(M, cl.rep, cl.multiplicity, h, scale)
                      : nullity_profile_real(M, cl.rep.real(), cl.multiplicity, h, scale);
    auto orders = orders_from_nullities(d, cl.multiplicity);
    if (orders.empty())
      throw ConfluentSpectrum(
          "rank profile inconsistent with eigenvalue multiplicities; supply a "
          "structured block spec");
    for (int o : orders) {
      sd.blocks.push_back({cl.rep, o, cl.is_complex});
      if (o > 1) diagonalizable = false;
      dim_total += cl.is_complex ? 2 * o : o;
    }
    for (int i = 0; i < cl.multiplicity; ++i) {
      sd.eigenvalues.push_back(cl.rep);
      if (cl.is_complex) sd.eigenvalues.push_back(std::conj(cl.rep));
    }
  }
  if (dim_total != n)
    throw ConfluentSpectrum("block dimensions do not fill the space");

  if (diagonalizable) {
    Mat P(n, n);
    int col = 0;
    for (const auto& cl : clusters) {
      Mat K = cl.is_complex
                  ? complex_kernel_basis(M, cl.rep, cl.multiplicity, h, scale)
                  : real_kernel_basis(M, cl.rep.real(), cl.multiplicity, h, scale);
      P.middleCols(col, K.cols()) = K;
      col += static_cast<int>(K.cols());
    }
    if (col == n && cond_estimate(P) < 1e12) sd.similarity_basis = P;
  }

  sort_spectral(sd);
  return sd;
}

Dilation make_dilation(const Mat& A, double tol) {
  check_square_small(A);
  double det = A.determinant();
  if (std::abs(det) <= 1e-12) throw Error("matrix is singular (|det| <= 1e-12)");
  Dilation d;
  d.A = A;
  d.det_abs = std::abs(det);
  d.spectral = eigen_decompose(A, tol);
  return d;
}

Dilation make_dilation_structured(const Mat& A, std::vector<JordanBlock> blocks,
                                  const Mat& basis) {
  check_square_small(A);
  double det = A.determinant();
  if (std::abs(det) <= 1e-12) throw Error("matrix is singular (|det| <= 1e-12)");

  const int n = static_cast<int>(A.rows());
  SpectralData sd;
  sd.structured = true;
  int dim = 0;
  double logmod = 0.0;
  for (const auto& b : blocks) {
    if (b.order < 1) throw Error("block order must be >= 1");
    dim += b.complex_pair ? 2 * b.order : b.order;
    for (int i = 0; i < b.order; ++i) {
      sd.eigenvalues.push_back(b.lambda);
      if (b.complex_pair) sd.eigenvalues.push_back(std::conj(b.lambda));
    }
    logmod += (b.complex_pair ? 2.0 : 1.0) * b.order * std::log(std::abs(b.lambda));
  }
  if (dim != n) throw Error("block dimensions do not sum to n");
  if (std::abs(logmod - std::log(std::abs(det))) > 1e-8 * (1.0 + std::abs(logmod)))
    throw Error("eigenvalue moduli inconsistent with |det|");
  sd.blocks = std::move(blocks);
  if (basis.size() > 0) {
    if (basis.rows() != n || basis.cols() != n)
      throw Error("similarity basis must be n x n");
    if (std::abs(basis.determinant()) <= 1e-12)
      throw Error("similarity basis is singular");
    sd.similarity_basis = basis;
  }
  sort_spectral(sd);

  Dilation d;
  d.A = A;
  d.det_abs = std::abs(det);
  d.spectral = std::move(sd);
  return d;
}

DilationClass classify_dilation(const SpectralData& sd, double tol) {
  double mn = sd.min_modulus();
  double mx = sd.max_modulus();
  if (mn > 1.0 + tol) return DilationClass::Expanding;
  bool unit_blocks_simple = true;
  for (const auto& b : sd.blocks)
    if (std::abs(std::abs(b.lambda) - 1.0) <= tol && b.order > 1)
      unit_blocks_simple = false;
  if (mn >= 1.0 - tol && mx > 1.0 + tol && unit_blocks_simple)
    return DilationClass::ExpandingOnSubspace;
  return DilationClass::NotExpandingOnSubspace;
}

DilationClass classify_dilation(const Mat& M, double tol) {
  return classify_dilation(eigen_decompose(M, tol), tol);
}

DilationClass classify_dilation(const Dilation& d, double tol) {
  return classify_dilation(d.spectral, tol);
}

double SubspaceSplit::e_norm(const Vec& x) const {
  if (dim_E() == 0) return 0.0;
  return (C_inv * x).tail(dim_E()).norm();
}

double SubspaceSplit::f_norm(const Vec& x) const {
  if (dim_F() == 0) return 0.0;
  return (C_inv * x).head(dim_F()).norm();
}

SubspaceSplit ef_split(const Mat& M, const SpectralData& sd, double tol) {
  check_square_small(M);
  const int n = static_cast<int>(M.rows());
  const double scale = std::max(1.0, spectral_norm(M));
  const double h = std::max(tol, 1e-7) * scale;

  // Total multiplicity per distinct block eigenvalue.
  std::map<std::pair<double, double>, std::pair<int, bool>> mult;
  for (const auto& b : sd.blocks) {
    auto key = std::make_pair(b.lambda.real(), std::abs(b.lambda.imag()));
    auto& entry = mult[key];
    entry.first += b.order;
    entry.second = b.complex_pair;
  }

  std::vector<Mat> e_parts, f_parts;
  int structured_col = 0;
  if (sd.structured && sd.has_basis()) {
    for (const auto& b : sd.blocks) {
      int w = b.complex_pair ? 2 * b.order : b.order;
      Mat cols = sd.similarity_basis.middleCols(structured_col, w);
      structured_col += w;
      (std::abs(b.lambda) <= 1.0 + tol ? e_parts : f_parts).push_back(cols);
    }
  } else {
    for (const auto& [key, info] : mult) {
      std::complex<double> lambda(key.first, key.second);
      auto [m, complex_pair] = info;
      Mat K = complex_pair ? complex_kernel_basis(M, lambda, m, h, scale)
                           : real_kernel_basis(M, lambda.real(), m, h, scale);
      (std::abs(lambda) <= 1.0 + tol ? e_parts : f_parts).push_back(K);
    }
  }

  auto assemble = [n](const std::vector<Mat>& parts) {
    int cols = 0;
    for (const auto& p : parts) cols += static_cast<int>(p.cols());
    Mat out(n, cols);
    int c = 0;
    for (const auto& p : parts) {
      out.middleCols(c, p.cols()) = p;
      c += static_cast<int>(p.cols());
    }
    return out;
  };
  auto orthonormalize = [](const Mat& B) {
    if (B.cols() == 0) return B;
    Eigen::HouseholderQR<Mat> qr(B);
    Mat Q = qr.householderQ() * Mat::Identity(B.rows(), B.cols());
    return Q;
  };

  SubspaceSplit s;
  s.E_basis = orthonormalize(assemble(e_parts));
  s.F_basis = orthonormalize(assemble(f_parts));
  if (s.E_basis.cols() + s.F_basis.cols() != n)
    throw ConfluentSpectrum("subspace split dimensions do not sum to n");

  s.C = Mat(n, n);
  if (s.dim_F() > 0) s.C.leftCols(s.dim_F()) = s.F_basis;
  if (s.dim_E() > 0) s.C.rightCols(s.dim_E()) = s.E_basis;
  if (std::abs(s.C.determinant()) <= 1e-12)
    throw ConfluentSpectrum("split basis is numerically singular");
  s.C_inv = s.C.inverse();
  Mat D = Mat::Zero(n, n);
  for (int i = 0; i < s.dim_F(); ++i) D(i, i) = 1.0;
  s.projection = s.C * D * s.C_inv;
  return s;
}

SubspaceSplit ef_split(const Mat& M, double tol) {
  return ef_split(M, eigen_decompose(M, tol), tol);
}

SubspaceSplit ef_split(const Dilation& d, double tol) {
  return ef_split(d.A, d.spectral, tol);
}

Mat matrix_power(const Mat& M, long long j) {
  check_square_small(M);
  const int n = static_cast<int>(M.rows());
  if (j == 0) return Mat::Identity(n, n);

  Mat base;
  unsigned long long e;
  if (j < 0) {
    double det = M.determinant();
    if (std::abs(det) <= 1e-12) throw Error("negative power of singular matrix");
    base = M.inverse();
    e = (j == std::numeric_limits<long long>::min())
            ? static_cast<unsigned long long>(std::numeric_limits<long long>::max()) + 1ull
            : static_cast<unsigned long long>(-j);
  } else {
    base = M;
    e = static_cast<unsigned long long>(j);
  }

  // Representability guard: the dominant eigenvalue must not push entries
  // past double range.
  Eigen::EigenSolver<Mat> es(base, /*computeEigenvectors=*/false);
  double rho = 0;
  for (int i = 0; i < n; ++i) rho = std::max(rho, std::abs(es.eigenvalues()(i)));
  if (rho > 1.0 && static_cast<double>(e) * std::log10(rho) > 280.0)
    throw IllConditioned("matrix power exceeds double range");

  Mat result = Mat::Identity(n, n);
  while (e > 0) {
    if (e & 1ull) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  if (!result.allFinite())
    throw IllConditioned("matrix power overflowed double range");
  return result;
}

Mat lyapunov_form(const Mat& M) {
  check_square_small(M);
  if (classify_dilation(M) != DilationClass::Expanding)
    throw NotExpanding("Lyapunov form requires all |lambda| > 1");
  const int n = static_cast<int>(M.rows());
  Mat Minv = M.inverse();
  Mat Q = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  for (int k = 0; k < 200000; ++k) {
    term = Minv.transpose() * term * Minv;
    Q += term;
    if (term.norm() < 1e-14) return 0.5 * (Q + Q.transpose());
  }
  throw Error("Lyapunov series did not converge");
}

Mat lyapunov_form(const Dilation& d) {
  if (classify_dilation(d) != DilationClass::Expanding)
    throw NotExpanding("Lyapunov form requires all |lambda| > 1");
  return lyapunov_form(d.A);
}

}  // namespace latscope
