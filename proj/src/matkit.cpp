#include "chdisguise/matkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "chdisguise/errors.hpp"

namespace chdisguise {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagRelTol = 1e-12;
// Input check for the eigensolver. Looser than is_hermitian's default so that
// matrices accumulated through a few products still qualify.
constexpr double kEigHermitianTol = 1e-10;

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  const Eigen::Index n = a.rows();
  for (Eigen::Index q = 0; q < n; ++q) {
    for (Eigen::Index p = 0; p < n; ++p) {
      if (p != q) s += std::norm(a(p, q));
    }
  }
  return std::sqrt(s);
}

// One complex Jacobi rotation annihilating a(p, q). The unitary is
// U = diag(1, conj(e)) * [[c, s], [-s, c]] in the (p, q) plane where
// e = a(p, q) / |a(p, q)|; A <- U^dagger A U and V <- V U.
void rotate(ComplexMatrix& a, ComplexMatrix& v, Eigen::Index p, Eigen::Index q) {
  const Complex apq = a(p, q);
  const double r = std::abs(apq);
  if (r == 0.0) return;
  const Complex e = apq / r;
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * r);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const Complex ce = std::conj(e);

  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex akp = a(k, p);
    const Complex akq = a(k, q);
    a(k, p) = c * akp - s * ce * akq;
    a(k, q) = s * akp + c * ce * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex apk = a(p, k);
    const Complex aqk = a(q, k);
    a(p, k) = c * apk - s * e * aqk;
    a(q, k) = s * apk + c * e * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();

  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex vkp = v(k, p);
    const Complex vkq = v(k, q);
    v(k, p) = c * vkp - s * ce * vkq;
    v(k, q) = s * vkp + c * ce * vkq;
  }
}

void normalize_phase(Eigen::Ref<ComplexVector> col) {
  const double scale = col.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (Eigen::Index k = 0; k < col.size(); ++k) {
    const double mag = std::abs(col(k));
    if (mag > 1e-12 * scale) {
      col *= std::conj(col(k)) / mag;
      col(k) = mag;
      return;
    }
  }
}

}  // namespace

bool is_hermitian(const ComplexMatrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double bound = rel_tol * (1.0 + max_abs(m));
  return max_abs(m - m.adjoint()) <= bound;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

EigenSystem hermitian_eig(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw ValidationError("hermitian_eig: matrix is not square");
  }
  if (!is_hermitian(m, kEigHermitianTol)) {
    throw ValidationError("hermitian_eig: matrix is not Hermitian");
  }
  const Eigen::Index n = m.rows();
  ComplexMatrix a = hermitian_part(m);
  ComplexMatrix v = ComplexMatrix::Identity(n, n);

  const double threshold = kOffDiagRelTol * a.norm();
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double off = off_diagonal_norm(a);
    if (off <= threshold) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    }
  }
  if (!converged) {
    const double off = off_diagonal_norm(a);
    if (off > threshold) {
      throw NumericalError("hermitian_eig: Jacobi sweeps did not converge", off);
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return a(i, i).real() > a(j, j).real();
  });

  EigenSystem out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src).real();
    out.eigenvectors.col(k) = v.col(src);
    normalize_phase(out.eigenvectors.col(k));
  }
  return out;
}

PosNegSplit split_pos_neg(const ComplexMatrix& m, double zero_tol) {
  if (zero_tol < 0.0) throw ValidationError("split_pos_neg: zero_tol must be >= 0");
  const EigenSystem es = hermitian_eig(m);
  const Eigen::Index n = m.rows();
  const double norm = es.eigenvalues.size() == 0 ? 0.0 : es.eigenvalues.cwiseAbs().maxCoeff();
  const double cut = zero_tol * norm;

  PosNegSplit out{ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lambda = es.eigenvalues(k);
    const auto vk = es.eigenvectors.col(k);
    if (lambda > cut) {
      out.plus.noalias() += lambda * (vk * vk.adjoint());
    } else if (lambda < -cut) {
      out.minus.noalias() -= lambda * (vk * vk.adjoint());
    }
  }
  out.plus = hermitian_part(out.plus);
  out.minus = hermitian_part(out.minus);
  return out;
}

double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == m.cols() && is_hermitian(m)) {
    return hermitian_eig(m).eigenvalues.cwiseAbs().maxCoeff();
  }
  const ComplexMatrix gram = m.adjoint() * m;
  const double top = hermitian_eig(hermitian_part(gram)).eigenvalues(0);
  return std::sqrt(std::max(top, 0.0));
}

ComplexMatrix spectral_map(const ComplexMatrix& m, const std::function<double(double)>& f) {
  const EigenSystem es = hermitian_eig(m);
  const Eigen::Index n = m.rows();
  RealVector mapped(n);
  for (Eigen::Index k = 0; k < n; ++k) mapped(k) = f(es.eigenvalues(k));
  const ComplexMatrix out =
      es.eigenvectors * mapped.cast<Complex>().asDiagonal() * es.eigenvectors.adjoint();
  return hermitian_part(out);
}

ComplexMatrix project_psd(const ComplexMatrix& m) {
  return spectral_map(m, [](double x) { return std::max(x, 0.0); });
}

double min_eigenvalue(const ComplexMatrix& m) {
  const EigenSystem es = hermitian_eig(m);
  return es.eigenvalues(es.eigenvalues.size() - 1);
}

ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

ComplexVector vec(const ComplexMatrix& a) {
  ComplexVector out(a.size());
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) out(c * a.rows() + r) = a(r, c);
  }
  return out;
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index n) {
  if (v.size() != n * n) throw ValidationError("unvec: length is not n*n");
  ComplexMatrix out(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) out(r, c) = v(c * n + r);
  }
  return out;
}

}  // namespace chdisguise
