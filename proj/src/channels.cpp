#include "chdisguise/channels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "chdisguise/errors.hpp"

namespace chdisguise {

namespace {

void check_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ValidationError(std::string(what) + ": probability must lie in [0, 1]");
  }
}

// splitmix64: fixed output sequence on every platform, unlike the standard
// distributions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1).
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller; both draws are used, as real and imaginary part.
  Complex complex_gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  std::uint64_t state_;
};

ComplexMatrix real_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  ComplexMatrix m(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double x : row) m(r, c++) = x;
    ++r;
  }
  return m;
}

KrausChannel two_branch(const ComplexMatrix& flip, double prob, const char* what) {
  check_probability(prob, what);
  std::vector<ComplexMatrix> ops;
  if (prob < 1.0) ops.push_back(std::sqrt(1.0 - prob) * identity(2));
  if (prob > 0.0) ops.push_back(std::sqrt(prob) * flip);
  return KrausChannel(std::move(ops));
}

}  // namespace

KrausChannel::KrausChannel(std::vector<ComplexMatrix> kraus_ops) : ops_(std::move(kraus_ops)) {
  if (ops_.empty()) throw ValidationError("KrausChannel: no Kraus operators");
  dim_ = ops_.front().rows();
  if (dim_ < 2) throw ValidationError("KrausChannel: dimension must be at least 2");
  for (const auto& k : ops_) {
    if (k.rows() != dim_ || k.cols() != dim_) {
      throw ValidationError("KrausChannel: Kraus operators must be square with a common dimension");
    }
  }
}

ComplexMatrix KrausChannel::kraus_sum() const {
  ComplexMatrix s = ComplexMatrix::Zero(dim_, dim_);
  for (const auto& k : ops_) s.noalias() += k.adjoint() * k;
  return s;
}

double KrausChannel::tp_error() const { return max_abs(kraus_sum() - identity(dim_)); }

Eigen::Index dim_from_choi_size(Eigen::Index size) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(size))));
  if (size <= 0 || n * n != size) {
    throw ValidationError("Choi matrix size " + std::to_string(size) + " is not a perfect square");
  }
  return n;
}

ChoiRep ChoiRep::from_matrix(ComplexMatrix m) {
  if (m.rows() != m.cols()) throw ValidationError("ChoiRep: matrix is not square");
  if (!is_hermitian(m, 1e-10)) throw ValidationError("ChoiRep: matrix is not Hermitian");
  ChoiRep out;
  out.dim = dim_from_choi_size(m.rows());
  out.matrix = hermitian_part(m);
  const double lo = min_eigenvalue(out.matrix);
  out.cp = lo >= -kCpTol * std::max(1.0, spectral_norm(out.matrix));
  out.tp = max_abs(channel_sum(out.matrix) - identity(out.dim)) <= kTpTol;
  return out;
}

ChoiRep choi_from_kraus(const KrausChannel& ch) {
  const Eigen::Index n = ch.dim();
  ComplexMatrix c = ComplexMatrix::Zero(n * n, n * n);
  for (const auto& k : ch.kraus_ops()) {
    const ComplexVector v = vec(k);
    c.noalias() += v * v.adjoint();
  }
  return ChoiRep::from_matrix(std::move(c));
}

KrausChannel kraus_from_choi(const ChoiRep& c, double zero_tol) {
  if (!c.cp) throw ValidationError("kraus_from_choi: Choi matrix is not PSD");
  const EigenSystem es = hermitian_eig(c.matrix);
  const double cut = zero_tol * std::max(es.eigenvalues.cwiseAbs().maxCoeff(), 0.0);
  std::vector<ComplexMatrix> ops;
  for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k) {
    const double lambda = es.eigenvalues(k);
    if (lambda <= cut) break;  // sorted descending
    ops.push_back(std::sqrt(lambda) * unvec(es.eigenvectors.col(k), c.dim));
  }
  if (ops.empty()) ops.push_back(ComplexMatrix::Zero(c.dim, c.dim));
  return KrausChannel(std::move(ops));
}

ComplexMatrix channel_sum(const ComplexMatrix& c) {
  if (c.rows() != c.cols()) throw ValidationError("channel_sum: matrix is not square");
  const Eigen::Index n = dim_from_choi_size(c.rows());
  ComplexMatrix t = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Complex s = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) s += c(j * n + k, i * n + k);
      t(i, j) = s;
    }
  }
  return t;
}

ComplexMatrix channel_sum(const ChoiRep& c) { return channel_sum(c.matrix); }

ComplexMatrix apply(const KrausChannel& ch, const ComplexMatrix& rho) {
  if (rho.rows() != ch.dim() || rho.cols() != ch.dim()) {
    throw ValidationError("apply: input dimension does not match the channel");
  }
  ComplexMatrix out = ComplexMatrix::Zero(ch.dim(), ch.dim());
  for (const auto& k : ch.kraus_ops()) out.noalias() += k * rho * k.adjoint();
  return out;
}

ComplexMatrix apply_choi(const ComplexMatrix& c, const ComplexMatrix& rho) {
  const Eigen::Index n = dim_from_choi_size(c.rows());
  if (rho.rows() != n || rho.cols() != n) {
    throw ValidationError("apply_choi: input dimension does not match the map");
  }
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out += rho(i, j) * c.block(i * n, j * n, n, n);
  }
  return out;
}

KrausChannel mix(const KrausChannel& a, const KrausChannel& b, double prob) {
  check_probability(prob, "mix");
  if (a.dim() != b.dim()) throw ValidationError("mix: channel dimensions differ");
  std::vector<ComplexMatrix> ops;
  if (prob < 1.0) {
    for (const auto& k : a.kraus_ops()) ops.push_back(std::sqrt(1.0 - prob) * k);
  }
  if (prob > 0.0) {
    for (const auto& k : b.kraus_ops()) ops.push_back(std::sqrt(prob) * k);
  }
  return KrausChannel(std::move(ops));
}

KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
  if (second.dim() != first.dim()) throw ValidationError("compose: channel dimensions differ");
  std::vector<ComplexMatrix> ops;
  ops.reserve(second.size() * first.size());
  for (const auto& b : second.kraus_ops()) {
    for (const auto& a : first.kraus_ops()) ops.push_back(b * a);
  }
  return KrausChannel(std::move(ops));
}

KrausChannel random_channel(Eigen::Index dim, Eigen::Index num_kraus, std::uint64_t seed) {
  if (dim < 2) throw ValidationError("random_channel: dimension must be at least 2");
  if (num_kraus < 1 || num_kraus > dim * dim) {
    throw ValidationError("random_channel: Kraus count must lie in [1, dim^2]");
  }
  SplitMix64 rng(seed);
  const Eigen::Index rows = num_kraus * dim;
  ComplexMatrix g(rows, dim);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) g(r, c) = rng.complex_gaussian();
  }
  // Modified Gram-Schmidt on the columns.
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index prev = 0; prev < c; ++prev) {
      const Complex overlap = g.col(prev).dot(g.col(c));
      g.col(c) -= overlap * g.col(prev);
    }
    const double norm = g.col(c).norm();
    if (norm < 1e-12) throw NumericalError("random_channel: degenerate Gaussian draw", norm);
    g.col(c) /= norm;
  }
  std::vector<ComplexMatrix> ops;
  ops.reserve(static_cast<std::size_t>(num_kraus));
  for (Eigen::Index k = 0; k < num_kraus; ++k) ops.push_back(g.block(k * dim, 0, dim, dim));
  return KrausChannel(std::move(ops));
}

double max_action_difference(const KrausChannel& a, const KrausChannel& b) {
  if (a.dim() != b.dim()) throw ValidationError("max_action_difference: dimensions differ");
  const Eigen::Index n = a.dim();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      ComplexMatrix basis = ComplexMatrix::Zero(n, n);
      basis(i, j) = 1.0;
      worst = std::max(worst, max_abs(chdisguise::apply(a, basis) - chdisguise::apply(b, basis)));
    }
  }
  return worst;
}

ComplexMatrix pauli_x() { return real_matrix({{0, 1}, {1, 0}}); }
ComplexMatrix pauli_z() { return real_matrix({{1, 0}, {0, -1}}); }

KrausChannel identity_channel(Eigen::Index dim) {
  return KrausChannel(std::vector<ComplexMatrix>{identity(dim)});
}

KrausChannel bit_flip(double a) { return two_branch(pauli_x(), a, "bit_flip"); }
KrausChannel phase_flip(double b) { return two_branch(pauli_z(), b, "phase_flip"); }
KrausChannel xz_flip(double c) { return two_branch(pauli_x() * pauli_z(), c, "xz_flip"); }

ChannelPair reference_qubit_pair() {
  KrausChannel e(std::vector<ComplexMatrix>{
      real_matrix({{-0.504828, -0.331944}, {-0.0133105, 0.295026}}),
      real_matrix({{0.419485, 0.158018}, {0.330761, 0.0616354}}),
      real_matrix({{0.464696, 0.251826}, {-0.312786, 0.165248}}),
      real_matrix({{0.160149, -0.346665}, {-0.346665, 0.750403}}),
  });
  KrausChannel f(std::vector<ComplexMatrix>{
      real_matrix({{-0.20917, -0.248828}, {0.382771, -0.451866}}),
      real_matrix({{-0.62412, -0.425856}, {0.286902, -0.0613943}}),
      real_matrix({{0.216184, -0.422341}, {-0.403389, 0.451605}}),
      real_matrix({{0.236514, 0.269256}, {0.269256, 0.306531}}),
  });
  return {std::move(e), std::move(f)};
}

}  // namespace chdisguise
