#pragma once

// Quantum channels on C^n: Kraus form, Choi form and the channel-sum map.
//
// Conventions:
//   Choi matrix  C = sum_{i,j} |i><j| (x) E(|i><j|), so block (i, j) of the
//                n^2 x n^2 matrix is E(|i><j|) and row index = i * n + k.
//   vec          column stacking, vec(K)[col * n + row] = K(row, col); with
//                this layout C = sum_k vec(K_k) vec(K_k)^dagger.
//   T(C)         transposed partial trace over the output factor,
//                T(C)(i, j) = Tr E(|j><i|) = sum_k K_k^dagger K_k.

#include <cstdint>
#include <vector>

#include "chdisguise/matkit.hpp"

namespace chdisguise {

inline constexpr double kCpTol = 1e-10;
inline constexpr double kTpTol = 1e-9;

class KrausChannel {
 public:
  /// Throws ValidationError unless all operators are square with one common
  /// dimension n >= 2 and at least one operator is given.
  explicit KrausChannel(std::vector<ComplexMatrix> kraus_ops);

  Eigen::Index dim() const noexcept { return dim_; }
  const std::vector<ComplexMatrix>& kraus_ops() const noexcept { return ops_; }
  std::size_t size() const noexcept { return ops_.size(); }

  /// sum_k K_k^dagger K_k
  ComplexMatrix kraus_sum() const;
  /// max entry of |sum_k K_k^dagger K_k - I|
  double tp_error() const;
  bool is_trace_preserving(double tol = kTpTol) const { return tp_error() <= tol; }

 private:
  Eigen::Index dim_ = 0;
  std::vector<ComplexMatrix> ops_;
};

/// Choi matrix of a Hermitian-preserving linear map, with its CP/TP status.
struct ChoiRep {
  Eigen::Index dim = 0;
  ComplexMatrix matrix;
  bool cp = false;
  bool tp = false;

  /// Validates the n^2 x n^2 shape and Hermiticity and evaluates the flags:
  /// cp <=> min eigenvalue >= -kCpTol * max(1, ||C||),
  /// tp <=> max |T(C) - I| <= kTpTol.
  static ChoiRep from_matrix(ComplexMatrix m);
};

/// n such that n * n == size; throws ValidationError otherwise.
Eigen::Index dim_from_choi_size(Eigen::Index size);

ChoiRep choi_from_kraus(const KrausChannel& ch);

/// Kraus operators sqrt(lambda_k) unvec(v_k) for the eigenpairs of the Choi
/// matrix with lambda_k > zero_tol * ||C||. Requires c.cp.
KrausChannel kraus_from_choi(const ChoiRep& c, double zero_tol = kDefaultZeroTol);

/// T(C); accepts any square matrix of size n^2.
ComplexMatrix channel_sum(const ComplexMatrix& c);
ComplexMatrix channel_sum(const ChoiRep& c);

/// sum_k K_k rho K_k^dagger
ComplexMatrix apply(const KrausChannel& ch, const ComplexMatrix& rho);

/// Action of the map represented by a Choi matrix:
/// E(rho) = sum_{i,j} rho(i, j) * block(i, j).
ComplexMatrix apply_choi(const ComplexMatrix& c, const ComplexMatrix& rho);

/// Kraus set {sqrt(1-prob) A_i} u {sqrt(prob) B_j}; zero-weight branches are
/// dropped.
KrausChannel mix(const KrausChannel& a, const KrausChannel& b, double prob);

/// second o first: Kraus set {B_j A_i}.
KrausChannel compose(const KrausChannel& second, const KrausChannel& first);

/// Seeded random TP channel: a (k n) x n complex Gaussian matrix with
/// orthonormalized columns, cut into k stacked n x n Kraus blocks.
KrausChannel random_channel(Eigen::Index dim, Eigen::Index num_kraus, std::uint64_t seed);

/// max over basis inputs |i><j| of the largest entry of |a(|i><j|) - b(|i><j|)|.
double max_action_difference(const KrausChannel& a, const KrausChannel& b);

ComplexMatrix pauli_x();
ComplexMatrix pauli_z();

KrausChannel identity_channel(Eigen::Index dim);
/// {sqrt(1-a) I, sqrt(a) X}
KrausChannel bit_flip(double a);
/// {sqrt(1-b) I, sqrt(b) Z}
KrausChannel phase_flip(double b);
/// {sqrt(1-c) I, sqrt(c) XZ}
KrausChannel xz_flip(double c);

struct ChannelPair {
  KrausChannel first;
  KrausChannel second;
};

/// A published pair of random qubit channels, four real Kraus operators each,
/// tabulated to six significant digits (so TP only to ~1e-6).
ChannelPair reference_qubit_pair();

}  // namespace chdisguise
