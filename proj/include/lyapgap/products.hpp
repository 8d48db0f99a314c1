#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lyapgap/matrix.hpp"
#include "lyapgap/noise.hpp"
#include "lyapgap/rng.hpp"

namespace lyapgap {

/// Running QR-renormalized representation of a left product
/// B^n = F_n ... F_2 F_1. The state maintains the factorization
///
///   B^n = q * diag(exp(log_diag)) * tri
///
/// with q orthogonal and tri unit-diagonal upper triangular. log_diag holds
/// the cumulative log R-diagonals of the QR recursion; tri carries the
/// residual triangular mixing needed to recover finite-n singular values.
struct ProductState {
  int dim = 0;
  std::int64_t steps = 0;
  Mat q;                         // d x d orthogonal
  std::vector<double> log_diag;  // cumulative log |R_ii|
  Mat tri;                       // unit-diagonal upper triangular

  static ProductState initial(int dim);
};

/// Absorb one more factor on the left. QR of A*q yields the new frame; the
/// R diagonal (forced positive) feeds log_diag and the unit part updates
/// tri. Throws numeric_error if a diagonal entry of R underflows (factor
/// numerically singular), reporting the failing step index.
ProductState advance(const ProductState& state, const Mat& a);

/// Plain discrete-QR Lyapunov estimates: log_diag / steps, sorted
/// non-increasing. Requires steps >= 1.
std::vector<double> exponent_estimates(const ProductState& state);

/// Refined absolute log singular value estimates of B^n itself, computed
/// from the triangular remainder: log s_k = log_diag_k + log L_kk where
/// tri = L * Omega is the row Gram-Schmidt (LQ) factorization. The sum over
/// k equals sum(log_diag) exactly (det tri = 1), and each entry converges
/// to log s_k(B^n) with error decaying like exp(-2 n gap). Sorted
/// non-increasing.
std::vector<double> log_singular_estimates(const ProductState& state);

/// Reference oracle: exact log singular values of factors.back()*...*
/// factors.front(), for small factor counts (1..64). Overflow is controlled
/// by per-factor scalar rescaling with log bookkeeping.
std::vector<double> exact_product_svd(const std::vector<Mat>& factors);

/// Deterministic base sequence (A_i) of the product. Provides the matrices
/// and a certified uniform operator-norm bound.
class BaseSequence {
 public:
  static BaseSequence identity(int dim);
  static BaseSequence fixed(Mat a);
  /// Cycles through the given matrices: A_i = mats[i mod mats.size()].
  static BaseSequence cycle(std::vector<Mat> mats);

  int dim() const { return dim_; }
  const Mat& at(std::int64_t step) const;
  /// max_i ||A_i||_op, computed at construction.
  double norm_bound() const { return norm_bound_; }
  std::string kind() const { return kind_; }
  const std::vector<Mat>& members() const { return mats_; }

 private:
  BaseSequence(std::string kind, int dim, std::vector<Mat> mats);

  std::string kind_;
  int dim_ = 0;
  double norm_bound_ = 0.0;
  std::vector<Mat> mats_;
};

struct GapCheckpoint {
  std::int64_t n = 0;
  std::vector<double> log_sk;  // refined absolute log singular estimates, d values
  std::vector<double> gaps;    // log_sk[k] - log_sk[k+1], d-1 values
};

struct GapTrace {
  int dim = 0;
  std::uint64_t seed = 0;
  std::int64_t trial = 0;
  std::string config_digest;
  std::vector<GapCheckpoint> checkpoints;  // n strictly increasing
};

/// Run one realization of the perturbed product (A_i + eps E_i) for n steps.
/// Noise at step i is drawn from the stream (seed, trial, i), so trials and
/// steps are reproducible independently of execution order. checkpoint_every
/// = 0 selects the geometric schedule {1, 2, 4, ...} plus the final n;
/// otherwise checkpoints fall every checkpoint_every steps plus the final n.
/// A numerically singular perturbed factor aborts with diagnostics (step,
/// seed) rather than being skipped.
GapTrace run_product(const BaseSequence& seq, const NoiseSpec& noise,
                     double eps, std::int64_t n, std::int64_t checkpoint_every,
                     std::uint64_t seed, std::int64_t trial = 0);

/// Per-step-rate CSV: columns n, k, log_s_k_over_n, gap_k, seed. One row per
/// (checkpoint, k); gap_k is empty on the k = d row.
void write_trace_csv(const GapTrace& trace, std::ostream& out);

}  // namespace lyapgap
