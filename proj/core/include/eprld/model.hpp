#pragma once

// System definition for linear diffusions dX = A X dt + sqrt(Q) dB with a
// normal, stable drift A commuting with the diffusion matrix Q.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace eprld {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kDefaultValidateTol = 1e-10;

struct SystemSpec {
  Matrix A;
  Matrix Q;
  double tol_validate = kDefaultValidateTol;

  /// Identity diffusion.
  static SystemSpec with_identity_noise(Matrix drift, double tol = kDefaultValidateTol);

  [[nodiscard]] Eigen::Index dim() const { return A.rows(); }
};

/// Eigenvalue alpha + i*beta of A. Conjugate pairs are stored twice.
struct EigenPair {
  double alpha = 0.0;
  double beta = 0.0;
};

struct Spectrum {
  std::vector<EigenPair> pairs;
  /// Unit eigenvectors U_k of A, aligned with `pairs`. Empty when not requested.
  std::vector<ComplexVector> channel_vectors;

  [[nodiscard]] std::size_t size() const { return pairs.size(); }
  [[nodiscard]] bool has_vectors() const { return !channel_vectors.empty(); }
  [[nodiscard]] bool is_reversible() const;
};

struct DerivedMatrices {
  Matrix M;      // A + A'
  Matrix N;      // A - A'
  Matrix Gamma;  // stationary covariance -Q M^{-1}
  double log_norm = 0.0;  // log of (2 pi)^{-d/2} det(Gamma)^{-1/2}
};

enum class Severity { error, warning };

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double threshold = 0.0;
  Severity severity = Severity::error;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  /// True when every check passed, warnings included.
  [[nodiscard]] bool all_passed() const;
  /// True when every error-severity check passed; warnings are tolerated.
  [[nodiscard]] bool usable() const;
  [[nodiscard]] const ValidationCheck* find(const std::string& name) const;
};

/// Runs every structural check on (A, Q). Shape problems throw
/// DimensionError, non-finite data throws DataError; failed checks are
/// reported, never thrown.
ValidationReport validate_system(const SystemSpec& spec);

/// Eigenpairs of A sorted by (alpha ascending, |beta| descending, beta
/// descending). Built from the symmetric part M/2 and the skew part N/2
/// so conjugate pairs come out exactly paired with orthonormal vectors.
Spectrum spectral_decompose(const SystemSpec& spec, bool with_vectors = true);

DerivedMatrices derived_matrices(const SystemSpec& spec);

/// Same drift, identity diffusion.
SystemSpec reduce_to_identity_noise(const SystemSpec& spec);

/// Charged particle in a constant magnetic field. `extended` selects the
/// three dimensional system; otherwise the planar one.
SystemSpec magnetic_example(double theta, bool extended = false);

/// Long-time limit of the entropy production rate: sum_k beta_k^2 / |alpha_k|.
double mean_epr(const Spectrum& spectrum);

/// Reconstructs sum_k (alpha_k + i beta_k) U_k U_k^* (real part).
Matrix reconstruct_drift(const Spectrum& spectrum);

/// Throws unless A and Q are square, of equal size, and finite.
void require_well_formed(const SystemSpec& spec);

}  // namespace eprld
