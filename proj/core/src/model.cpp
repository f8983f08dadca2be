#include "eprld/model.hpp"

#include "eprld/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace eprld {

namespace {

using Complex = std::complex<double>;

Matrix symmetric_sqrt(const Matrix& S) {
  const Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

// Groups consecutive entries of an ascending sequence whose gaps are below tol.
std::vector<std::pair<Eigen::Index, Eigen::Index>> cluster_sorted(const Vector& values,
                                                                  double tol) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> groups;
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= values.size(); ++i) {
    if (i == values.size() || values(i) - values(i - 1) > tol) {
      groups.emplace_back(start, i - start);
      start = i;
    }
  }
  return groups;
}

struct RawChannel {
  EigenPair pair;
  ComplexVector vector;
};

// Splits an invariant subspace of N on which N^2 = -4 beta^2 into complex
// eigenvectors (u1 - i u2)/sqrt(2) and their conjugates.
void pair_rotation_block(const Matrix& basis, const Matrix& N, double beta, const Matrix& A,
                         std::vector<RawChannel>& out) {
  const Eigen::Index p = basis.cols();
  if (p % 2 != 0) {
    throw NumericError("spectral_decompose: odd-dimensional rotation block (A not normal?)");
  }
  const Matrix J = basis.transpose() * N * basis / (2.0 * beta);
  Matrix taken(p, 0);
  for (Eigen::Index pair_idx = 0; pair_idx < p / 2; ++pair_idx) {
    // Pick the coordinate axis with the largest component outside the span so far.
    Vector w1;
    double best = -1.0;
    for (Eigen::Index c = 0; c < p; ++c) {
      Vector e = Vector::Unit(p, c);
      if (taken.cols() > 0) e -= taken * (taken.transpose() * e);
      const double nrm = e.norm();
      if (nrm > best) {
        best = nrm;
        w1 = e / nrm;
      }
    }
    Vector w2 = J * w1;
    if (taken.cols() > 0) w2 -= taken * (taken.transpose() * w2);
    w2 -= w1 * w1.dot(w2);
    w2.normalize();
    taken.conservativeResize(p, taken.cols() + 2);
    taken.col(taken.cols() - 2) = w1;
    taken.col(taken.cols() - 1) = w2;

    const Vector u1 = basis * w1;
    const Vector u2 = basis * w2;
    ComplexVector plus(u1.size());
    for (Eigen::Index i = 0; i < u1.size(); ++i) {
      plus(i) = Complex(u1(i), -u2(i)) / std::numbers::sqrt2;
    }
    const Complex rayleigh = plus.dot(A.cast<Complex>() * plus);  // U^* A U
    const double alpha = rayleigh.real();
    const double b = std::abs(rayleigh.imag());
    // N u1 = 2 beta u2 makes `plus` the +i beta member.
    out.push_back({{alpha, b}, plus});
    out.push_back({{alpha, -b}, plus.conjugate()});
  }
}

double frob(const Matrix& m) { return m.norm(); }

}  // namespace

SystemSpec SystemSpec::with_identity_noise(Matrix drift, double tol) {
  SystemSpec spec;
  const auto d = drift.rows();
  spec.A = std::move(drift);
  spec.Q = Matrix::Identity(d, d);
  spec.tol_validate = tol;
  return spec;
}

bool Spectrum::is_reversible() const {
  return std::all_of(pairs.begin(), pairs.end(), [](const EigenPair& p) { return p.beta == 0.0; });
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

bool ValidationReport::usable() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const auto& c) { return c.passed || c.severity == Severity::warning; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void require_well_formed(const SystemSpec& spec) {
  if (spec.A.rows() == 0 || spec.A.rows() != spec.A.cols()) {
    throw DimensionError("drift matrix A must be square and non-empty");
  }
  if (spec.Q.rows() != spec.Q.cols() || spec.Q.rows() != spec.A.rows()) {
    throw DimensionError("diffusion matrix Q must be square with the dimension of A");
  }
  if (!spec.A.allFinite() || !spec.Q.allFinite()) {
    throw DataError("A and Q must have finite entries");
  }
  if (!(spec.tol_validate >= 0.0)) {
    throw DataError("tol_validate must be nonnegative");
  }
}

ValidationReport validate_system(const SystemSpec& spec) {
  require_well_formed(spec);
  const double tol = spec.tol_validate;
  const Matrix& A = spec.A;
  const Matrix& Q = spec.Q;
  const Matrix At = A.transpose();
  const Matrix M = A + At;
  const Matrix N = A - At;
  const double nA = frob(A);
  const double nQ = frob(Q);

  ValidationReport report;
  auto add = [&](std::string name, double residual, double threshold, bool passed,
                 Severity sev = Severity::error) {
    report.checks.push_back({std::move(name), passed, residual, threshold, sev});
  };

  {
    const double r = frob(A * At - At * A);
    const double thr = tol * nA * nA;
    add("normality", r, thr, r <= thr);
  }
  {
    const double r = frob(Q - Q.transpose());
    const double thr = tol * nQ;
    add("q_symmetric", r, thr, r <= thr);
  }
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Q + Q.transpose()), Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    add("q_positive_definite", min_eig, 0.0, min_eig > 0.0);
  }
  {
    const double r = frob(A * Q - Q * A);
    const double thr = tol * nA * nQ;
    add("aq_commute", r, thr, r <= thr);
  }
  {
    Eigen::EigenSolver<Matrix> es(A, false);
    const double max_re = es.eigenvalues().real().maxCoeff();
    add("stable", max_re, 0.0, max_re < 0.0);
  }
  {
    const double r = frob(N);
    const double thr = tol * std::max(nA, 1.0);
    add("not_symmetric", r, thr, r > thr, Severity::warning);
  }
  {
    const double r = frob(N * Q - Q * N);
    const double thr = tol * std::max(frob(N), 1.0) * nQ;
    add("commute_N_Q", r, thr, r <= thr);
  }
  {
    const Matrix sq = symmetric_sqrt(Q);
    const double r = frob(M * sq - sq * M);
    const double thr = tol * frob(M) * frob(sq);
    add("commute_M_sqrtQ", r, thr, r <= thr);
  }
  {
    const double r = frob(A * M - M * A);
    const double thr = tol * nA * frob(M);
    add("commute_A_M", r, thr, r <= thr);
  }
  return report;
}

Spectrum spectral_decompose(const SystemSpec& spec, bool with_vectors) {
  require_well_formed(spec);
  const Matrix& A = spec.A;
  const Eigen::Index d = A.rows();
  const Matrix M = A + A.transpose();
  const Matrix N = A - A.transpose();
  const double scale = std::max(1.0, frob(A));

  Eigen::SelfAdjointEigenSolver<Matrix> m_eig(M);
  if (m_eig.info() != Eigen::Success) {
    throw NumericError("spectral_decompose: symmetric eigensolver failed on A + A'");
  }
  const double m_tol = 1e-8 * scale;
  const double b_tol = 1e-8 * scale * scale;

  std::vector<RawChannel> channels;
  for (const auto& [start, len] : cluster_sorted(m_eig.eigenvalues(), m_tol)) {
    const Matrix V = m_eig.eigenvectors().middleCols(start, len);
    const Matrix Nv = V.transpose() * N * V;
    Eigen::SelfAdjointEigenSolver<Matrix> b_eig(Nv.transpose() * Nv);
    for (const auto& [bs, bl] : cluster_sorted(b_eig.eigenvalues(), b_tol)) {
      const Matrix W = V * b_eig.eigenvectors().middleCols(bs, bl);
      const double four_beta_sq = b_eig.eigenvalues().segment(bs, bl).mean();
      if (four_beta_sq <= b_tol) {
        for (Eigen::Index c = 0; c < W.cols(); ++c) {
          const Vector u = W.col(c);
          channels.push_back({{u.dot(A * u), 0.0}, u.cast<Complex>()});
        }
      } else {
        pair_rotation_block(W, N, 0.5 * std::sqrt(four_beta_sq), A, channels);
      }
    }
  }
  if (static_cast<Eigen::Index>(channels.size()) != d) {
    throw NumericError("spectral_decompose: channel count does not match dimension");
  }

  std::stable_sort(channels.begin(), channels.end(), [](const RawChannel& a, const RawChannel& b) {
    if (a.pair.alpha != b.pair.alpha) return a.pair.alpha < b.pair.alpha;
    if (std::abs(a.pair.beta) != std::abs(b.pair.beta)) {
      return std::abs(a.pair.beta) > std::abs(b.pair.beta);
    }
    return a.pair.beta > b.pair.beta;
  });

  Spectrum out;
  out.pairs.reserve(channels.size());
  out.channel_vectors.reserve(channels.size());
  for (auto& ch : channels) {
    out.pairs.push_back(ch.pair);
    out.channel_vectors.push_back(std::move(ch.vector));
  }

  const double resid = frob(A - reconstruct_drift(out));
  const double limit = std::max(1e-8, 100.0 * spec.tol_validate) * scale;
  if (!(resid <= limit)) {
    throw NumericError("spectral_decompose: reconstruction residual " + std::to_string(resid) +
                       " exceeds " + std::to_string(limit) + " (is A normal?)");
  }
  if (!with_vectors) out.channel_vectors.clear();
  return out;
}

Matrix reconstruct_drift(const Spectrum& spectrum) {
  if (!spectrum.has_vectors()) {
    throw DomainError("reconstruct_drift: spectrum carries no channel vectors");
  }
  const Eigen::Index d = spectrum.channel_vectors.front().size();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const auto& u = spectrum.channel_vectors[k];
    acc += Complex(spectrum.pairs[k].alpha, spectrum.pairs[k].beta) * (u * u.adjoint());
  }
  return acc.real();
}

DerivedMatrices derived_matrices(const SystemSpec& spec) {
  require_well_formed(spec);
  DerivedMatrices out;
  out.M = spec.A + spec.A.transpose();
  out.N = spec.A - spec.A.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.M);
  if (es.eigenvalues().maxCoeff() >= 0.0) {
    throw NumericError("derived_matrices: A + A' is not negative definite");
  }
  const Matrix m_inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                       es.eigenvectors().transpose();
  const Matrix gamma = -spec.Q * m_inv;
  out.Gamma = 0.5 * (gamma + gamma.transpose());
  Eigen::LLT<Matrix> llt(out.Gamma);
  if (llt.info() != Eigen::Success) {
    throw NumericError("derived_matrices: stationary covariance is not positive definite");
  }
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const auto d = static_cast<double>(spec.dim());
  out.log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
  return out;
}

SystemSpec reduce_to_identity_noise(const SystemSpec& spec) {
  require_well_formed(spec);
  return SystemSpec::with_identity_noise(spec.A, spec.tol_validate);
}

SystemSpec magnetic_example(double theta, bool extended) {
  if (!(theta > -std::numbers::pi / 2 && theta < std::numbers::pi / 2)) {
    throw DomainError("magnetic_example: theta must lie in (-pi/2, pi/2)");
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const int d = extended ? 3 : 2;
  SystemSpec spec;
  spec.A = Matrix::Zero(d, d);
  spec.A(0, 0) = -c;
  spec.A(0, 1) = s;
  spec.A(1, 0) = -s;
  spec.A(1, 1) = -c;
  if (extended) spec.A(2, 2) = -c;
  spec.Q = c * Matrix::Identity(d, d);
  return spec;
}

double mean_epr(const Spectrum& spectrum) {
  double sum = 0.0;
  for (const auto& p : spectrum.pairs) sum += p.beta * p.beta / std::abs(p.alpha);
  return sum;
}

}  // namespace eprld
