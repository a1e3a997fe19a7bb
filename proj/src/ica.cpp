#include "fatigue/ica.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fatigue/io_util.hpp"
#include "fatigue/rng.hpp"

namespace fatigue::ica {

WhitenResult whiten(const Eigen::MatrixXd& x) {
  const auto n_ch = x.rows();
  const auto n = x.cols();
  if (n <= n_ch)
    raise(ErrorCode::domain_error, "whiten: need more samples than channels");

  WhitenResult res;
  res.means = x.rowwise().mean();
  Eigen::MatrixXd xc = x.colwise() - res.means;

  const Eigen::MatrixXd cov = (xc * xc.transpose()) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    raise(ErrorCode::numeric_error, "whiten: eigendecomposition failed");

  // Ascending eigenvalues; keep those above the numerical-rank cutoff.
  const Eigen::VectorXd evals = eig.eigenvalues();
  const double cutoff = evals(n_ch - 1) * 1e-10;
  int rank = 0;
  for (int i = 0; i < n_ch; ++i)
    if (evals(i) > cutoff && evals(i) > 0.0) ++rank;
  if (rank == 0) raise(ErrorCode::domain_error, "whiten: all channels constant");
  if (rank < n_ch)
    res.warnings.push_back("rank deficient input: retained " + std::to_string(rank) + " of " +
                           std::to_string(n_ch) + " dimensions");

  res.rank = rank;
  res.whitening.resize(rank, n_ch);
  res.dewhiten.resize(n_ch, rank);
  for (int j = 0; j < rank; ++j) {
    const int src = static_cast<int>(n_ch) - 1 - j;  // descending order
    const double s = std::sqrt(evals(src));
    res.whitening.row(j) = eig.eigenvectors().col(src).transpose() / s;
    res.dewhiten.col(j) = eig.eigenvectors().col(src) * s;
  }
  res.z = res.whitening * xc;
  return res;
}

namespace {

// W <- (W W^T)^{-1/2} W (symmetric decorrelation).
void symmetric_orthogonalize(Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w * w.transpose());
  const Eigen::VectorXd d = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  w = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose() * w;
}

}  // namespace

Decomposition fastica(const WhitenResult& white, int k, uint64_t seed,
                      const FastIcaParams& params) {
  if (k <= 0 || k > white.rank)
    raise(ErrorCode::domain_error, "fastica: k must be in [1, rank]");
  const Eigen::MatrixXd& z = white.z;
  const auto n = z.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  Rng rng(seed);
  Eigen::MatrixXd w(k, white.rank);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < white.rank; ++j) w(i, j) = rng.gaussian();
  symmetric_orthogonalize(w);

  Decomposition dec;
  dec.component_delta.assign(k, 1.0);
  int iter = 0;
  double delta = 1.0;
  for (iter = 1; iter <= params.max_iter; ++iter) {
    const Eigen::MatrixXd wz = w * z;  // k x n
    // tanh contrast, written with exp so Eigen vectorizes the transcendental.
    const Eigen::MatrixXd g = 1.0 - 2.0 / ((2.0 * wz.array()).exp() + 1.0);
    const Eigen::VectorXd gp_mean =
        (1.0 - g.array().square()).rowwise().mean();  // E[g'(w z)]
    Eigen::MatrixXd w_new = g * z.transpose() * inv_n - gp_mean.asDiagonal() * w;
    symmetric_orthogonalize(w_new);

    delta = 0.0;
    for (int i = 0; i < k; ++i) {
      const double d = 1.0 - std::fabs(w_new.row(i).dot(w.row(i)));
      dec.component_delta[i] = d;
      delta = std::max(delta, d);
    }
    w = w_new;
    if (delta < params.tol) break;
  }

  dec.converged = delta < params.tol;
  dec.iterations = std::min(iter, params.max_iter);
  dec.final_delta = delta;
  if (!dec.converged)
    dec.warnings.push_back("fastica did not converge within " + std::to_string(params.max_iter) +
                           " iterations (final delta " + std::to_string(delta) + ")");

  dec.whitening = white.whitening;
  dec.unmixing = w;
  dec.sources = w * z;
  dec.means = white.means;
  // Rows of w are orthonormal, so its inverse on the retained subspace is
  // the transpose; undo the whitening with the stored dewhitening matrix.
  dec.mixing = white.dewhiten * w.transpose();
  return dec;
}

Decomposition decompose(const Eigen::MatrixXd& x, uint64_t seed, const FastIcaParams& params) {
  WhitenResult white = whiten(x);
  Decomposition dec = fastica(white, white.rank, seed, params);
  for (const auto& w : white.warnings) dec.warnings.push_back(w);
  return dec;
}

namespace {

double abs_pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean(), mb = b.mean();
  const Eigen::VectorXd da = a.array() - ma;
  const Eigen::VectorXd db = b.array() - mb;
  const double den = std::sqrt(da.squaredNorm() * db.squaredNorm());
  if (den == 0.0) return 0.0;
  return std::fabs(da.dot(db) / den);
}

}  // namespace

RejectResult reject_eog_components(const Decomposition& dec, const Eigen::MatrixXd& eog,
                                   double threshold) {
  if (threshold <= 0.0 || threshold >= 1.0)
    raise(ErrorCode::domain_error, "reject: threshold must be in (0,1)");
  if (eog.cols() != dec.sources.cols())
    raise(ErrorCode::shape_error, "reject: EOG and sources are not time-aligned");

  const int k = static_cast<int>(dec.sources.rows());
  RejectResult res;
  res.max_abs_corr.assign(k, 0.0);
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd src = dec.sources.row(i);
    for (int e = 0; e < eog.rows(); ++e)
      res.max_abs_corr[i] = std::max(res.max_abs_corr[i], abs_pearson(src, eog.row(e)));
    if (res.max_abs_corr[i] >= threshold) res.rejected.push_back(i);
  }

  if (static_cast<int>(res.rejected.size()) == k) {
    // Keep the least EOG-like component rather than zeroing the recording.
    int keep = 0;
    for (int i = 1; i < k; ++i)
      if (res.max_abs_corr[i] < res.max_abs_corr[keep]) keep = i;
    res.rejected.erase(std::find(res.rejected.begin(), res.rejected.end(), keep));
    res.warnings.push_back("threshold would reject all components; retained component " +
                           std::to_string(keep));
  }

  Eigen::MatrixXd kept = dec.sources;
  for (int idx : res.rejected) kept.row(idx).setZero();
  res.cleaned = dec.mixing * kept;
  res.cleaned.colwise() += dec.means;
  return res;
}

CleanStats clean_recording(RawRecording& rec, uint64_t seed, double threshold,
                           const FastIcaParams& params) {
  const auto eeg_idx = rec.montage.eeg_indices();
  const auto eog_idx = rec.montage.eog_indices();
  if (eog_idx.empty())
    raise(ErrorCode::domain_error, "clean_recording: montage has no EOG channels");

  Eigen::MatrixXd eeg(eeg_idx.size(), rec.n_samples);
  for (size_t i = 0; i < eeg_idx.size(); ++i)
    for (size_t t = 0; t < rec.n_samples; ++t) eeg(i, t) = rec.channel(eeg_idx[i])[t];
  Eigen::MatrixXd eog(eog_idx.size(), rec.n_samples);
  for (size_t i = 0; i < eog_idx.size(); ++i)
    for (size_t t = 0; t < rec.n_samples; ++t) eog(i, t) = rec.channel(eog_idx[i])[t];

  WhitenResult white = whiten(eeg);
  Decomposition dec;
  if (params.fit_subsample > 0 && white.z.cols() > params.fit_subsample) {
    const auto stride =
        (white.z.cols() + params.fit_subsample - 1) / params.fit_subsample;
    WhitenResult fit = white;
    fit.z.resize(white.rank, (white.z.cols() + stride - 1) / stride);
    for (Eigen::Index c = 0; c * stride < white.z.cols(); ++c)
      fit.z.col(c) = white.z.col(c * stride);
    dec = fastica(fit, white.rank, seed, params);
    dec.sources = dec.unmixing * white.z;  // full-length sources
  } else {
    dec = fastica(white, white.rank, seed, params);
  }
  for (const auto& w : white.warnings) dec.warnings.push_back(w);
  RejectResult rej = reject_eog_components(dec, eog, threshold);

  for (size_t i = 0; i < eeg_idx.size(); ++i)
    for (size_t t = 0; t < rec.n_samples; ++t)
      rec.channel(eeg_idx[i])[t] = static_cast<float>(rej.cleaned(i, t));

  CleanStats st;
  st.n_components = static_cast<int>(dec.sources.rows());
  st.rejected = rej.rejected;
  st.converged = dec.converged;
  st.iterations = dec.iterations;
  st.warnings = dec.warnings;
  st.warnings.insert(st.warnings.end(), rej.warnings.begin(), rej.warnings.end());
  return st;
}

namespace {

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << m(r, c);
    }
    os << '\n';
  }
  io::write_text_file(path, os.str());
}

}  // namespace

void dump_decomposition(const Decomposition& dec, const std::string& prefix) {
  write_matrix_csv(dec.whitening, prefix + "_whitening.csv");
  write_matrix_csv(dec.unmixing, prefix + "_unmixing.csv");
  write_matrix_csv(dec.mixing, prefix + "_mixing.csv");
  nlohmann::json j;
  j["converged"] = dec.converged;
  j["iterations"] = dec.iterations;
  j["final_delta"] = dec.final_delta;
  j["component_delta"] = dec.component_delta;
  j["warnings"] = dec.warnings;
  io::write_text_file(prefix + "_convergence.json", j.dump(2) + "\n");
}

}  // namespace fatigue::ica
