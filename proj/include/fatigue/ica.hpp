#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fatigue/core_types.hpp"

namespace fatigue::ica {

struct WhitenResult {
  Eigen::MatrixXd whitening;  // k x n_ch
  Eigen::MatrixXd dewhiten;   // n_ch x k (pseudo-inverse of whitening)
  Eigen::MatrixXd z;          // k x n_samples, identity covariance
  Eigen::VectorXd means;      // per-channel means removed before whitening
  int rank = 0;
  std::vector<std::string> warnings;
};

// PCA whitening with subspace truncation at the numerical rank.
WhitenResult whiten(const Eigen::MatrixXd& x);

struct Decomposition {
  Eigen::MatrixXd whitening;  // k x n_ch
  Eigen::MatrixXd unmixing;   // k x k, orthonormal rows
  Eigen::MatrixXd mixing;     // n_ch x k
  Eigen::MatrixXd sources;    // k x n_samples
  Eigen::VectorXd means;      // n_ch
  bool converged = false;
  int iterations = 0;
  double final_delta = 0.0;
  std::vector<double> component_delta;  // last direction change per component
  std::vector<std::string> warnings;
};

struct FastIcaParams {
  int max_iter = 500;
  double tol = 1e-6;
  // clean_recording estimates the unmixing matrix on at most this many time
  // points (stride subsampling); 0 fits on everything. Sources and the
  // rejection correlations always use the full recording.
  int fit_subsample = 40000;
};

// Symmetric FastICA, tanh contrast, on already-whitened data.
Decomposition fastica(const WhitenResult& white, int k, uint64_t seed,
                      const FastIcaParams& params = {});

// whiten + fastica on raw channel data (k = numerical rank).
Decomposition decompose(const Eigen::MatrixXd& x, uint64_t seed,
                        const FastIcaParams& params = {});

struct RejectResult {
  Eigen::MatrixXd cleaned;          // n_ch x n_samples
  std::vector<int> rejected;        // component indices zeroed out
  std::vector<double> max_abs_corr; // per component, vs any EOG channel
  std::vector<std::string> warnings;
};

// Zero every component whose |Pearson corr| with any EOG row reaches the
// threshold, then reconstruct. At least one component is always retained.
RejectResult reject_eog_components(const Decomposition& dec, const Eigen::MatrixXd& eog,
                                   double threshold = 0.6);

// Full artifact-cleaning pass over a recording: decompose the EEG rows,
// reject EOG-correlated components, write the cleaned EEG back. The EOG
// rows are left untouched.
struct CleanStats {
  int n_components = 0;
  std::vector<int> rejected;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;
};

CleanStats clean_recording(RawRecording& rec, uint64_t seed, double threshold = 0.6,
                           const FastIcaParams& params = {});

// Audit dump: whitening/unmixing/mixing as CSV plus a JSON convergence
// sidecar, written as <prefix>_whitening.csv etc.
void dump_decomposition(const Decomposition& dec, const std::string& prefix);

}  // namespace fatigue::ica
