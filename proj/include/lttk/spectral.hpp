#pragma once

#include <stdexcept>
#include <vector>

#include "lttk/trajectory.hpp"

namespace lttk {

// All-zero input: the Gram trace is 0 and no spectrum-based metric is
// defined.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular values of one latent thought and the matching Gram spectrum.
// gram_eigenvalues[i] == singular_values[i]^2; both descending.
struct SpectrumResult {
  Vector singular_values;
  Vector gram_eigenvalues;
  double trace = 0.0;  // sum of gram_eigenvalues
};

SpectrumResult spectrum(const LatentThought& thought);

// Matrix-based Renyi entropy of the normalized Gram spectrum, natural log.
// alpha = 1 (default) is the von Neumann limit -sum p_i ln p_i with
// p_i = lambda_i / trace; zero eigenvalues contribute nothing.
double entropy(const LatentThought& thought, double alpha = 1.0);
double entropy(const SpectrumResult& spectrum, double alpha = 1.0);

// exp of the Shannon entropy of the normalized singular values; soft count
// of dominant directions in [1, K].
double effective_rank(const LatentThought& thought);
double effective_rank(const SpectrumResult& spectrum);

// Fraction of squared spectral mass on the leading direction, in (0, 1].
double anisotropy(const LatentThought& thought);
double anisotropy(const SpectrumResult& spectrum);

// Per-step metric values for one trajectory. intrinsic_dimension is left
// as NaN here; the geometry module fills it.
struct MetricProfile {
  std::vector<double> entropy;
  std::vector<double> effective_rank;
  std::vector<double> anisotropy;
  std::vector<double> intrinsic_dimension;

  std::size_t steps() const { return entropy.size(); }
};

MetricProfile metric_profile(const Trajectory& trajectory, double alpha = 1.0);

}  // namespace lttk
