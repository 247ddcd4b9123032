#include "lttk/spectral.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <string>

namespace lttk {

namespace {

// Relative cutoff below which singular values are treated as exact zeros.
constexpr double kZeroCutoff = 1e-12;

// Descending nonzero singular values after the relative cutoff.
std::vector<double> nonzero_singular_values(const SpectrumResult& s) {
  std::vector<double> out;
  if (s.singular_values.size() == 0) return out;
  const double threshold = kZeroCutoff * s.singular_values(0);
  for (Eigen::Index i = 0; i < s.singular_values.size(); ++i) {
    const double value = s.singular_values(i);
    if (value > threshold && value > 0.0) out.push_back(value);
  }
  return out;
}

void require_nonzero(const std::vector<double>& sigma) {
  if (sigma.empty()) {
    throw DegenerateInputError(
        "all-zero latent thought: Gram trace is 0, spectrum metrics are "
        "undefined");
  }
}

}  // namespace

SpectrumResult spectrum(const LatentThought& thought) {
  if (thought.values.size() == 0) {
    throw std::invalid_argument("spectrum: empty latent thought");
  }
  if (!thought.values.allFinite()) {
    throw std::invalid_argument("spectrum: non-finite entry in latent thought");
  }
  SpectrumResult result;
  Eigen::BDCSVD<Matrix> svd(thought.values);
  result.singular_values = svd.singularValues();
  result.gram_eigenvalues = result.singular_values.array().square();
  result.trace = result.gram_eigenvalues.sum();
  return result;
}

double entropy(const LatentThought& thought, double alpha) {
  return entropy(spectrum(thought), alpha);
}

double entropy(const SpectrumResult& s, double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("entropy: alpha must be > 0");
  }
  const std::vector<double> sigma = nonzero_singular_values(s);
  require_nonzero(sigma);
  double total = 0.0;
  for (double value : sigma) total += value * value;
  if (alpha == 1.0) {
    double h = 0.0;
    for (double value : sigma) {
      const double p = value * value / total;
      h -= p * std::log(p);
    }
    return std::max(h, 0.0);
  }
  double power_sum = 0.0;
  for (double value : sigma) {
    power_sum += std::pow(value * value / total, alpha);
  }
  return std::log(power_sum) / (1.0 - alpha);
}

double effective_rank(const LatentThought& thought) {
  return effective_rank(spectrum(thought));
}

double effective_rank(const SpectrumResult& s) {
  const std::vector<double> sigma = nonzero_singular_values(s);
  require_nonzero(sigma);
  double total = 0.0;
  for (double value : sigma) total += value;
  double h = 0.0;
  for (double value : sigma) {
    const double q = value / total;
    h -= q * std::log(q);
  }
  return std::exp(std::max(h, 0.0));
}

double anisotropy(const LatentThought& thought) {
  return anisotropy(spectrum(thought));
}

double anisotropy(const SpectrumResult& s) {
  const std::vector<double> sigma = nonzero_singular_values(s);
  require_nonzero(sigma);
  double total = 0.0;
  for (double value : sigma) total += value * value;
  return sigma.front() * sigma.front() / total;
}

MetricProfile metric_profile(const Trajectory& trajectory, double alpha) {
  MetricProfile profile;
  const std::size_t steps = trajectory.steps();
  profile.entropy.resize(steps);
  profile.effective_rank.resize(steps);
  profile.anisotropy.resize(steps);
  profile.intrinsic_dimension.assign(
      steps, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = 0; t < steps; ++t) {
    try {
      const SpectrumResult s = spectrum(trajectory.thoughts[t]);
      profile.entropy[t] = entropy(s, alpha);
      profile.effective_rank[t] = effective_rank(s);
      profile.anisotropy[t] = anisotropy(s);
    } catch (const DegenerateInputError& error) {
      throw DegenerateInputError("step " + std::to_string(t) + ": " +
                                 error.what());
    }
  }
  return profile;
}

}  // namespace lttk
