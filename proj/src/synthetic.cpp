#include "lttk/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "lttk/rng.hpp"

namespace lttk {

namespace {

// Per-step and per-token noise scales relative to noise_std.
constexpr double kStepNoiseFraction = 0.25;
constexpr double kTokenNoiseFraction = 0.5;

void check_config(const SyntheticConfig& c) {
  if (c.problems < 1 || c.samples_per_problem < 1 || c.steps < 1 ||
      c.tokens < 1 || c.dim < 1) {
    throw std::invalid_argument("SyntheticConfig: counts must be >= 1");
  }
  if (!(c.correct_rate > 0.0 && c.correct_rate < 1.0)) {
    throw std::invalid_argument("SyntheticConfig: correct_rate must be in (0, 1)");
  }
  if (!(c.noise_std > 0.0) || c.separation < 0.0) {
    throw std::invalid_argument(
        "SyntheticConfig: noise_std must be > 0 and separation >= 0");
  }
  if (!(c.dispersion_ratio > 1.0)) {
    throw std::invalid_argument(
        "SyntheticConfig: dispersion_ratio must be > 1");
  }
  if (c.answer_vocab < 2) {
    throw std::invalid_argument("SyntheticConfig: answer_vocab must be >= 2");
  }
  if (!(c.contraction > 0.0 && c.contraction <= 1.0)) {
    throw std::invalid_argument(
        "SyntheticConfig: contraction must be in (0, 1]");
  }
}

Vector random_unit_vector(Rng& rng, std::uint32_t dim) {
  Vector v(dim);
  double norm = 0.0;
  do {
    for (std::uint32_t k = 0; k < dim; ++k) v(k) = rng.normal();
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

}  // namespace

TrajectorySet generate(const SyntheticConfig& config) {
  check_config(config);
  TrajectorySet out;
  out.samples.reserve(static_cast<std::size_t>(config.problems) *
                      config.samples_per_problem);

  for (std::uint64_t problem = 0; problem < config.problems; ++problem) {
    Rng rng(Rng::mix(config.seed, problem));

    Vector correct_attractor(config.dim);
    for (std::uint32_t k = 0; k < config.dim; ++k) {
      correct_attractor(k) = rng.normal();
    }
    const std::uint32_t correct_answer =
        static_cast<std::uint32_t>(rng.uniform_int(config.answer_vocab));

    // One attractor per wrong answer, `separation` away from the correct
    // one in a random direction.
    std::vector<Vector> wrong_attractors(config.answer_vocab);
    for (std::uint32_t answer = 0; answer < config.answer_vocab; ++answer) {
      if (answer == correct_answer) continue;
      wrong_attractors[answer] =
          correct_attractor +
          config.separation * random_unit_vector(rng, config.dim);
    }

    for (std::uint32_t s = 0; s < config.samples_per_problem; ++s) {
      const bool correct = rng.uniform() < config.correct_rate;
      std::uint32_t answer = correct_answer;
      if (!correct) {
        const std::uint64_t pick = rng.uniform_int(config.answer_vocab - 1);
        answer = static_cast<std::uint32_t>(pick >= correct_answer ? pick + 1
                                                                   : pick);
      }
      const Vector& attractor =
          correct ? correct_attractor : wrong_attractors[answer];
      const double step_std = kStepNoiseFraction * config.noise_std *
                              (correct ? 1.0 : config.dispersion_ratio);
      const double token_std = kTokenNoiseFraction * config.noise_std;

      LabeledSample sample;
      sample.label = correct ? Label::Correct : Label::Incorrect;
      sample.trajectory.problem_id = problem;
      sample.trajectory.sample_id = s;
      sample.trajectory.answer_id = answer;
      sample.trajectory.thoughts.resize(config.steps);

      Vector state(config.dim);
      for (std::uint32_t k = 0; k < config.dim; ++k) {
        state(k) = rng.normal(0.0, config.noise_std);
      }
      for (std::uint32_t t = 0; t < config.steps; ++t) {
        for (std::uint32_t k = 0; k < config.dim; ++k) {
          state(k) += config.contraction * (attractor(k) - state(k)) +
                      rng.normal(0.0, step_std);
        }
        Matrix values(config.tokens, config.dim);
        for (std::uint32_t l = 0; l < config.tokens; ++l) {
          for (std::uint32_t k = 0; k < config.dim; ++k) {
            values(l, k) = state(k) + rng.normal(0.0, token_std);
          }
        }
        sample.trajectory.thoughts[t].values = std::move(values);
      }
      out.samples.push_back(std::move(sample));
    }
  }
  return out;
}

}  // namespace lttk
