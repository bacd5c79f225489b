#pragma once

#include <string_view>

namespace orbit_mec {

/// What one unit of epsilon decay is charged against.
enum class DecayUnit { step, episode };

std::string_view to_string(DecayUnit unit) noexcept;
DecayUnit parse_decay_unit(std::string_view text);

struct Hyperparams {
  double learning_rate = 0.1;
  double discount = 0.9;
  double epsilon = 0.05;
  /// epsilon_k = max(0, epsilon - k * epsilon_decay), k counted in decay_unit.
  double epsilon_decay = 4e-6;
  DecayUnit decay_unit = DecayUnit::episode;
  int episodes = 10000;
  int eval_episodes = 1000;

  /// Throws ConfigError unless 0 < lr < 1, 0 <= gamma < 1, 0 <= eps <= 1.
  void validate() const;

  double epsilon_at(long long steps, long long episodes_done) const;
};

}  // namespace orbit_mec
