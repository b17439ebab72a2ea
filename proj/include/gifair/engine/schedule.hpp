#pragma once

#include <cstddef>
#include <string_view>

namespace gifair {

enum class ScheduleKind { inverse_t, inverse_sqrt, constant };

std::string_view to_string(ScheduleKind kind) noexcept;

/// Learning rate eta(t) indexed by the global step t = round * E + local step.
class LrSchedule {
 public:
  /// eta(t) = beta / (t + gamma). Requires gamma >= local_steps, which is
  /// exactly the condition eta(t) <= 2 eta(t + E) for all t >= 0.
  static LrSchedule inverse_t(double beta, double gamma, std::size_t local_steps);

  /// eta(t) = beta / sqrt(t + gamma).
  static LrSchedule inverse_sqrt(double beta, double gamma);

  /// eta(t) = beta.
  static LrSchedule constant(double beta);

  double rate(std::size_t t) const noexcept;

  ScheduleKind kind() const noexcept { return kind_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }

 private:
  LrSchedule(ScheduleKind kind, double beta, double gamma);

  ScheduleKind kind_;
  double beta_;
  double gamma_;
};

}  // namespace gifair
