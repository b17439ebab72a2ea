#include "gifair/engine/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gifair {

std::string_view to_string(ScheduleKind kind) noexcept {
  switch (kind) {
    case ScheduleKind::inverse_t:
      return "inverse_t";
    case ScheduleKind::inverse_sqrt:
      return "inverse_sqrt";
    case ScheduleKind::constant:
      return "constant";
  }
  return "unknown";
}

LrSchedule::LrSchedule(ScheduleKind kind, double beta, double gamma)
    : kind_(kind), beta_(beta), gamma_(gamma) {
  if (!(beta_ > 0.0) || !std::isfinite(beta_))
    throw std::invalid_argument("learning-rate beta must be positive and finite");
}

LrSchedule LrSchedule::inverse_t(double beta, double gamma, std::size_t local_steps) {
  if (local_steps == 0) throw std::invalid_argument("inverse_t: local_steps must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("inverse_t: gamma must be positive and finite");
  if (gamma < static_cast<double>(local_steps))
    throw std::invalid_argument("inverse_t: gamma=" + std::to_string(gamma) +
                                " must be >= local_steps=" + std::to_string(local_steps) +
                                " so that eta(t) <= 2 eta(t+E)");
  return LrSchedule(ScheduleKind::inverse_t, beta, gamma);
}

LrSchedule LrSchedule::inverse_sqrt(double beta, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("inverse_sqrt: gamma must be positive and finite");
  return LrSchedule(ScheduleKind::inverse_sqrt, beta, gamma);
}

LrSchedule LrSchedule::constant(double beta) {
  return LrSchedule(ScheduleKind::constant, beta, 0.0);
}

double LrSchedule::rate(std::size_t t) const noexcept {
  const auto tt = static_cast<double>(t);
  switch (kind_) {
    case ScheduleKind::inverse_t:
      return beta_ / (tt + gamma_);
    case ScheduleKind::inverse_sqrt:
      return beta_ / std::sqrt(tt + gamma_);
    case ScheduleKind::constant:
      return beta_;
  }
  return beta_;
}

}  // namespace gifair
