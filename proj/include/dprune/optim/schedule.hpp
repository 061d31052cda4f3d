#pragma once

#include <dprune/error.hpp>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dprune {

enum class ScheduleKind { constant, constant_and_drop, garipov_linear };

inline std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::constant_and_drop: return "constant_and_drop";
    case ScheduleKind::garipov_linear: return "garipov_linear";
  }
  return "?";
}

inline ScheduleKind parse_schedule_kind(std::string_view s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "constant_and_drop") return ScheduleKind::constant_and_drop;
  if (s == "garipov_linear") return ScheduleKind::garipov_linear;
  throw DomainError("unknown schedule '" + std::string(s) + "'");
}

struct LrDrop {
  double at_fraction;  // drop takes effect from this fraction of training on
  double factor;       // multiplier applied from then on

  bool operator==(const LrDrop&) const = default;
};

struct LrSchedule {
  ScheduleKind kind = ScheduleKind::constant;
  double base = 0.1;
  std::vector<LrDrop> drops;

  bool operator==(const LrSchedule&) const = default;

  void validate() const {
    if (!(base > 0.0)) throw DomainError("schedule: base learning rate must be positive");
    for (const auto& d : drops) {
      if (!(d.factor > 0.0)) throw DomainError("schedule: drop factors must be positive");
      if (!(d.at_fraction >= 0.0 && d.at_fraction <= 1.0)) throw DomainError("schedule: drop points must lie in [0, 1]");
    }
  }
};

/// Learning rate at `fraction` of the way through training.
///
/// garipov_linear: base on [0, 0.5), linear decay to 1% of base on
/// [0.5, 0.9), then 1% of base.
inline double lr_at(const LrSchedule& s, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw DomainError("lr_at: fraction must lie in [0, 1]");
  switch (s.kind) {
    case ScheduleKind::constant:
      return s.base;
    case ScheduleKind::constant_and_drop: {
      double lr = s.base;
      for (const auto& d : s.drops) {
        if (fraction >= d.at_fraction) lr *= d.factor;
      }
      return lr;
    }
    case ScheduleKind::garipov_linear:
      if (fraction < 0.5) return s.base;
      if (fraction < 0.9) return (1.0 - (fraction - 0.5) * 0.99 / 0.4) * s.base;
      return 0.01 * s.base;
  }
  return s.base;
}

}  // namespace dprune
