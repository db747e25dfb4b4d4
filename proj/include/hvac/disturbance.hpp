#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "hvac/network.hpp"

namespace hvac {

enum class Interpolation { Hold, Linear };

struct Breakpoint {
  double time_hours = 0.0;
  double outdoor = 0.0;
  Vector gains;
};

/// Piecewise profile of outdoor temperature and zone heat gains.
class DisturbanceSchedule {
 public:
  DisturbanceSchedule() = default;

  DisturbanceSchedule(std::vector<Breakpoint> points, Interpolation interp)
      : points_(std::move(points)), interp_(interp) {
    if (points_.empty()) throw ConfigError("schedule needs at least one breakpoint");
    if (points_.front().time_hours != 0.0)
      throw ConfigError("first schedule breakpoint must be at t = 0");
    const auto n = points_.front().gains.size();
    for (std::size_t k = 0; k < points_.size(); ++k) {
      if (k > 0 && !(points_[k].time_hours > points_[k - 1].time_hours))
        throw ConfigError("schedule times must be strictly increasing (breakpoint " +
                          std::to_string(k) + ")");
      if (points_[k].gains.size() != n)
        throw DimensionError("schedule breakpoint " + std::to_string(k) +
                             " has a different number of gains");
      AmbientSample{points_[k].outdoor, points_[k].gains}.validate(static_cast<std::size_t>(n));
    }
  }

  /// Constant ambient for all time.
  static DisturbanceSchedule constant(const AmbientSample& amb) {
    return DisturbanceSchedule({{0.0, amb.outdoor, amb.gains}}, Interpolation::Hold);
  }

  const std::vector<Breakpoint>& breakpoints() const noexcept { return points_; }
  Interpolation interpolation() const noexcept { return interp_; }
  std::size_t zones() const noexcept { return points_.empty() ? 0 : points_.front().gains.size(); }

  AmbientSample at_hours(double t_hours) const {
    auto it = std::upper_bound(points_.begin(), points_.end(), t_hours,
                               [](double t, const Breakpoint& b) { return t < b.time_hours; });
    if (it == points_.begin()) return {points_.front().outdoor, points_.front().gains};
    const auto& lo = *std::prev(it);
    if (interp_ == Interpolation::Hold || it == points_.end()) return {lo.outdoor, lo.gains};
    const auto& hi = *it;
    const double a = (t_hours - lo.time_hours) / (hi.time_hours - lo.time_hours);
    return {lo.outdoor + a * (hi.outdoor - lo.outdoor), lo.gains + a * (hi.gains - lo.gains)};
  }

  AmbientSample at_seconds(double t) const { return at_hours(t / 3600.0); }

  /// True when the ambient is identical everywhere on [h1, h2). A breakpoint
  /// exactly at h2 starts the next regime and does not count.
  bool constant_on(double h1, double h2) const {
    for (std::size_t k = 0; k < points_.size(); ++k) {
      const double t = points_[k].time_hours;
      if (t > h1 && t < h2) return false;
      if (interp_ == Interpolation::Linear && k + 1 < points_.size() && t <= h1 &&
          points_[k + 1].time_hours > h1) {
        const auto& nx = points_[k + 1];
        if (nx.outdoor != points_[k].outdoor || nx.gains != points_[k].gains) return false;
      }
    }
    return true;
  }

 private:
  std::vector<Breakpoint> points_;
  Interpolation interp_ = Interpolation::Hold;
};

}  // namespace hvac
