#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "gazepair/geometry.hpp"
#include "gazepair/ksc.hpp"
#include "gazepair/rng.hpp"

namespace gazepair {

enum class GazeTrigger { gesture, dwell };

/// Parameterized stand-in for a headset gaze sensor. Angular error converts
/// to in-plane position error at the configured viewer distance; misselects
/// model the human picking the wrong hologram (wrong order, misheard cue).
struct GazeSensorModel {
  double angular_error_deg = 1.5;
  double viewer_distance = 2.0;
  double misselect_prob = 0.0;
  GazeTrigger trigger = GazeTrigger::gesture;
  double dwell_seconds = 2.0;

  // Per-axis stddev of the gaze impact point, in grid units.
  double position_sigma() const {
    return viewer_distance * std::tan(angular_error_deg * std::numbers::pi / 180.0);
  }

  void validate() const {
    if (angular_error_deg < 0.0) throw std::invalid_argument("sensor: angular error must be >= 0");
    if (viewer_distance <= 0.0) throw std::invalid_argument("sensor: viewer distance must be > 0");
    if (misselect_prob < 0.0 || misselect_prob > 1.0)
      throw std::invalid_argument("sensor: misselect_prob must be in [0, 1]");
    if (trigger == GazeTrigger::dwell && dwell_seconds <= 0.0)
      throw std::invalid_argument("sensor: dwell_seconds must be > 0");
  }

  static GazeSensorModel noiseless() { return {0.0, 2.0, 0.0, GazeTrigger::gesture, 2.0}; }

  // Dwell selections are easier to fumble; reflected as a higher misselect
  // rate rather than any timing model.
  static GazeSensorModel dwell_default() { return {1.5, 2.0, 0.01, GazeTrigger::dwell, 2.0}; }
};

struct GazeSample {
  Point3 point;
  double trigger_time = 0.0;  // seconds since sequence start
};

/// The concatenated discretized cell strings, in cue order. Local-only
/// material: this value must never be handed to a transport.
struct SharedSecret {
  std::string value;

  int length_digits() const { return static_cast<int>(value.size()); }
  friend bool operator==(const SharedSecret&, const SharedSecret&) = default;
};

/// One gaze capture aimed at `target`. With probability misselect_prob the
/// target is silently swapped for a uniformly random other hologram before
/// noise is applied.
inline GazeSample sample_gaze(const GridCell& target, const HologramLayout& layout,
                              const GazeSensorModel& model, const GridConfig& grid,
                              Rng& rng, double trigger_time = 0.0) {
  const auto it = std::find(layout.cells.begin(), layout.cells.end(), target);
  if (it == layout.cells.end())
    throw std::invalid_argument("sample_gaze: target is not a hologram in this layout");

  GridCell aimed = target;
  if (layout.cells.size() > 1 && rng.bernoulli(model.misselect_prob)) {
    const std::size_t self = static_cast<std::size_t>(it - layout.cells.begin());
    std::size_t other = rng.uniform_below(layout.cells.size() - 1);
    if (other >= self) ++other;
    aimed = layout.cells[other];
  }

  Point3 p = cell_center(aimed, grid);
  const double sigma = model.position_sigma();
  if (sigma > 0.0) {
    p.x = rng.normal(p.x, sigma);
    p.y = rng.normal(p.y, sigma);
    // Gaze rays strike the shared depth plane; error is in-plane only.
  }
  return {p, trigger_time};
}

struct SecretResult {
  std::optional<SharedSecret> secret;
  int failed_position = -1;  // index into the cue of the capture that missed

  bool ok() const { return secret.has_value(); }
};

/// Walks the cue digit by digit, capturing and discretizing each selection.
/// A capture that lands outside every error cube fails the build and names
/// the position; a capture of the *wrong* hologram is not detectable here
/// and surfaces later as a key-confirmation failure.
inline SecretResult build_shared_secret(const Ksc& ksc, const HologramLayout& layout,
                                        const GazeSensorModel& model, const GridConfig& grid,
                                        Rng& rng) {
  model.validate();
  std::string value;
  const double step_seconds = model.trigger == GazeTrigger::dwell ? model.dwell_seconds : 1.0;
  for (std::size_t i = 0; i < ksc.digits.size(); ++i) {
    const GridCell& target = layout.cell_for_digit(ksc.digits[i]);
    const GazeSample s =
        sample_gaze(target, layout, model, grid, rng, step_seconds * static_cast<double>(i + 1));
    const auto cell = discretize(s.point, grid);
    if (!cell) return {std::nullopt, static_cast<int>(i)};
    value += *cell;
  }
  return {SharedSecret{std::move(value)}, -1};
}

/// The secret a participant obtains with a perfect sensor: cue-ordered cell
/// strings straight from the layout. Also the host-side shortcut when the
/// host derives rather than gazes.
inline SharedSecret exact_shared_secret(const Ksc& ksc, const HologramLayout& layout) {
  std::string value;
  for (auto d : ksc.digits) value += cell_string(layout.cell_for_digit(d));
  return SharedSecret{std::move(value)};
}

}  // namespace gazepair
