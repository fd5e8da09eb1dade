#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace seeker {

// One sensor's fixed-length slice of samples: `rows` consecutive samples by
// `cols` channels, row-major float32. This is the unit every codec, memo
// lookup and classifier operates on.
struct SampleWindow {
  int sensor_id = 0;
  int source = 0;                // ordinal of the recording the window was cut from
  std::int64_t start_index = 0;  // sample index of the first row within that recording
  int rows = 0;
  int cols = 0;
  std::vector<float> points;     // rows * cols, row-major
  std::optional<int> label;      // majority raw label over the window, if any

  float at(int r, int c) const { return points[static_cast<std::size_t>(r) * cols + c]; }
  float& at(int r, int c) { return points[static_cast<std::size_t>(r) * cols + c]; }

  std::span<const float> row(int r) const {
    return {points.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  std::span<const float> flat() const { return {points.data(), points.size()}; }

  bool same_shape(const SampleWindow& other) const {
    return rows == other.rows && cols == other.cols;
  }

  void validate() const {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("SampleWindow: non-positive shape");
    if (points.size() != static_cast<std::size_t>(rows) * cols)
      throw std::invalid_argument("SampleWindow: points size does not match shape");
  }
};

}  // namespace seeker
