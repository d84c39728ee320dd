#pragma once

#include <cstddef>

namespace itas {

// Relative progression of a frame within its action segment, in [0, 1].
class Coherence {
 public:
  constexpr Coherence() = default;
  // Throws a domain error outside [0, 1].
  explicit Coherence(double value);

  constexpr double value() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

// (i - 1) / (length - 1) for the 1-based frame index i of a segment; a
// single-frame segment gets 0.
Coherence coherence(std::size_t frame_index, std::size_t length);

}  // namespace itas
