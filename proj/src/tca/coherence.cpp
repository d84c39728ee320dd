#include "itas/tca/coherence.hpp"

#include <string>

#include "itas/core/errors.hpp"

namespace itas {

Coherence::Coherence(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) fail(ErrorKind::kDomain, "coherence " + std::to_string(value) + " outside [0, 1]");
}

Coherence coherence(std::size_t frame_index, std::size_t length) {
  if (length == 0 || frame_index < 1 || frame_index > length) {
    fail(ErrorKind::kDomain, "frame index " + std::to_string(frame_index) + " outside segment of length " +
                                 std::to_string(length));
  }
  if (length == 1) return Coherence(0.0);
  return Coherence(static_cast<double>(frame_index - 1) / static_cast<double>(length - 1));
}

}  // namespace itas
