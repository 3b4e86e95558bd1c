#include "nnfn/image.hpp"

#include <algorithm>
#include <cmath>

#include "nnfn/errors.hpp"

namespace nnfn {

ColorImage::ColorImage(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) {
    throw InvalidParameter("image dimensions must be non-negative");
  }
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

bool ColorImage::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

ColorImage ColorImage::clipped(double lo, double hi) const {
  ColorImage out = *this;
  for (double& v : out.data_) v = std::clamp(v, lo, hi);
  return out;
}

}  // namespace nnfn
