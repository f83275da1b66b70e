#include "fgda/mode_grid.hpp"

#include <string>

#include "fgda/errors.hpp"

namespace fgda {

ModeGrid::ModeGrid(int n1, int n2, double lx, double ly)
    : n1_(n1), n2_(n2), lx_(lx), ly_(ly) {
  if (n1 <= 0 || n2 <= 0 || n1 % 2 != 0 || n2 % 2 != 0) {
    throw ValidationError("mode counts must be positive even integers, got N1=" +
                          std::to_string(n1) + " N2=" + std::to_string(n2));
  }
  if (!(lx > 0.0) || !(ly > 0.0)) {
    throw ValidationError("domain lengths must be positive");
  }
  h1_ = n1_ / 2;
  h2_ = n2_ / 2;
  size_ = (n1_ + 1) * (n2_ + 1);
}

int ModeGrid::lin(int c, int d) const {
  if (!in_band(c, d)) {
    throw ValidationError("mode (" + std::to_string(c) + "," + std::to_string(d) +
                          ") outside band |c|<=" + std::to_string(h1_) +
                          ", |d|<=" + std::to_string(h2_));
  }
  return (c + h1_) * (n2_ + 1) + (d + h2_);
}

std::pair<int, int> ModeGrid::mode(int k) const {
  if (k < 0 || k >= size_) {
    throw ValidationError("linear index " + std::to_string(k) +
                          " outside [0," + std::to_string(size_) + ")");
  }
  return {k / (n2_ + 1) - h1_, k % (n2_ + 1) - h2_};
}

}  // namespace fgda
