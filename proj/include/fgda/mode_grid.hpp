#pragma once

#include <utility>

namespace fgda {

// Bookkeeping for the truncated Fourier mode set of a doubly periodic box
// (0,Lx) x (0,Ly).  Modes are integer pairs (c,d) with |c| <= N1/2 and
// |d| <= N2/2, stored row-major in c then d:
//
//   lin(c,d) = (c + N1/2)*(N2+1) + (d + N2/2)
//
// This ordering makes index negation a mirror: lin(-c,-d) = N-1-lin(c,d),
// with the mean mode (0,0) sitting exactly at the center (N-1)/2.  All
// operators in the library rely on that mirror property.
class ModeGrid {
 public:
  // N1, N2 must be positive and even; Lx, Ly positive.
  ModeGrid(int n1, int n2, double lx, double ly);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }

  // Total number of retained modes, N = (N1+1)(N2+1).  Always odd.
  int size() const { return size_; }
  int half1() const { return h1_; }
  int half2() const { return h2_; }

  bool in_band(int c, int d) const {
    return c >= -h1_ && c <= h1_ && d >= -h2_ && d <= h2_;
  }

  int lin(int c, int d) const;
  std::pair<int, int> mode(int k) const;

  // Linear index of the mean mode (0,0).
  int center() const { return (size_ - 1) / 2; }

  // Linear index of the negated mode: mirror(lin(c,d)) = lin(-c,-d).
  int mirror(int k) const { return size_ - 1 - k; }

  bool operator==(const ModeGrid& other) const {
    return n1_ == other.n1_ && n2_ == other.n2_ && lx_ == other.lx_ &&
           ly_ == other.ly_;
  }

 private:
  int n1_, n2_;
  double lx_, ly_;
  int h1_, h2_, size_;
};

}  // namespace fgda
