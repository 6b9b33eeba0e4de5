#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace lck::calc {

// Real coordinates (x1, y1, ..., xn, yn) with z_j = x_j + i y_j.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords) : c_(std::move(coords)) { check(); }
  Point(std::initializer_list<double> coords) : c_(coords) { check(); }

  int dim() const { return static_cast<int>(c_.size()); }
  std::span<const double> coords() const { return c_; }
  const std::vector<double>& vec() const { return c_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  void check() const {
    for (double v : c_)
      if (!std::isfinite(v)) throw std::invalid_argument("point has a non-finite coordinate");
  }
  std::vector<double> c_;
};

}  // namespace lck::calc
