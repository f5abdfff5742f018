#pragma once

#include <vector>

#include "mocsim/interp.hpp"

namespace mocsim::interp::detail {

class LinearGeometry final : public PathGeometry {
 public:
  LinearGeometry(Point start, Point end);

  std::size_t dimension() const override { return start_.size(); }
  double length() const override { return length_; }
  Point point(double s) const override;
  Point tangent(double s) const override;

 private:
  Point start_;
  Point end_;
  Point direction_;
  double length_ = 0.0;
};

/// Circle in the first two coordinates, optional linear third coordinate.
class ArcGeometry final : public PathGeometry {
 public:
  ArcGeometry(const Point& start, std::array<double, 2> center, double sweep_rad,
              bool helical, double z_target);

  std::size_t dimension() const override { return helical_ ? 3 : 2; }
  double length() const override { return length_; }
  Point point(double s) const override;
  Point tangent(double s) const override;

 private:
  std::array<double, 2> center_;
  double radius_ = 0.0;
  double start_angle_ = 0.0;
  double sweep_ = 0.0;
  bool helical_ = false;
  double z0_ = 0.0;
  double dz_ = 0.0;
  double length_ = 0.0;
};

/// Centripetal Catmull-Rom through the given points, reparameterized by arc
/// length. Each span is a cubic in u in [0,1]; a per-span table of
/// (u, s) breakpoints seeds a Newton inversion of s(u).
class SplineGeometry final : public PathGeometry {
 public:
  explicit SplineGeometry(std::vector<Point> points);

  std::size_t dimension() const override { return dim_; }
  double length() const override { return length_; }
  Point point(double s) const override;
  Point tangent(double s) const override;

  /// Arc length at which the curve passes through points[i].
  double knot_length(std::size_t i) const { return span_starts_.at(i); }

 private:
  struct Span {
    // C(u) = a u^3 + b u^2 + c u + d
    Point a, b, c, d;
    std::vector<double> u;  // breakpoints, u.front()==0, u.back()==1
    std::vector<double> s;  // arc length from span start at each breakpoint
    double length = 0.0;
  };

  Point eval(const Span& span, double u) const;
  Point deriv(const Span& span, double u) const;
  double speed(const Span& span, double u) const;
  double integrate(const Span& span, double u0, double u1) const;
  void subdivide(Span& span, double u0, double u1, int depth);
  std::pair<std::size_t, double> locate(double s) const;

  std::vector<Point> points_;
  std::size_t dim_ = 0;
  std::vector<Span> spans_;
  std::vector<double> span_starts_;
  double length_ = 0.0;
};

}  // namespace mocsim::interp::detail
