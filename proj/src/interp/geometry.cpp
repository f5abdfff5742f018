#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mocsim/error.hpp"

namespace mocsim::interp::detail {
namespace {

constexpr double kChordError = 1e-4;
constexpr int kMaxDepth = 40;

double norm(const Point& p) {
  double sum = 0.0;
  for (double v : p) sum += v * v;
  return std::sqrt(sum);
}

Point sub(const Point& a, const Point& b) {
  Point out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kNodes{0.0, -0.5384693101056831, 0.5384693101056831,
                                       -0.9061798459386640, 0.9061798459386640};
constexpr std::array<double, 5> kWeights{0.5688888888888889, 0.4786286704993665,
                                         0.4786286704993665, 0.2369268850561891,
                                         0.2369268850561891};

}  // namespace

LinearGeometry::LinearGeometry(Point start, Point end)
    : start_(std::move(start)), end_(std::move(end)) {
  Point delta = sub(end_, start_);
  length_ = norm(delta);
  direction_.assign(delta.size(), 0.0);
  if (length_ > 0.0)
    for (std::size_t i = 0; i < delta.size(); ++i) direction_[i] = delta[i] / length_;
}

Point LinearGeometry::point(double s) const {
  if (s >= length_) return end_;
  if (s <= 0.0) return start_;
  Point p(start_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = start_[i] + direction_[i] * s;
  return p;
}

Point LinearGeometry::tangent(double) const { return direction_; }

ArcGeometry::ArcGeometry(const Point& start, std::array<double, 2> center, double sweep_rad,
                         bool helical, double z_target)
    : center_(center), sweep_(sweep_rad), helical_(helical) {
  const double dx = start[0] - center[0];
  const double dy = start[1] - center[1];
  radius_ = std::hypot(dx, dy);
  start_angle_ = std::atan2(dy, dx);
  if (helical_) {
    z0_ = start[2];
    dz_ = z_target - z0_;
  }
  length_ = std::hypot(radius_ * sweep_, dz_);
}

Point ArcGeometry::point(double s) const {
  const double f = std::clamp(s / length_, 0.0, 1.0);
  const double angle = start_angle_ + sweep_ * f;
  Point p{center_[0] + radius_ * std::cos(angle), center_[1] + radius_ * std::sin(angle)};
  if (helical_) p.push_back(f >= 1.0 ? z0_ + dz_ : z0_ + dz_ * f);
  return p;
}

Point ArcGeometry::tangent(double s) const {
  const double f = std::clamp(s / length_, 0.0, 1.0);
  const double angle = start_angle_ + sweep_ * f;
  const double k = radius_ * sweep_ / length_;
  Point t{-k * std::sin(angle), k * std::cos(angle)};
  if (helical_) t.push_back(dz_ / length_);
  return t;
}

SplineGeometry::SplineGeometry(std::vector<Point> points) : points_(std::move(points)) {
  dim_ = points_.front().size();
  const std::size_t n = points_.size();
  auto at = [&](std::ptrdiff_t i) -> Point {
    // Phantom end points continue the first and last chords.
    if (i < 0) {
      Point p(dim_);
      for (std::size_t k = 0; k < dim_; ++k) p[k] = 2.0 * points_[0][k] - points_[1][k];
      return p;
    }
    if (static_cast<std::size_t>(i) >= n) {
      Point p(dim_);
      for (std::size_t k = 0; k < dim_; ++k) p[k] = 2.0 * points_[n - 1][k] - points_[n - 2][k];
      return p;
    }
    return points_[static_cast<std::size_t>(i)];
  };

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const Point q0 = at(ii - 1), q1 = at(ii), q2 = at(ii + 1), q3 = at(ii + 2);
    const double t01 = std::sqrt(norm(sub(q1, q0)));
    const double t12 = std::sqrt(norm(sub(q2, q1)));
    const double t23 = std::sqrt(norm(sub(q3, q2)));
    Span span;
    span.a.resize(dim_);
    span.b.resize(dim_);
    span.c.resize(dim_);
    span.d.resize(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
      const double m1 =
          t12 * ((q1[k] - q0[k]) / t01 - (q2[k] - q0[k]) / (t01 + t12) + (q2[k] - q1[k]) / t12);
      const double m2 =
          t12 * ((q2[k] - q1[k]) / t12 - (q3[k] - q1[k]) / (t12 + t23) + (q3[k] - q2[k]) / t23);
      span.d[k] = q1[k];
      span.c[k] = m1;
      span.b[k] = -3.0 * q1[k] - 2.0 * m1 + 3.0 * q2[k] - m2;
      span.a[k] = 2.0 * q1[k] + m1 - 2.0 * q2[k] + m2;
    }
    span.u.push_back(0.0);
    span.s.push_back(0.0);
    constexpr int kInitialPieces = 8;
    for (int piece = 0; piece < kInitialPieces; ++piece)
      subdivide(span, static_cast<double>(piece) / kInitialPieces,
                static_cast<double>(piece + 1) / kInitialPieces, 0);
    span.u.back() = 1.0;
    span.length = span.s.back();
    span_starts_.push_back(length_);
    length_ += span.length;
    spans_.push_back(std::move(span));
  }
  span_starts_.push_back(length_);
}

Point SplineGeometry::eval(const Span& span, double u) const {
  Point p(dim_);
  for (std::size_t k = 0; k < dim_; ++k)
    p[k] = ((span.a[k] * u + span.b[k]) * u + span.c[k]) * u + span.d[k];
  return p;
}

Point SplineGeometry::deriv(const Span& span, double u) const {
  Point p(dim_);
  for (std::size_t k = 0; k < dim_; ++k)
    p[k] = (3.0 * span.a[k] * u + 2.0 * span.b[k]) * u + span.c[k];
  return p;
}

double SplineGeometry::speed(const Span& span, double u) const { return norm(deriv(span, u)); }

double SplineGeometry::integrate(const Span& span, double u0, double u1) const {
  const double half = (u1 - u0) / 2.0;
  const double mid = (u0 + u1) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < kNodes.size(); ++i) sum += kWeights[i] * speed(span, mid + half * kNodes[i]);
  return sum * half;
}

void SplineGeometry::subdivide(Span& span, double u0, double u1, int depth) {
  const double um = (u0 + u1) / 2.0;
  const Point p0 = eval(span, u0), p1 = eval(span, u1), pm = eval(span, um);
  Point chord_mid(dim_);
  for (std::size_t k = 0; k < dim_; ++k) chord_mid[k] = (p0[k] + p1[k]) / 2.0;
  const double chord_error = norm(sub(pm, chord_mid));
  const double whole = integrate(span, u0, u1);
  const double halves = integrate(span, u0, um) + integrate(span, um, u1);
  const bool converged = chord_error <= kChordError && std::abs(whole - halves) <= 1e-13 * (1.0 + whole);
  if (!converged && depth < kMaxDepth) {
    subdivide(span, u0, um, depth + 1);
    subdivide(span, um, u1, depth + 1);
    return;
  }
  span.u.push_back(u1);
  span.s.push_back(span.s.back() + halves);
}

std::pair<std::size_t, double> SplineGeometry::locate(double s) const {
  auto it = std::upper_bound(span_starts_.begin(), span_starts_.end() - 1, s);
  std::size_t index = static_cast<std::size_t>(std::distance(span_starts_.begin(), it));
  index = index == 0 ? 0 : std::min(index - 1, spans_.size() - 1);
  const Span& span = spans_[index];
  const double local = std::clamp(s - span_starts_[index], 0.0, span.length);

  auto bp = std::upper_bound(span.s.begin(), span.s.end(), local);
  std::size_t k = static_cast<std::size_t>(std::distance(span.s.begin(), bp));
  k = k == 0 ? 0 : std::min(k - 1, span.u.size() - 2);
  double lo = span.u[k], hi = span.u[k + 1];
  const double s_lo = span.s[k], s_hi = span.s[k + 1];
  double u = s_hi > s_lo ? lo + (hi - lo) * (local - s_lo) / (s_hi - s_lo) : lo;
  for (int iter = 0; iter < 50; ++iter) {
    const double f = s_lo + integrate(span, span.u[k], u) - local;
    if (std::abs(f) < 1e-13 * (1.0 + length_)) break;
    if (f > 0.0) hi = u; else lo = u;
    const double v = speed(span, u);
    double next = v > 0.0 ? u - f / v : (lo + hi) / 2.0;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2.0;
    u = next;
  }
  return {index, u};
}

Point SplineGeometry::point(double s) const {
  if (s >= length_) return points_.back();
  if (s <= 0.0) return points_.front();
  const auto [index, u] = locate(s);
  return eval(spans_[index], u);
}

Point SplineGeometry::tangent(double s) const {
  const auto [index, u] = locate(std::clamp(s, 0.0, length_));
  Point d = deriv(spans_[index], u);
  const double n = norm(d);
  if (n > 0.0)
    for (double& v : d) v /= n;
  return d;
}

}  // namespace mocsim::interp::detail
