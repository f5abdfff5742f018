#include <algorithm>
#include <cmath>
#include <limits>

#include "mocsim/error.hpp"
#include "mocsim/verify.hpp"

namespace mocsim::verify {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_rows(const TrajectoryLog& log, const char* which) {
  if (log.rows() == 0) throw Error(ErrorCode::EmptyLog, std::string(which) + " log has no rows");
}

double l1(const std::vector<double>& p, const std::vector<double>& q) {
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) sum += std::abs(p[k] - q[k]);
  return sum;
}

void check_series(const Series& a, const Series& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySeries, "DTW needs two non-empty series");
  const std::size_t dim = a.front().size();
  for (const auto* s : {&a, &b})
    for (const auto& p : *s)
      if (p.size() != dim)
        throw Error(ErrorCode::DimensionMismatch, "DTW points must all have " + std::to_string(dim) + " coordinates");
}

// 0 = diagonal, 1 = (i-1, j), 2 = (i, j-1).
int pick(double diag, double up, double left) {
  if (diag <= up && diag <= left) return 0;
  if (up <= left) return 1;
  return 2;
}

// Columns of the canonical axes, keeping only those that vary in either log
// or differ between them. Dropped columns add zero to every cell cost.
std::pair<Series, Series> aligned_series(const TrajectoryLog& canonical, const TrajectoryLog& candidate) {
  std::vector<std::pair<const std::vector<double>*, const std::vector<double>*>> cols;
  for (std::size_t c = 0; c < canonical.axes.size(); ++c) {
    const auto& x = canonical.positions[c];
    const auto& y = candidate.positions[static_cast<std::size_t>(candidate.axis_column(canonical.axes[c]))];
    const double v = x.front();
    const bool constant = std::all_of(x.begin(), x.end(), [v](double e) { return e == v; }) &&
                          std::all_of(y.begin(), y.end(), [v](double e) { return e == v; });
    if (!constant) cols.emplace_back(&x, &y);
  }
  Series a(canonical.rows()), b(candidate.rows());
  for (std::size_t r = 0; r < a.size(); ++r)
    for (const auto& col : cols) a[r].push_back((*col.first)[r]);
  for (std::size_t r = 0; r < b.size(); ++r)
    for (const auto& col : cols) b[r].push_back((*col.second)[r]);
  return {std::move(a), std::move(b)};
}

}  // namespace

std::string_view to_string(Method method) { return method == Method::EndPoints ? "EndPoints" : "DTW"; }

ComparisonReport match_endpoints(const TrajectoryLog& canonical, const TrajectoryLog& candidate, double tol) {
  require_rows(canonical, "canonical");
  require_rows(candidate, "candidate");
  ComparisonReport report;
  report.method = Method::EndPoints;
  report.passed = true;
  for (std::size_t c = 0; c < canonical.axes.size(); ++c) {
    AxisDelta d;
    d.axis = canonical.axes[c];
    const int other = candidate.axis_column(d.axis);
    if (other < 0) {
      d.delta = kInf;
      d.missing = true;
      report.notes.push_back("missing column ax" + std::to_string(d.axis) + "_pos");
    } else {
      d.delta = std::abs(canonical.positions[c].back() - candidate.positions[static_cast<std::size_t>(other)].back());
      d.within = d.delta <= tol;
    }
    if (!d.within) report.passed = false;
    report.deltas.push_back(d);
  }
  return report;
}

DtwResult dtw_distance(const Series& a, const Series& b) {
  check_series(a, b);
  const std::size_t n = a.size(), m = b.size();
  std::vector<double> d(n * m);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return d[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = l1(a[i], b[j]);
      if (i == 0 && j == 0) {
        at(i, j) = c;
        continue;
      }
      const double diag = i && j ? at(i - 1, j - 1) : kInf;
      const double up = i ? at(i - 1, j) : kInf;
      const double left = j ? at(i, j - 1) : kInf;
      at(i, j) = c + std::min({diag, up, left});
    }
  }
  DtwResult result;
  result.distance = at(n - 1, m - 1);
  std::size_t i = n - 1, j = m - 1;
  result.path.emplace_back(i, j);
  while (i || j) {
    const double diag = i && j ? at(i - 1, j - 1) : kInf;
    const double up = i ? at(i - 1, j) : kInf;
    const double left = j ? at(i, j - 1) : kInf;
    switch (pick(diag, up, left)) {
      case 0: --i, --j; break;
      case 1: --i; break;
      default: --j; break;
    }
    result.path.emplace_back(i, j);
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

std::pair<double, std::size_t> dtw_cost_and_length(const Series& a, const Series& b) {
  check_series(a, b);
  const std::size_t m = b.size();
  // Each cell's path length follows the same predecessor rule as the
  // backtrack in dtw_distance, so the lengths agree.
  std::vector<double> prev(m), cur(m);
  std::vector<std::size_t> prev_len(m), cur_len(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = l1(a[i], b[j]);
      if (i == 0 && j == 0) {
        cur[j] = c;
        cur_len[j] = 1;
        continue;
      }
      const double diag = i && j ? prev[j - 1] : kInf;
      const double up = i ? prev[j] : kInf;
      const double left = j ? cur[j - 1] : kInf;
      switch (pick(diag, up, left)) {
        case 0: cur[j] = c + diag, cur_len[j] = prev_len[j - 1] + 1; break;
        case 1: cur[j] = c + up, cur_len[j] = prev_len[j] + 1; break;
        default: cur[j] = c + left, cur_len[j] = cur_len[j - 1] + 1; break;
      }
    }
    std::swap(prev, cur);
    std::swap(prev_len, cur_len);
  }
  return {prev[m - 1], prev_len[m - 1]};
}

ComparisonReport dtw_pass(const TrajectoryLog& canonical, const TrajectoryLog& candidate, double tol) {
  ComparisonReport endpoints = match_endpoints(canonical, candidate, tol);
  ComparisonReport report = endpoints;
  report.method = Method::DTW;
  if (std::any_of(endpoints.deltas.begin(), endpoints.deltas.end(), [](const AxisDelta& d) { return d.missing; })) {
    report.passed = false;
    report.dtw_distance = kInf;
    return report;
  }
  auto [a, b] = aligned_series(canonical, candidate);
  double normalized = 0.0;
  if (!a.front().empty()) {
    const auto [cost, length] = dtw_cost_and_length(a, b);
    normalized = cost / static_cast<double>(length);
  }
  report.dtw_distance = normalized;
  report.passed = endpoints.passed && normalized <= tol;
  if (!endpoints.passed) report.notes.push_back("endpoints differ");
  if (normalized > tol) report.notes.push_back("normalized DTW distance above tolerance");
  return report;
}

double ftpr(std::size_t passed, std::size_t total) {
  if (total == 0) throw Error(ErrorCode::EmptyInput, "FTPR of an empty outcome set");
  if (passed > total) throw Error(ErrorCode::InvalidArgument, "more passes than outcomes");
  return std::round(static_cast<double>(passed) * 10000.0 / static_cast<double>(total)) / 100.0;
}

double ftpr(std::span<const EvalOutcome> outcomes, Method method) {
  const auto passed = std::count_if(outcomes.begin(), outcomes.end(),
                                    [method](const EvalOutcome& o) { return o.first_attempt_passed.get(method); });
  return ftpr(static_cast<std::size_t>(passed), outcomes.size());
}

double pass_after_correction(std::span<const EvalOutcome> outcomes, Method method) {
  const auto passed = std::count_if(outcomes.begin(), outcomes.end(),
                                    [method](const EvalOutcome& o) { return o.final_passed.get(method); });
  return ftpr(static_cast<std::size_t>(passed), outcomes.size());
}

}  // namespace mocsim::verify
