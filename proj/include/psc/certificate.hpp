// Grid certification with a deterministic parallel min-reduction.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace psc {

struct GridAxis {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  int count = 1;

  double at(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / double(count - 1); }
};

struct PositivityCertificate {
  std::vector<GridAxis> grid;
  double min_R = std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
  double floor = 1e-6;
  double margin = 0.0;
  bool passed = false;
  int64_t points = 0;

  nlohmann::json to_json() const {
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& a : grid)
      axes.push_back({{"name", a.name}, {"lo", a.lo}, {"hi", a.hi}, {"count", a.count}});
    return {{"grid", axes}, {"min_R", std::isfinite(min_R) ? nlohmann::json(min_R) : nlohmann::json(nullptr)},
            {"argmin", argmin}, {"floor", floor}, {"margin", std::isfinite(margin) ? nlohmann::json(margin) : nlohmann::json(nullptr)},
            {"passed", passed}, {"points", points}};
  }
};

// Worker count used by every grid sweep; 0 means hardware concurrency.
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};
  return n;
}
inline void set_threads(int n) { thread_setting() = n; }
inline int worker_count() {
  int n = thread_setting().load();
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

// Minimum of f over [0, total) by value, ties to the lower index; NaN counts as -inf.
template <class F>
std::pair<double, int64_t> parallel_argmin(int64_t total, const F& f) {
  auto key = [](double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; };
  int workers = static_cast<int>(std::min<int64_t>(worker_count(), std::max<int64_t>(1, total)));
  std::vector<std::pair<double, int64_t>> best(workers, {std::numeric_limits<double>::infinity(), total});
  auto run = [&](int w) {
    int64_t lo = total * w / workers, hi = total * (w + 1) / workers;
    auto& b = best[w];
    for (int64_t i = lo; i < hi; ++i) {
      double v = key(f(i));
      if (v < b.first) b = {v, i};
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  auto out = best[0];
  for (int w = 1; w < workers; ++w)
    if (best[w].first < out.first || (best[w].first == out.first && best[w].second < out.second)) out = best[w];
  return out;
}

// Evaluates f on the tensor grid; the first axis varies slowest.
template <class F>
PositivityCertificate certify_grid(const std::vector<GridAxis>& axes, const F& f, double floor = 1e-6) {
  PositivityCertificate c;
  c.grid = axes;
  c.floor = floor;
  int64_t total = 1;
  for (const auto& a : axes) total *= a.count;
  c.points = total;
  auto point = [&](int64_t idx) {
    std::vector<double> p(axes.size());
    for (int d = static_cast<int>(axes.size()) - 1; d >= 0; --d) {
      p[d] = axes[d].at(static_cast<int>(idx % axes[d].count));
      idx /= axes[d].count;
    }
    return p;
  };
  auto [v, i] = parallel_argmin(total, [&](int64_t idx) { return f(point(idx)); });
  c.min_R = v;
  if (i < total) c.argmin = point(i);
  c.margin = v - floor;
  c.passed = v >= floor;
  return c;
}

// Combines certificates over disjoint grids: the smaller minimum wins, ties to the first.
inline PositivityCertificate merge(const std::vector<PositivityCertificate>& parts) {
  PositivityCertificate out;
  if (parts.empty()) return out;
  out = parts.front();
  for (size_t k = 1; k < parts.size(); ++k) {
    out.points += parts[k].points;
    out.grid.insert(out.grid.end(), parts[k].grid.begin(), parts[k].grid.end());
    if (parts[k].min_R < out.min_R) {
      out.min_R = parts[k].min_R;
      out.argmin = parts[k].argmin;
    }
  }
  out.margin = out.min_R - out.floor;
  out.passed = out.min_R >= out.floor;
  return out;
}

}  // namespace psc
