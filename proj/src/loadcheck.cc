#include "faastrace/loadcheck.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace faastrace {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cell {
  double cost = kInf;
  std::size_t len = 0;
};

bool better(const Cell& x, const Cell& y) {
  return x.cost < y.cost || (x.cost == y.cost && x.len < y.len);
}

/// Best of (diagonal, up, left); ties keep the earlier argument.
inline Cell step(double local, const Cell& diag, const Cell& up, const Cell& left) {
  const Cell* best = &diag;
  if (better(up, *best)) best = &up;
  if (better(left, *best)) best = &left;
  return {local + best->cost, best->len + 1};
}

void require_nonempty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("DTW of an empty series");
}

}  // namespace

DtwResult dtw_exact(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, b);
  const std::size_t m = b.size();
  std::vector<Cell> prev(m), cur(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double local = std::abs(a[i] - b[j]);
      if (i == 0 && j == 0) {
        cur[j] = {local, 1};
        continue;
      }
      const Cell none{};
      const Cell& diag = (i > 0 && j > 0) ? prev[j - 1] : none;
      const Cell& up = i > 0 ? prev[j] : none;
      const Cell& left = j > 0 ? cur[j - 1] : none;
      cur[j] = step(local, diag, up, left);
    }
    std::swap(prev, cur);
  }
  return {prev[m - 1].cost, prev[m - 1].len};
}

DtwResult dtw_exact_parallel(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, b);
  const auto n = static_cast<std::ptrdiff_t>(a.size());
  const auto m = static_cast<std::ptrdiff_t>(b.size());
  // Three rolling anti-diagonals indexed by row.
  std::vector<Cell> d2(a.size()), d1(a.size()), d0(a.size());
  for (std::ptrdiff_t d = 0; d <= n + m - 2; ++d) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, d - m + 1);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, d);
#pragma omp parallel for schedule(static) if (hi - lo > 512)
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      const std::ptrdiff_t j = d - i;
      const double local = std::abs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)]);
      if (d == 0) {
        d0[0] = {local, 1};
        continue;
      }
      const Cell none{};
      const auto ui = static_cast<std::size_t>(i);
      const Cell& diag = (i > 0 && j > 0) ? d2[ui - 1] : none;
      const Cell& up = i > 0 ? d1[ui - 1] : none;
      const Cell& left = j > 0 ? d1[ui] : none;
      d0[ui] = step(local, diag, up, left);
    }
    std::swap(d2, d1);
    std::swap(d1, d0);
  }
  const Cell& end = d1[a.size() - 1];
  return {end.cost, end.len};
}

DtwResult dtw_windowed(std::span<const double> a, std::span<const double> b, const Window& w,
                       WarpPath* path) {
  require_nonempty(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (w.lo.size() != n || w.hi.size() != n) throw std::invalid_argument("window does not match series");

  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (w.lo[i] > w.hi[i] || w.hi[i] >= m) throw std::invalid_argument("malformed window row");
    offset[i + 1] = offset[i] + (w.hi[i] - w.lo[i] + 1);
  }
  std::vector<Cell> cells(offset[n]);
  const Cell none{};
  auto at = [&](std::size_t i, std::size_t j) -> const Cell& {
    if (j < w.lo[i] || j > w.hi[i]) return none;
    return cells[offset[i] + (j - w.lo[i])];
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = w.lo[i]; j <= w.hi[i]; ++j) {
      const double local = std::abs(a[i] - b[j]);
      Cell& c = cells[offset[i] + (j - w.lo[i])];
      if (i == 0 && j == 0) {
        c = {local, 1};
        continue;
      }
      const Cell& diag = (i > 0 && j > 0) ? at(i - 1, j - 1) : none;
      const Cell& up = i > 0 ? at(i - 1, j) : none;
      const Cell& left = j > 0 ? at(i, j - 1) : none;
      c = step(local, diag, up, left);
    }
  }
  const Cell& end = at(n - 1, m - 1);
  if (!std::isfinite(end.cost)) throw std::logic_error("window does not connect the corners");

  if (path) {
    path->clear();
    std::size_t i = n - 1, j = m - 1;
    path->emplace_back(i, j);
    while (i > 0 || j > 0) {
      const Cell& diag = (i > 0 && j > 0) ? at(i - 1, j - 1) : none;
      const Cell& up = i > 0 ? at(i - 1, j) : none;
      const Cell& left = j > 0 ? at(i, j - 1) : none;
      const Cell* best = &diag;
      if (better(up, *best)) best = &up;
      if (better(left, *best)) best = &left;
      if (best == &diag) {
        --i;
        --j;
      } else if (best == &up) {
        --i;
      } else {
        --j;
      }
      path->emplace_back(i, j);
    }
    std::reverse(path->begin(), path->end());
  }
  return {end.cost, end.len};
}

namespace {

std::vector<double> halve(std::span<const double> x) {
  std::vector<double> out(x.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x[2 * i] + x[2 * i + 1]) / 2.0;
  return out;
}

Window full_window(std::size_t n, std::size_t m) {
  return {std::vector<std::size_t>(n, 0), std::vector<std::size_t>(n, m - 1)};
}

/// Projects a coarse path onto the grid of twice the resolution, widened by
/// `radius` coarse cells in every direction.
Window project(const WarpPath& coarse, std::size_t n, std::size_t m, std::size_t radius) {
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  Window w{std::vector<std::size_t>(n, kUnset), std::vector<std::size_t>(n, 0)};
  const auto r = static_cast<std::ptrdiff_t>(radius);
  for (const auto& [ci, cj] : coarse) {
    const auto i = static_cast<std::ptrdiff_t>(ci);
    const auto j = static_cast<std::ptrdiff_t>(cj);
    const std::ptrdiff_t col_lo = std::max<std::ptrdiff_t>(0, 2 * (j - r));
    const std::ptrdiff_t col_hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(m) - 1, 2 * (j + r) + 1);
    const std::ptrdiff_t row_lo = std::max<std::ptrdiff_t>(0, 2 * (i - r));
    const std::ptrdiff_t row_hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, 2 * (i + r) + 1);
    if (col_lo > col_hi) continue;
    for (std::ptrdiff_t row = row_lo; row <= row_hi; ++row) {
      const auto ur = static_cast<std::size_t>(row);
      w.lo[ur] = std::min(w.lo[ur], static_cast<std::size_t>(col_lo));
      w.hi[ur] = std::max(w.hi[ur], static_cast<std::size_t>(col_hi));
    }
  }
  // Rows beyond the coarse grid (odd lengths) inherit their neighbour; then
  // make consecutive rows overlap so the corners stay connected.
  w.lo[0] = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (w.lo[i] == kUnset) {
      w.lo[i] = w.lo[i - 1];
      w.hi[i] = w.hi[i - 1];
    }
    w.hi[i] = std::max(w.hi[i], w.hi[i - 1]);
    w.lo[i] = std::min(w.lo[i], w.hi[i - 1]);
  }
  w.hi[n - 1] = m - 1;
  return w;
}

}  // namespace

DtwResult fastdtw(std::span<const double> a, std::span<const double> b, std::size_t radius,
                  WarpPath* path) {
  require_nonempty(a, b);
  const std::size_t base = std::max<std::size_t>(radius + 2, 10);
  if (a.size() <= base || b.size() <= base) {
    return dtw_windowed(a, b, full_window(a.size(), b.size()), path);
  }
  const auto ca = halve(a);
  const auto cb = halve(b);
  WarpPath coarse;
  fastdtw(ca, cb, radius, &coarse);
  return dtw_windowed(a, b, project(coarse, a.size(), b.size(), radius), path);
}

LoadVerdict compare_load(const SecondSeries& reference, const SecondSeries& candidate,
                         const LoadThresholds& thresholds, std::string reference_role,
                         std::string candidate_role) {
  if (reference.rates.empty()) throw std::invalid_argument(reference_role + " series is empty");
  if (candidate.rates.empty()) throw std::invalid_argument(candidate_role + " series is empty");

  const std::vector<double> a(reference.rates.begin(), reference.rates.end());
  const std::vector<double> b(candidate.rates.begin(), candidate.rates.end());
  const auto dtw = fastdtw(a, b, thresholds.radius);

  LoadVerdict v;
  v.reference = std::move(reference_role);
  v.candidate = std::move(candidate_role);
  v.dtw_distance = dtw.distance;
  v.path_length = dtw.path_length;
  v.normalized_distance = dtw.distance / static_cast<double>(dtw.path_length);
  const auto ref_total = static_cast<double>(reference.total());
  const auto cand_total = static_cast<double>(candidate.total());
  if (ref_total == 0.0) {
    v.total_deviation = cand_total == 0.0 ? 0.0 : kInf;
  } else {
    v.total_deviation = std::abs(ref_total - cand_total) / ref_total;
  }
  v.thresholds = thresholds;
  v.pass = v.total_deviation < thresholds.deviation &&
           v.normalized_distance < thresholds.normalized_distance;
  return v;
}

LoadValidation validate_load(const SecondSeries& planned, const SecondSeries& sent,
                             const SecondSeries& executed, const LoadThresholds& thresholds) {
  if (planned.rates.empty()) throw std::invalid_argument("planned series is empty");
  if (sent.rates.empty()) throw std::invalid_argument("sent series is empty");
  if (executed.rates.empty()) throw std::invalid_argument("executed series is empty");
  return {compare_load(planned, sent, thresholds, "planned", "sent"),
          compare_load(sent, executed, thresholds, "sent", "executed")};
}

std::string load_verdicts_json(const LoadValidation& v) {
  using ojson = nlohmann::ordered_json;
  auto one = [](const LoadVerdict& x) {
    ojson o;
    o["reference"] = x.reference;
    o["candidate"] = x.candidate;
    o["dtw_distance"] = x.dtw_distance;
    o["path_length"] = x.path_length;
    o["normalized_distance"] = x.normalized_distance;
    o["total_deviation"] = std::isfinite(x.total_deviation) ? ojson(x.total_deviation) : ojson("inf");
    o["pass"] = x.pass;
    o["thresholds"] = {{"deviation", x.thresholds.deviation},
                       {"normalized_distance", x.thresholds.normalized_distance},
                       {"radius", x.thresholds.radius}};
    return o;
  };
  ojson doc;
  doc["plan_vs_sent"] = one(v.plan_vs_sent);
  doc["sent_vs_executed"] = one(v.sent_vs_executed);
  return doc.dump(2) + "\n";
}

}  // namespace faastrace
