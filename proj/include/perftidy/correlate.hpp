#pragma once

// Lagged cross-correlation and all-pairs nomination of related metrics.
//
// Lag convention: r(k) is the Pearson correlation of the overlapping pairs
// (x_t, y_{t+k}). A positive best lag k therefore means y trails x by k grid
// steps. Means and deviations are computed over each lag's overlap, so every
// r(k) is a true Pearson coefficient bounded by 1.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "perftidy/timealign.hpp"
#include "perftidy/types.hpp"

namespace perftidy {

inline constexpr std::size_t kDefaultMinOverlap = 8;
inline constexpr int kDefaultMaxLag = 30;

struct CcfOptions {
  std::size_t min_overlap = kDefaultMinOverlap;
  /// Use only time points where both series are present instead of rejecting MISSING.
  bool pairwise_complete = false;
};

struct LagCorrelation {
  int lag = 0;
  double r = 0.0;
  std::size_t n = 0;  // overlap size

  friend bool operator==(const LagCorrelation&, const LagCorrelation&) = default;
};

namespace detail {

/// Below this relative spread a window is treated as constant.
inline constexpr double kRelativeSpreadFloor = 1e-12;

inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

/// A fully present series shifted by its global mean, with prefix sums of
/// values and squares so any window's moments are O(1).
struct PreparedSeries {
  std::vector<double> centered;
  std::vector<double> prefix;
  std::vector<double> prefix_sq;
  double scale = 0.0;  // max |x| before centering

  explicit PreparedSeries(std::span<const double> x) {
    const std::size_t n = x.size();
    double sum = 0.0;
    for (double v : x) {
      sum += v;
      scale = std::max(scale, std::abs(v));
    }
    const double mean = n ? sum / static_cast<double>(n) : 0.0;
    centered.resize(n);
    prefix.assign(n + 1, 0.0);
    prefix_sq.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      centered[i] = x[i] - mean;
      prefix[i + 1] = prefix[i] + centered[i];
      prefix_sq[i + 1] = prefix_sq[i] + centered[i] * centered[i];
    }
  }

  std::size_t size() const { return centered.size(); }
  double sum(std::size_t b, std::size_t e) const { return prefix[e] - prefix[b]; }
  double sum_sq(std::size_t b, std::size_t e) const { return prefix_sq[e] - prefix_sq[b]; }
};

inline bool is_flat(double ss_dev, std::size_t m, double scale) {
  const double floor = kRelativeSpreadFloor * scale;
  return !(ss_dev > static_cast<double>(m) * floor * floor) || ss_dev <= 0.0;
}

inline LagCorrelation fast_lag(const PreparedSeries& x, const PreparedSeries& y, int lag) {
  const std::size_t n = x.size();
  const std::size_t k = static_cast<std::size_t>(lag < 0 ? -lag : lag);
  const std::size_t m = n - k;
  const std::size_t xs = lag >= 0 ? 0 : k;
  const std::size_t ys = lag >= 0 ? k : 0;
  const double md = static_cast<double>(m);
  const double sx = x.sum(xs, xs + m), sy = y.sum(ys, ys + m);
  const double vx = x.sum_sq(xs, xs + m) - sx * sx / md;
  const double vy = y.sum_sq(ys, ys + m) - sy * sy / md;
  if (is_flat(vx, m, x.scale) || is_flat(vy, m, y.scale))
    throw Error(ErrorCode::ZeroVariance, "constant overlap window at lag " + std::to_string(lag));
  const double cov = dot(x.centered.data() + xs, y.centered.data() + ys, m) - sx * sy / md;
  return {lag, cov / std::sqrt(vx * vy), m};
}

/// Pearson on the pairs (x_t, y_{t+lag}) where both cells are present.
inline LagCorrelation pairwise_lag(const Series& x, const Series& y, int lag, std::size_t min_overlap) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  std::vector<double> a, b;
  double scale_a = 0.0, scale_b = 0.0;
  for (std::int64_t t = std::max<std::int64_t>(0, -lag); t < std::min<std::int64_t>(n, n - lag); ++t) {
    const auto& xv = x[static_cast<std::size_t>(t)];
    const auto& yv = y[static_cast<std::size_t>(t + lag)];
    if (!xv || !yv) continue;
    a.push_back(*xv);
    b.push_back(*yv);
    scale_a = std::max(scale_a, std::abs(*xv));
    scale_b = std::max(scale_b, std::abs(*yv));
  }
  const std::size_t m = a.size();
  if (m < min_overlap || m < 2)
    throw Error(ErrorCode::InsufficientOverlap,
                std::to_string(m) + " complete pairs at lag " + std::to_string(lag) + ", need " + std::to_string(min_overlap));
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(m);
  mb /= static_cast<double>(m);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (is_flat(saa, m, scale_a) || is_flat(sbb, m, scale_b))
    throw Error(ErrorCode::ZeroVariance, "constant overlap window at lag " + std::to_string(lag));
  return {lag, sab / std::sqrt(saa * sbb), m};
}

inline bool has_missing(const Series& s) {
  return std::any_of(s.begin(), s.end(), [](const auto& c) { return !c.has_value(); });
}

inline std::vector<double> dense(const Series& s) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = *s[i];
  return out;
}

inline void check_window(std::size_t n, int max_lag, std::size_t min_overlap) {
  if (max_lag < 0) throw Error(ErrorCode::BadArgument, "max_lag must be non-negative");
  if (2 * static_cast<std::size_t>(max_lag) >= n)
    throw Error(ErrorCode::BadArgument, "max_lag " + std::to_string(max_lag) + " must be < n/2 (n=" + std::to_string(n) + ")");
  if (n - static_cast<std::size_t>(max_lag) < min_overlap)
    throw Error(ErrorCode::InsufficientOverlap, "overlap " + std::to_string(n - static_cast<std::size_t>(max_lag)) +
                                                    " at the widest lag is below " + std::to_string(min_overlap));
}

inline std::vector<LagCorrelation> ccf_prepared(const PreparedSeries& x, const PreparedSeries& y, int max_lag) {
  std::vector<LagCorrelation> out;
  out.reserve(2 * static_cast<std::size_t>(max_lag) + 1);
  for (int k = -max_lag; k <= max_lag; ++k) out.push_back(fast_lag(x, y, k));
  return out;
}

inline std::vector<LagCorrelation> ccf_pairwise(const Series& x, const Series& y, int max_lag, std::size_t min_overlap) {
  std::vector<LagCorrelation> out;
  for (int k = -max_lag; k <= max_lag; ++k) out.push_back(pairwise_lag(x, y, k, min_overlap));
  return out;
}

/// |r| descending; ties to the smaller |lag|, then to the negative lag.
inline bool better_lag(const LagCorrelation& a, const LagCorrelation& b) {
  const double ra = std::abs(a.r), rb = std::abs(b.r);
  if (ra != rb) return ra > rb;
  const int la = a.lag < 0 ? -a.lag : a.lag, lb = b.lag < 0 ? -b.lag : b.lag;
  if (la != lb) return la < lb;
  return a.lag < b.lag;
}

inline LagCorrelation pick_best(const std::vector<LagCorrelation>& curve) {
  LagCorrelation best = curve.front();
  for (const auto& c : curve)
    if (better_lag(c, best)) best = c;
  return best;
}

}  // namespace detail

/// r(k) for k in [-max_lag, max_lag]. Requires equal lengths and max_lag < n/2.
inline std::vector<LagCorrelation> ccf(const Series& x, const Series& y, int max_lag, const CcfOptions& opts = {}) {
  if (x.size() != y.size()) throw Error(ErrorCode::BadArgument, "series lengths differ");
  detail::check_window(x.size(), max_lag, opts.min_overlap);
  if (detail::has_missing(x) || detail::has_missing(y)) {
    if (!opts.pairwise_complete)
      throw Error(ErrorCode::BadArgument, "MISSING cells present; impute first or use pairwise-complete mode");
    return detail::ccf_pairwise(x, y, max_lag, opts.min_overlap);
  }
  const detail::PreparedSeries px(detail::dense(x)), py(detail::dense(y));
  return detail::ccf_prepared(px, py, max_lag);
}

inline std::vector<LagCorrelation> ccf(std::span<const double> x, std::span<const double> y, int max_lag,
                                       const CcfOptions& opts = {}) {
  if (x.size() != y.size()) throw Error(ErrorCode::BadArgument, "series lengths differ");
  detail::check_window(x.size(), max_lag, opts.min_overlap);
  return detail::ccf_prepared(detail::PreparedSeries(x), detail::PreparedSeries(y), max_lag);
}

inline LagCorrelation best_lag(const Series& x, const Series& y, int max_lag, const CcfOptions& opts = {}) {
  return detail::pick_best(ccf(x, y, max_lag, opts));
}

inline LagCorrelation best_lag(std::span<const double> x, std::span<const double> y, int max_lag,
                               const CcfOptions& opts = {}) {
  return detail::pick_best(ccf(x, y, max_lag, opts));
}

struct CorrelationResult {
  std::string metric_a;
  std::string metric_b;
  int best_lag = 0;
  double r_at_best = 0.0;
  std::size_t n_effective = 0;
  std::vector<LagCorrelation> ccf;  // filled when curves are requested
};

struct NominateParams {
  int max_lag = kDefaultMaxLag;
  std::size_t top_k = 20;
  double min_abs_r = 0.5;
  std::size_t min_overlap = kDefaultMinOverlap;
  bool pairwise_complete = false;
  bool keep_curves = false;
  /// 0 = std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct Nomination {
  std::vector<CorrelationResult> ranked;
  std::vector<std::string> skipped;  // "a;b;reason", in pair order
  std::size_t pairs_scored = 0;
};

/// Scores every unordered column pair by best lag, keeps |r| >= min_abs_r,
/// ranks by |r| descending (ties by pair id) and truncates to top_k.
inline Nomination nominate(const TidyTable& table, const NominateParams& params) {
  const std::size_t m = table.n_columns();
  if (m < 2) throw Error(ErrorCode::BadArgument, "nominate needs at least 2 columns");
  const std::size_t n = table.n_rows();
  detail::check_window(n, params.max_lag, params.min_overlap);

  std::vector<std::optional<detail::PreparedSeries>> prepared(m);
  std::vector<std::string> ids(m);
  for (std::size_t c = 0; c < m; ++c) {
    ids[c] = table.columns()[c].id();
    if (!detail::has_missing(table.column(c))) prepared[c].emplace(detail::dense(table.column(c)));
  }

  struct Scored {
    std::optional<LagCorrelation> best;
    std::string error;
  };
  // Row i holds pairs (i, j) for j > i.
  std::vector<std::vector<Scored>> rows(m);
  std::atomic<std::size_t> next_row{0};
  auto worker = [&] {
    for (std::size_t i = next_row.fetch_add(1); i < m; i = next_row.fetch_add(1)) {
      auto& row = rows[i];
      row.resize(m - i - 1);
      for (std::size_t j = i + 1; j < m; ++j) {
        auto& out = row[j - i - 1];
        try {
          if (prepared[i] && prepared[j]) {
            out.best = detail::pick_best(detail::ccf_prepared(*prepared[i], *prepared[j], params.max_lag));
          } else if (params.pairwise_complete) {
            out.best = detail::pick_best(
                detail::ccf_pairwise(table.column(i), table.column(j), params.max_lag, params.min_overlap));
          } else {
            out.error = "MISSING cells present; impute first or use pairwise-complete mode";
          }
        } catch (const Error& e) {
          out.error = e.what();
        }
      }
    }
  };
  unsigned threads = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, m));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  Nomination out;
  std::vector<std::tuple<std::size_t, std::size_t, LagCorrelation>> kept;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& s = rows[i][j - i - 1];
      if (!s.best) {
        out.skipped.push_back(ids[i] + ";" + ids[j] + ";" + s.error);
        continue;
      }
      ++out.pairs_scored;
      if (std::abs(s.best->r) >= params.min_abs_r) kept.emplace_back(i, j, *s.best);
    }
  std::sort(kept.begin(), kept.end(), [&](const auto& a, const auto& b) {
    const double ra = std::abs(std::get<2>(a).r), rb = std::abs(std::get<2>(b).r);
    if (ra != rb) return ra > rb;
    return std::tie(ids[std::get<0>(a)], ids[std::get<1>(a)]) < std::tie(ids[std::get<0>(b)], ids[std::get<1>(b)]);
  });
  if (kept.size() > params.top_k) kept.resize(params.top_k);
  for (const auto& [i, j, best] : kept) {
    CorrelationResult res{ids[i], ids[j], best.lag, best.r, best.n, {}};
    if (params.keep_curves)
      res.ccf = prepared[i] && prepared[j]
                    ? detail::ccf_prepared(*prepared[i], *prepared[j], params.max_lag)
                    : detail::ccf_pairwise(table.column(i), table.column(j), params.max_lag, params.min_overlap);
    out.ranked.push_back(std::move(res));
  }
  return out;
}

}  // namespace perftidy
