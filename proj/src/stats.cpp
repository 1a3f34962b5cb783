#include "segprof/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "segprof/csv.hpp"
#include "segprof/errors.hpp"
#include "segprof/tdist.hpp"

namespace segprof {

std::string_view to_string(ConstantGroup g) {
  switch (g) {
    case ConstantGroup::none: return "none";
    case ConstantGroup::cluster: return "cluster";
    case ConstantGroup::rest: return "rest";
    case ConstantGroup::both: return "both";
  }
  return "?";
}

namespace {

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x, double mean) {
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

}  // namespace

ConstantGroup constant_group(std::span<const double> a, std::span<const double> b) {
  const bool ca = is_constant(a);
  const bool cb = is_constant(b);
  if (ca && cb) return ConstantGroup::both;
  if (ca) return ConstantGroup::cluster;
  if (cb) return ConstantGroup::rest;
  return ConstantGroup::none;
}

std::optional<WelchStat> welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t: each sample needs at least 2 values");
  if (constant_group(a, b) != ConstantGroup::none) return std::nullopt;

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double ra = variance_of(a, ma) / na;
  const double rb = variance_of(b, mb) / nb;

  WelchStat s;
  s.t = (ma - mb) / std::sqrt(ra + rb);
  s.df = (ra + rb) * (ra + rb) / (ra * ra / (na - 1.0) + rb * rb / (nb - 1.0));
  s.p = student_t_two_sided_p(s.t, s.df);
  return s;
}

BhResult bh_adjust(std::span<const double> p, double alpha) {
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("bh_adjust: p-value outside [0, 1]");

  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });

  BhResult out;
  out.adjusted.assign(m, 1.0);
  out.significant.assign(m, false);
  double running = 1.0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    const std::size_t i = order[rank - 1];
    const double scaled = p[i] * (static_cast<double>(m) / static_cast<double>(rank));
    running = std::min(running, scaled);
    out.adjusted[i] = std::min(running, 1.0);
  }
  for (std::size_t i = 0; i < m; ++i) out.significant[i] = out.adjusted[i] < alpha;
  return out;
}

void StatsConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

namespace {

struct Groups {
  std::vector<int> labels;                       // distinct cluster labels, ascending
  std::vector<std::vector<std::size_t>> inside;  // per label
  std::vector<std::vector<std::size_t>> rest;    // per label
};

Groups make_groups(const FeatureMatrix& fm, const ClusterAssignment& asg) {
  if (asg.labels.size() != fm.rows())
    throw ProfilingError("assignment has " + std::to_string(asg.labels.size()) + " labels for " +
                         std::to_string(fm.rows()) + " rows");
  Groups g;
  g.labels = asg.labels;
  std::sort(g.labels.begin(), g.labels.end());
  g.labels.erase(std::unique(g.labels.begin(), g.labels.end()), g.labels.end());
  for (int label : g.labels) {
    std::vector<std::size_t> in, out;
    for (std::size_t r = 0; r < asg.labels.size(); ++r) (asg.labels[r] == label ? in : out).push_back(r);
    if (in.size() < 2) throw ProfilingError("cluster " + std::to_string(label) + " has fewer than 2 members");
    if (out.size() < 2)
      throw ProfilingError("cluster " + std::to_string(label) + ": the rest of the data has fewer than 2 members");
    g.inside.push_back(std::move(in));
    g.rest.push_back(std::move(out));
  }
  return g;
}

FeatureTestResult test_feature(const FeatureMatrix& fm, std::size_t feature, int label,
                               const std::vector<std::size_t>& inside, const std::vector<std::size_t>& rest) {
  std::vector<double> a(inside.size()), b(rest.size());
  for (std::size_t i = 0; i < inside.size(); ++i) a[i] = fm.values(inside[i], feature);
  for (std::size_t i = 0; i < rest.size(); ++i) b[i] = fm.values(rest[i], feature);

  FeatureTestResult r;
  r.feature = feature;
  r.feature_name = feature < fm.columns.size() ? fm.columns[feature].name() : std::to_string(feature);
  r.cluster = label;
  const auto& s = fm.standardization.at(feature);
  auto original = [&](double z) { return s.constant ? s.mean : s.mean + s.sd * z; };
  r.cluster_mean = original(mean_of(a));
  r.rest_mean = original(mean_of(b));
  r.constant = constant_group(a, b);

  if (auto w = welch_t(a, b)) {
    r.t = w->t;
    r.df = w->df;
    r.p_raw = w->p;
    r.p_adj = w->p;
  } else {
    r.zero_variance = true;
    r.t = r.df = r.p_raw = r.p_adj = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

// Corrects one cluster's block of results in place.
void correct_block(std::span<FeatureTestResult> block, const StatsConfig& cfg) {
  std::vector<double> p;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (block[i].zero_variance) continue;
    p.push_back(block[i].p_raw);
    where.push_back(i);
  }
  if (cfg.correction == Correction::benjamini_hochberg) {
    const auto bh = bh_adjust(p, cfg.alpha);
    for (std::size_t j = 0; j < where.size(); ++j) {
      block[where[j]].p_adj = bh.adjusted[j];
      block[where[j]].significant = bh.significant[j];
    }
  } else {
    for (auto i : where) {
      block[i].p_adj = block[i].p_raw;
      block[i].significant = block[i].p_raw < cfg.alpha;
    }
  }
}

}  // namespace

std::vector<FeatureTestResult> profile_clusters(const FeatureMatrix& fm, const ClusterAssignment& asg,
                                                const StatsConfig& cfg) {
  cfg.validate();
  const Groups g = make_groups(fm, asg);
  const std::size_t m = fm.cols();
  const std::size_t total = g.labels.size() * m;
  std::vector<FeatureTestResult> results(total);

#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::size_t c = idx / m;
    const std::size_t f = idx % m;
    results[idx] = test_feature(fm, f, g.labels[c], g.inside[c], g.rest[c]);
  }

  for (std::size_t c = 0; c < g.labels.size(); ++c)
    correct_block(std::span(results).subspan(c * m, m), cfg);
  return results;
}

namespace serial {

std::vector<FeatureTestResult> profile_clusters(const FeatureMatrix& fm, const ClusterAssignment& asg,
                                                const StatsConfig& cfg) {
  cfg.validate();
  const Groups g = make_groups(fm, asg);
  std::vector<FeatureTestResult> results;
  for (std::size_t c = 0; c < g.labels.size(); ++c) {
    std::vector<FeatureTestResult> block;
    for (std::size_t f = 0; f < fm.cols(); ++f) block.push_back(test_feature(fm, f, g.labels[c], g.inside[c], g.rest[c]));
    correct_block(block, cfg);
    results.insert(results.end(), block.begin(), block.end());
  }
  return results;
}

}  // namespace serial

void write_test_results(std::ostream& out, std::span<const FeatureTestResult> results) {
  csv::write_row(out, {"cluster", "feature", "t", "df", "p_raw", "p_adj", "significant", "zero_variance",
                       "constant_group", "cluster_mean", "rest_mean"});
  for (const auto& r : results) {
    csv::write_row(out, {std::to_string(r.cluster), r.feature_name, csv::format_double(r.t), csv::format_double(r.df),
                         csv::format_double(r.p_raw), csv::format_double(r.p_adj), r.significant ? "1" : "0",
                         r.zero_variance ? "1" : "0", std::string(to_string(r.constant)),
                         csv::format_double(r.cluster_mean), csv::format_double(r.rest_mean)});
  }
}

void write_zero_variance(std::ostream& out, std::span<const FeatureTestResult> results) {
  csv::write_row(out, {"cluster", "feature", "constant_group", "cluster_response_pct", "rest_response_pct"});
  for (const auto& r : results) {
    if (!r.zero_variance) continue;
    csv::write_row(out, {std::to_string(r.cluster), r.feature_name, std::string(to_string(r.constant)),
                         csv::format_fixed(100.0 * r.cluster_mean, 2), csv::format_fixed(100.0 * r.rest_mean, 2)});
  }
}

}  // namespace segprof
