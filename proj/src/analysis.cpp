#include "hjtorus/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hjtorus/error.hpp"

namespace hjt {

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

double lp_error(const GridFunction& a, const GridFunction& b, double p) {
  if (!(a.grid() == b.grid())) throw ParameterError("lp_error: grid mismatch");
  if (!(p >= 1.0)) throw ParameterError("lp_error: p must be >= 1");
  const std::size_t n = a.size();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
  }
  const double weight = std::pow(a.grid().spacing(), a.grid().dim());
  std::vector<double> terms(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double e = std::abs(a[k] - b[k]);
    terms[k] = (p == 1.0 ? e : p == 2.0 ? e * e : std::pow(e, p)) * weight;
  }
  const double s = pairwise_sum(terms);
  if (p == 1.0) return s;
  if (p == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / p);
}

RateFit rate_fit(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw FitError("rate_fit: need at least 3 levels, got " + std::to_string(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [eps, err] = pairs[i];
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("rate_fit: eps must be positive");
    if (!(err >= 0.0) || !std::isfinite(err)) throw ParameterError("rate_fit: errors must be finite and >= 0");
    if (i > 0 && !(eps < pairs[i - 1].first)) throw ParameterError("rate_fit: eps must be strictly decreasing");
  }
  RateFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].second == 0.0) {
      fit.dropped.push_back(i);
      continue;
    }
    xs.push_back(std::log(pairs[i].first));
    ys.push_back(std::log(pairs[i].second));
  }
  if (xs.size() < 3) throw FitError("rate_fit: fewer than 3 nonzero errors");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

double semiconcavity_estimate(const GridFunction& v) {
  const auto& g = v.grid();
  const int d = g.dim();
  const double h = g.spacing();
  double best = -std::numeric_limits<double>::infinity();
  auto second = [&](std::size_t k, std::size_t plus, std::size_t minus, double k2) {
    best = std::max(best, (v[plus] + v[minus] - 2.0 * v[k]) / k2);
  };
  for (std::size_t k = 0; k < v.size(); ++k) {
    for (int i = 0; i < d; ++i) {
      second(k, g.shifted(k, i, 1), g.shifted(k, i, -1), h * h);
      second(k, g.shifted(k, i, 2), g.shifted(k, i, -2), 4.0 * h * h);
      for (int j = i + 1; j < d; ++j) {
        const std::size_t pi = g.shifted(k, i, 1);
        const std::size_t mi = g.shifted(k, i, -1);
        second(k, g.shifted(pi, j, 1), g.shifted(mi, j, -1), 2.0 * h * h);
        second(k, g.shifted(pi, j, -1), g.shifted(mi, j, 1), 2.0 * h * h);
      }
    }
  }
  return best;
}

double lipschitz_estimate(const GridFunction& v) {
  const auto& g = v.grid();
  const double inv_h = static_cast<double>(g.nodes_per_axis());
  double m = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    for (int a = 0; a < g.dim(); ++a) m = std::max(m, std::abs(v[g.shifted(k, a, 1)] - v[k]) * inv_h);
  }
  return m;
}

double hessian_tv_estimate(const GridFunction& v) {
  const auto& g = v.grid();
  const int d = g.dim();
  const double h = g.spacing();
  std::vector<double> terms(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    double fro2 = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const std::size_t ki = g.shifted(k, i, 1);
        const std::size_t kj = g.shifted(k, j, 1);
        const std::size_t kij = g.shifted(ki, j, 1);
        const double m = (v[kij] - v[ki] - v[kj] + v[k]) / (h * h);
        fro2 += m * m;
      }
    }
    terms[k] = std::sqrt(fro2);
  }
  return std::pow(h, d) * pairwise_sum(terms);
}

std::vector<double> fd_gap_l1(const GridFunction& v) {
  const auto& g = v.grid();
  const double h = g.spacing();
  std::vector<double> out(static_cast<std::size_t>(g.dim()));
  std::vector<double> terms(v.size());
  for (int a = 0; a < g.dim(); ++a) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double fwd = (v[g.shifted(k, a, 1)] - v[k]) / h;
      const double central = (v[g.shifted(k, a, 1)] - v[g.shifted(k, a, -1)]) / (2.0 * h);
      terms[k] = std::abs(fwd - central);
    }
    out[static_cast<std::size_t>(a)] = std::pow(h, g.dim()) * pairwise_sum(terms);
  }
  return out;
}

bool interpolation_check(double l1, double linf, double lp, double p) {
  if (!(p > 1.0) || std::isinf(p)) throw ParameterError("interpolation_check: p must lie in (1, inf)");
  if (l1 < 0.0 || linf < 0.0 || lp < 0.0) throw ParameterError("interpolation_check: norms must be >= 0");
  return lp <= std::pow(l1, 1.0 / p) * std::pow(linf, 1.0 - 1.0 / p) * (1.0 + 1e-9);
}

ErrorReport make_error_report(std::vector<LevelErrors> levels) {
  ErrorReport rep;
  rep.levels = std::move(levels);
  for (std::size_t j = 0; j < kReportNorms.size(); ++j) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& l : rep.levels) pairs.emplace_back(l.eps, l.errors[j]);
    rep.fits[j] = rate_fit(pairs);
    for (std::size_t idx : rep.fits[j].dropped) {
      rep.notes.push_back(std::string(kReportNormNames[j]) + ": level " + std::to_string(idx) +
                          " has zero error and was left out of the fit");
    }
  }
  return rep;
}

void write_error_report_csv(std::ostream& os, const ErrorReport& report) {
  os << "level,h,dt,eps,L1,L2,L4,Linf\n";
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& l = report.levels[i];
    os << i << ',' << format_double(l.h) << ',' << format_double(l.dt) << ',' << format_double(l.eps);
    for (double e : l.errors) os << ',' << format_double(e);
    os << '\n';
  }
  os << "# fit\nnorm,slope,intercept,r2\n";
  for (std::size_t j = 0; j < report.fits.size(); ++j) {
    const auto& f = report.fits[j];
    os << kReportNormNames[j] << ',' << format_double(f.slope) << ',' << format_double(f.intercept) << ','
       << format_double(f.r2) << '\n';
  }
  for (const auto& n : report.notes) os << "# note: " << n << '\n';
}

}  // namespace hjt
