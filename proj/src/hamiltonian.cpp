#include "hjtorus/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "hjtorus/torus_grid.hpp"

namespace hjt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

class QuadraticHamiltonian final : public Hamiltonian {
 public:
  explicit QuadraticHamiltonian(double scale) : scale_(scale) {}

  double eval(const Point& p) const override { return 0.5 * scale_ * dot(p, p); }
  Point grad(const Point& p) const override { return scale_ * p; }
  double legendre(const Point& a) const override { return dot(a, a) / (2.0 * scale_); }
  Point legendre_grad(const Point& a) const override { return a * (1.0 / scale_); }
  GrowthTag growth_tag() const override { return GrowthTag::quadratic; }
  double legendre_domain_radius() const override { return kInf; }
  std::string describe() const override { return "quadratic(scale=" + format_double(scale_) + ")"; }

 private:
  double scale_;
};

class SmoothedNormHamiltonian final : public Hamiltonian {
 public:
  explicit SmoothedNormHamiltonian(double delta) : delta_(delta) {}

  double eval(const Point& p) const override { return std::sqrt(delta_ * delta_ + dot(p, p)) - delta_; }
  Point grad(const Point& p) const override { return p * (1.0 / std::sqrt(delta_ * delta_ + dot(p, p))); }
  double legendre(const Point& a) const override { return radial_legendre(*this, a).value; }
  Point legendre_grad(const Point& a) const override {
    const double n = norm(a);
    if (n == 0.0) return Point(a.dim());
    return a * (radial_legendre(*this, a).radius / n);
  }
  GrowthTag growth_tag() const override { return GrowthTag::smoothed_norm; }
  double legendre_domain_radius() const override { return 1.0; }
  std::string describe() const override { return "smoothed_norm(delta=" + format_double(delta_) + ")"; }

 private:
  double delta_;
};

class CosinePotential final : public Potential {
 public:
  CosinePotential(double amplitude, int dim) : amp_(amplitude), dim_(dim) {}

  double eval(const Point& x) const override {
    double s = 0.0;
    for (double c : x) s += std::cos(kTwoPi * c);
    return amp_ * s;
  }
  Point grad(const Point& x) const override {
    Point g(x.dim());
    for (int i = 0; i < x.dim(); ++i) g[i] = -amp_ * kTwoPi * std::sin(kTwoPi * x[i]);
    return g;
  }
  double lipschitz_bound() const override { return kTwoPi * std::abs(amp_) * std::sqrt(static_cast<double>(dim_)); }
  double sup_norm() const override { return std::abs(amp_) * dim_; }
  std::string describe() const override {
    return "cosine(amplitude=" + format_double(amp_) + ",dim=" + std::to_string(dim_) + ")";
  }

 private:
  double amp_;
  int dim_;
};

class CosineDatum final : public InitialDatum {
 public:
  CosineDatum(double amplitude, int frequency, int dim) : amp_(amplitude), freq_(frequency), dim_(dim) {}

  double eval(const Point& x) const override {
    double s = 0.0;
    for (double c : x) s += std::cos(kTwoPi * freq_ * c);
    return amp_ * s;
  }
  double lipschitz_bound() const override {
    return kTwoPi * std::abs(freq_ * amp_) * std::sqrt(static_cast<double>(dim_));
  }
  double semiconcavity_bound() const override { return std::pow(kTwoPi * freq_, 2) * std::abs(amp_); }
  int dim() const override { return dim_; }
  std::string describe() const override {
    return "cosine(amplitude=" + format_double(amp_) + ",frequency=" + std::to_string(freq_) +
           ",dim=" + std::to_string(dim_) + ")";
  }

 private:
  double amp_;
  int freq_;
  int dim_;
};

class TrigPolynomialDatum final : public InitialDatum {
 public:
  TrigPolynomialDatum(std::vector<TrigTerm> terms, int dim) : terms_(std::move(terms)), dim_(dim) {
    for (const auto& t : terms_) {
      if (static_cast<int>(t.wavevector.size()) != dim) {
        throw ParameterError("trig polynomial: wavevector dimension mismatch");
      }
      double k2 = 0.0;
      for (int k : t.wavevector) k2 += static_cast<double>(k) * k;
      lip_ += std::abs(t.amplitude) * kTwoPi * std::sqrt(k2);
      conc_ += std::abs(t.amplitude) * kTwoPi * kTwoPi * k2;
    }
  }

  double eval(const Point& x) const override {
    double s = 0.0;
    for (const auto& t : terms_) {
      double arg = t.phase;
      for (int i = 0; i < dim_; ++i) arg += kTwoPi * t.wavevector[i] * x[i];
      s += t.amplitude * std::cos(arg);
    }
    return s;
  }
  double lipschitz_bound() const override { return lip_; }
  double semiconcavity_bound() const override { return conc_; }
  int dim() const override { return dim_; }
  std::string describe() const override {
    std::string s = "trig_polynomial(dim=" + std::to_string(dim_);
    for (const auto& t : terms_) {
      s += ",[" + format_double(t.amplitude) + ";";
      for (int k : t.wavevector) s += std::to_string(k) + ";";
      s += format_double(t.phase) + "]";
    }
    return s + ")";
  }

 private:
  std::vector<TrigTerm> terms_;
  int dim_;
  double lip_ = 0.0;
  double conc_ = 0.0;
};

class ConstantDatum final : public InitialDatum {
 public:
  ConstantDatum(double value, int dim) : value_(value), dim_(dim) {}
  double eval(const Point&) const override { return value_; }
  double lipschitz_bound() const override { return 0.0; }
  double semiconcavity_bound() const override { return 0.0; }
  int dim() const override { return dim_; }
  std::string describe() const override {
    return "constant(value=" + format_double(value_) + ",dim=" + std::to_string(dim_) + ")";
  }

 private:
  double value_;
  int dim_;
};

class TentDatum final : public InitialDatum {
 public:
  TentDatum(double height, int dim) : height_(height), dim_(dim) {}
  double eval(const Point& x) const override {
    double s = 0.0;
    for (double c : x) {
      const double y = c - std::floor(c);
      s += 0.5 - std::abs(y - 0.5);
    }
    return height_ * s;
  }
  double lipschitz_bound() const override { return std::abs(height_) * std::sqrt(static_cast<double>(dim_)); }
  double semiconcavity_bound() const override { return height_ == 0.0 ? 0.0 : kInf; }
  int dim() const override { return dim_; }
  std::string describe() const override {
    return "tent(height=" + format_double(height_) + ",dim=" + std::to_string(dim_) + ")";
  }

 private:
  double height_;
  int dim_;
};

class ShiftedDatum final : public InitialDatum {
 public:
  ShiftedDatum(InitialDatumPtr base, double c) : base_(std::move(base)), c_(c) {}
  double eval(const Point& x) const override { return base_->eval(x) + c_; }
  double lipschitz_bound() const override { return base_->lipschitz_bound(); }
  double semiconcavity_bound() const override { return base_->semiconcavity_bound(); }
  int dim() const override { return base_->dim(); }
  std::string describe() const override { return base_->describe() + "+" + format_double(c_); }

 private:
  InitialDatumPtr base_;
  double c_;
};

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw ParameterError("dimension out of range: " + std::to_string(dim));
}

}  // namespace

double Hamiltonian::legendre_min() const { return -eval(Point(1)); }

HamiltonianPtr quadratic_hamiltonian(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("quadratic_hamiltonian: scale must be > 0");
  return std::make_shared<QuadraticHamiltonian>(scale);
}

HamiltonianPtr smoothed_norm_hamiltonian(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("smoothed_norm_hamiltonian: delta must be > 0");
  return std::make_shared<SmoothedNormHamiltonian>(delta);
}

RadialLegendre radial_legendre(const Hamiltonian& h, const Point& alpha) {
  const double a = norm(alpha);
  const double rdom = h.legendre_domain_radius();
  if (!std::isfinite(a)) throw DomainError("legendre: non-finite control");
  if (a >= rdom) {
    throw DomainError("legendre: |alpha| = " + format_double(a) + " outside the finite domain |alpha| < " +
                      format_double(rdom));
  }
  const Point zero(alpha.dim());
  if (a == 0.0) return {-h.eval(zero), 0.0};

  const Point dir = alpha * (1.0 / a);
  auto profile = [&](double s) { return h.eval(s * dir); };
  auto slope = [&](double s) { return dot(h.grad(s * dir), dir); };

  double target = 2.0 * a;
  if (target >= rdom) target = 0.5 * (a + rdom);
  double pmax = 1.0;
  while (slope(pmax) < target) {
    pmax *= 2.0;
    if (pmax > 1e15) throw DomainError("legendre: supremum not attained (H0 not coercive enough)");
  }

  constexpr int kScan = 64;
  int best = 0;
  double best_val = -kInf;
  for (int j = 0; j <= kScan; ++j) {
    const double s = pmax * j / kScan;
    const double v = s * a - profile(s);
    if (v > best_val) {
      best_val = v;
      best = j;
    }
  }
  double lo = pmax * std::max(0, best - 1) / kScan;
  double hi = pmax * std::min(kScan, best + 1) / kScan;
  // phi'(s) = a - slope(s) is nonincreasing; find its zero in [lo, hi].
  if (a - slope(lo) <= 0.0) {
    hi = lo;
  } else if (a - slope(hi) >= 0.0) {
    lo = hi;
  } else {
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (a - slope(mid) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  const double s = 0.5 * (lo + hi);
  return {s * a - profile(s), s};
}

PotentialPtr cosine_potential(double amplitude, int dim) {
  check_dim(dim);
  if (!std::isfinite(amplitude)) throw ParameterError("cosine_potential: amplitude must be finite");
  return std::make_shared<CosinePotential>(amplitude, dim);
}

InitialDatumPtr cosine_datum(double amplitude, int frequency, int dim) {
  check_dim(dim);
  if (!std::isfinite(amplitude)) throw ParameterError("cosine_datum: amplitude must be finite");
  return std::make_shared<CosineDatum>(amplitude, frequency, dim);
}

InitialDatumPtr trig_polynomial_datum(std::vector<TrigTerm> terms, int dim) {
  check_dim(dim);
  return std::make_shared<TrigPolynomialDatum>(std::move(terms), dim);
}

InitialDatumPtr constant_datum(double value, int dim) {
  check_dim(dim);
  return std::make_shared<ConstantDatum>(value, dim);
}

InitialDatumPtr tent_datum(double height, int dim) {
  check_dim(dim);
  return std::make_shared<TentDatum>(height, dim);
}

InitialDatumPtr shifted_datum(InitialDatumPtr base, double c) {
  return std::make_shared<ShiftedDatum>(std::move(base), c);
}

}  // namespace hjt
