#include "dlab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dlab {
namespace {

// Bound on the magnitude of every root (Cauchy).
double root_bound(const std::vector<double>& c) {
  double lead = std::abs(c.back());
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i)
    m = std::max(m, std::abs(c[i]) / lead);
  return 1.0 + m;
}

// Evaluation roundoff scale: sum |b_i| |x|^i.
double eval_scale(const std::vector<double>& c, double x) {
  double ax = std::abs(x), s = 0.0, pw = 1.0;
  for (double b : c) {
    s += std::abs(b) * pw;
    pw *= ax;
  }
  return s;
}

double bisect_root(const RealPolynomial& p, double a, double b) {
  double fa = p(a);
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    double fm = p(m);
    if (fm == 0.0) return m;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
    if (b - a <= 1e-15 * std::max(1.0, std::max(std::abs(a), std::abs(b))))
      break;
  }
  return 0.5 * (a + b);
}

}  // namespace

RealPolynomial::RealPolynomial(std::vector<double> coefficients)
    : coeff_(std::move(coefficients)) {
  if (coeff_.empty()) throw DomainError("polynomial needs coefficients");
  for (double b : coeff_)
    if (!std::isfinite(b)) throw DomainError("polynomial coefficient not finite");
  if (coeff_.back() == 0.0 && coeff_.size() > 1)
    throw DomainError("leading coefficient is zero");
  if (degree() >= 1) {
    auto crit = real_roots(derivative());
    x0_ = crit.empty() ? 0.0 : crit.back() + 1.0;
  }
}

double RealPolynomial::operator()(double x) const {
  double v = 0.0;
  for (std::size_t i = coeff_.size(); i-- > 0;) v = v * x + coeff_[i];
  return v;
}

Complex RealPolynomial::operator()(const Complex& x) const {
  Complex v = 0.0;
  for (std::size_t i = coeff_.size(); i-- > 0;) v = v * x + coeff_[i];
  return v;
}

double RealPolynomial::derivative_at(double x) const {
  double v = 0.0;
  for (std::size_t i = coeff_.size(); i-- > 1;)
    v = v * x + coeff_[i] * static_cast<double>(i);
  return v;
}

RealPolynomial RealPolynomial::derivative() const {
  if (degree() == 0) return RealPolynomial({0.0});
  std::vector<double> d(coeff_.size() - 1);
  for (std::size_t i = 1; i < coeff_.size(); ++i)
    d[i - 1] = coeff_[i] * static_cast<double>(i);
  return RealPolynomial(std::move(d));
}

double RealPolynomial::increasing_from() const {
  if (degree() == 0)
    throw DomainError("constant polynomial has no monotone tail");
  return x0_;
}

std::vector<double> real_roots(const RealPolynomial& p) {
  const auto& c = p.coefficients();
  int d = p.degree();
  if (d == 0) return {};
  if (d == 1) return {-c[0] / c[1]};

  // critical points split the line into monotone pieces; scan each piece
  // for a sign change, and catch grazing roots at the breakpoints
  std::vector<double> crit = real_roots(p.derivative());
  double bound = root_bound(c);
  std::vector<double> pts;
  pts.push_back(-bound);
  for (double x : crit)
    if (x > -bound && x < bound) pts.push_back(x);
  pts.push_back(bound);

  std::vector<double> roots;
  auto push = [&](double r) {
    if (!roots.empty() &&
        std::abs(r - roots.back()) <=
            1e-10 * std::max(1.0, std::abs(r)))
      return;
    roots.push_back(r);
  };
  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = p(pts[i]);
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (std::abs(vals[i]) <= 1e-12 * eval_scale(c, pts[i])) vals[i] = 0.0;

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (vals[i] == 0.0) push(pts[i]);
    if (vals[i] != 0.0 && vals[i + 1] != 0.0 &&
        (vals[i] < 0.0) != (vals[i + 1] < 0.0))
      push(bisect_root(p, pts[i], pts[i + 1]));
  }
  if (vals.back() == 0.0) push(pts.back());
  return roots;
}

double poly_inverse(const RealPolynomial& p, double y) {
  if (p.degree() == 0) throw DomainError("cannot invert a constant");
  if (p.leading() <= 0.0)
    throw DomainError("inverse needs a positive leading coefficient");
  if (!std::isfinite(y)) throw DomainError("inverse target not finite");
  double lo = p.increasing_from();
  double ylo = p(lo);
  if (y < ylo) throw DomainError("target below the monotone range");
  if (y == ylo) return lo;

  // bracket upward; P is strictly increasing past lo so this terminates
  double hi = std::max(lo + 1.0, 2.0 * std::abs(lo) + 1.0);
  while (p(hi) < y) {
    lo = std::max(lo, hi * 0.5);
    hi = 2.0 * hi + 1.0;
    if (hi > 1e300) throw DomainError("inverse bracket overflow");
  }

  // leading-order start x ~ (y/b_d)^(1/d), clamped to the bracket
  double x = std::pow(std::max(y, std::numeric_limits<double>::min()) /
                          p.leading(),
                      1.0 / p.degree());
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  for (int it = 0; it < 200; ++it) {
    double f = p(x) - y;
    if (f == 0.0) return x;
    if (f < 0.0)
      lo = std::max(lo, x);
    else
      hi = std::min(hi, x);
    double dp = p.derivative_at(x);
    double step = (dp != 0.0) ? f / dp : 0.0;
    double xn = x - step;
    if (!(xn > lo && xn < hi) || step == 0.0) xn = 0.5 * (lo + hi);
    double tol = 1e-14 * std::max(1.0, std::abs(x));
    bool done = std::abs(xn - x) <= tol;
    x = xn;
    if (done) break;
  }
  return x;
}

}  // namespace dlab
