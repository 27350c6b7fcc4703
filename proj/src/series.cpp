#include "dlab/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "dlab/gammafn.hpp"
#include "dlab/quadrature.hpp"

namespace dlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// scale/X threshold where exp(-scale/X) drops below 1e-18
constexpr double kWeightCut = 41.44653167389282;

bool is_negative_integer(double x) {
  return x < 0.0 && x == std::floor(x);
}

Complex exp_term(const Complex& s, double lambda) {
  if (-lambda * s.real() > 700.0)
    throw OverflowError("term exp(-lambda*Re s) overflows at lambda=" +
                        std::to_string(lambda));
  return std::exp(-s * lambda);
}

// ---------------------------------------------------------------------------
// abscissas
// ---------------------------------------------------------------------------

Abscissas closed_form(double c, double a, double two) {
  Abscissas ab;
  ab.sigma_c = c;
  ab.sigma_a = a;
  ab.sigma_2 = two;
  ab.tag_c = ab.tag_a = ab.tag_2 = AbscissaTag::ClosedForm;
  ab.reliable = true;
  return ab;
}

// limsup-style partial-sum growth estimates on the cached prefix. The
// three ratios are log|sum a_n| / lambda, log(sum |a_n|) / lambda and
// log(sum |a_n|^2) / (2 lambda); each is maximized over the back half of
// the cache and flagged unreliable when the back-half and middle-quarter
// maxima disagree by more than 0.1.
Abscissas estimate_abscissas(const DirichletSeriesSpec& spec) {
  const auto& fr = spec.freq;
  const std::size_t n = fr.size();
  KahanComplexSum signed_sum;
  KahanSum abs_sum, sq_sum;
  double wc[2] = {-kInf, -kInf};
  double wa[2] = {-kInf, -kInf};
  double w2[2] = {-kInf, -kInf};
  const std::size_t half = n / 2, quarter = n / 4;
  for (std::size_t k = 1; k <= n; ++k) {
    const double a = spec.coefficient_abs(k);
    signed_sum.add(spec.coefficient(k));
    abs_sum.add(a);
    sq_sum.add(a * a);
    const double lam = fr.lambda(k);
    if (lam <= 0.0) continue;
    int w = -1;
    if (k > half)
      w = 1;
    else if (k > quarter)
      w = 0;
    if (w < 0) continue;
    const double mag = std::abs(signed_sum.value());
    if (mag > 0.0) wc[w] = std::max(wc[w], std::log(mag) / lam);
    if (abs_sum.value() > 0.0)
      wa[w] = std::max(wa[w], std::log(abs_sum.value()) / lam);
    if (sq_sum.value() > 0.0)
      w2[w] = std::max(w2[w], std::log(sq_sum.value()) / (2.0 * lam));
  }
  Abscissas ab;
  ab.tag_c = ab.tag_a = ab.tag_2 = AbscissaTag::Estimated;
  ab.sigma_c = std::isfinite(wc[1]) ? wc[1] : 0.0;
  ab.sigma_a = std::isfinite(wa[1]) ? wa[1] : 0.0;
  ab.sigma_2 = std::isfinite(w2[1]) ? w2[1] : 0.0;
  ab.reliable = n >= 16 && std::isfinite(wc[0]) && std::isfinite(wa[0]) &&
                std::isfinite(w2[0]) && std::abs(wc[1] - wc[0]) <= 0.1 &&
                std::abs(wa[1] - wa[0]) <= 0.1 &&
                std::abs(w2[1] - w2[0]) <= 0.1;
  ab.sigma_c = std::min(ab.sigma_c, ab.sigma_a);
  ab.sigma_2 = std::min(ab.sigma_2, ab.sigma_a);
  return ab;
}

// ---------------------------------------------------------------------------
// the poly-log continuation family  sum Q(n)(log n)^kappa P(n)^{-s}
// ---------------------------------------------------------------------------

struct PolyLogFamily {
  const RealPolynomial* P = nullptr;
  const RealPolynomial* Q = nullptr;
  RealPolynomial Pprime{std::vector<double>{1.0}};
  double kappa = 0.0;
  int d = 1;
  double B = 1.0;        // 1/lead(P); log(B P(u)) ~ d log u at infinity
  double c_split = 0.0;  // Q = c_split P' + Q1, deg Q1 <= d-2
  std::optional<RealPolynomial> Q1;
  bool monomial = false;  // P = lead X^d exactly, so the log bracket is 0
};

PolyLogFamily polylog_family(const DirichletSeriesSpec& spec) {
  if (spec.coeff.kind != CoefficientKind::PolyLog)
    throw DomainError("continuation paths need the poly-log coefficient model");
  if (spec.freq.generator() != FrequencyGenerator::PolyOfIntegers)
    throw DomainError("continuation paths need the integer-generated family");
  if (!spec.poly || !spec.coeff.Q)
    throw DomainError("continuation paths need both P and Q");
  if (is_negative_integer(spec.coeff.kappa))
    throw DomainError("kappa must not be a negative integer");
  PolyLogFamily F;
  F.P = &*spec.poly;
  F.Q = &*spec.coeff.Q;
  F.kappa = spec.coeff.kappa;
  F.d = F.P->degree();
  if (F.Q->degree() > F.d - 1)
    throw DomainError("deg Q must be at most deg P - 1 for continuation");
  const double lead = F.P->leading();
  F.B = 1.0 / lead;
  F.Pprime = F.P->derivative();
  const auto& qc = F.Q->coefficients();
  const double q_top =
      F.Q->degree() == F.d - 1 ? qc[static_cast<std::size_t>(F.d - 1)] : 0.0;
  F.c_split = q_top / (F.d * lead);
  // Q1 = Q - c_split P'
  std::vector<double> q1(static_cast<std::size_t>(std::max(F.d - 1, 1)), 0.0);
  for (std::size_t i = 0; i < qc.size(); ++i) q1[i] = qc[i];
  const auto& pp = F.Pprime.coefficients();
  for (std::size_t i = 0; i < pp.size(); ++i) q1[i] -= F.c_split * pp[i];
  while (q1.size() > 1 && q1.back() == 0.0) q1.pop_back();
  if (!(q1.size() == 1 && q1[0] == 0.0)) F.Q1 = RealPolynomial(q1);
  F.monomial = true;
  const auto& pc = F.P->coefficients();
  for (std::size_t i = 0; i + 1 < pc.size(); ++i)
    if (pc[i] != 0.0) F.monomial = false;
  return F;
}

// principal-branch power, exact repeated product for small natural
// exponents so real inputs stay exactly real
Complex cpow(const Complex& base, double expo) {
  if (expo == std::floor(expo) && expo >= 0.0 && expo <= 64.0) {
    Complex r = 1.0;
    for (int i = 0; i < static_cast<int>(expo); ++i) r *= base;
    return r;
  }
  return std::pow(base, Complex(expo, 0.0));
}

// B^{s-1}/(d^kappa (s-1)^{kappa+1}) Gamma(kappa+1, (s-1) log(B P(y))):
// the closed form of int_y^inf P'(u) (log u)^kappa P(u)^{-s} du up to the
// bracket correction, and its analytic continuation left of Re s = 1.
Complex gamma_correction(const PolyLogFamily& F, const Complex& s, double y) {
  const double bp = F.B * (*F.P)(y);
  if (!(bp > 1.0))
    throw DomainError("cut point too small: need P(y)/lead > 1");
  const Complex w = (s - 1.0) * std::log(bp);
  const Complex g = upper_incomplete_gamma(F.kappa + 1.0, w);
  const Complex pref = std::exp((s - 1.0) * std::log(F.B)) /
                       (std::pow(static_cast<double>(F.d), F.kappa) *
                        cpow(s - 1.0, F.kappa + 1.0));
  return pref * g;
}

Complex phi_value(const PolyLogFamily& F, const Complex& s, double u) {
  const double L = std::log(u);
  return (*F.Q)(u) * std::pow(L, F.kappa) *
         std::exp(-s * std::log((*F.P)(u)));
}

// phi'(u) = (log u)^kappa P^{-s} [Q' + kappa Q/(u log u) - s Q P'/P]
Complex phi_derivative(const PolyLogFamily& F, const Complex& s, double u) {
  const double L = std::log(u);
  const double P = (*F.P)(u);
  const double Q = (*F.Q)(u);
  const Complex inner = F.Pprime(u) / P * (-s) * Q +
                        Complex(F.Q->derivative_at(u) +
                                    (F.kappa == 0.0 ? 0.0 : F.kappa * Q / (u * L)),
                                0.0);
  return std::pow(L, F.kappa) * std::exp(-s * std::log(P)) * inner;
}

// (log u)^kappa - ((log(B P(u)))/d)^kappa, computed through expm1/log1p so
// the leading log u cancels exactly; O(u^{-1} log^{kappa-1} u) at infinity.
double log_bracket(const PolyLogFamily& F, double u) {
  if (F.kappa == 0.0 || F.monomial) return 0.0;
  const double L1 = std::log(u);
  const double lead = F.P->leading();
  const double monomial = lead * std::pow(u, F.d);
  const double delta =
      std::log1p(((*F.P)(u)-monomial) / monomial) / static_cast<double>(F.d);
  return -std::pow(L1, F.kappa) * std::expm1(F.kappa * std::log1p(delta / L1));
}

// Doubling windows [U, 2U] until a chunk falls below 1e-17 of the running
// total (or 60 windows), then a geometric-ratio bound on what is left.
QuadResult integrate_to_infinity(const Integrand& f, double a) {
  KahanComplexSum acc;
  QuadResult out;
  double U = a;
  double last = 0.0, before_last = -1.0;
  for (int w = 0; w < 60; ++w) {
    const double acc_mag = std::abs(acc.value());
    QuadResult q =
        integrate_adaptive(f, U, 2.0 * U, 1e-300 + 1e-17 * acc_mag, 1e-13);
    acc.add(q.value);
    out.error += q.error;
    out.evaluations += q.evaluations;
    before_last = w == 0 ? -1.0 : last;
    last = std::abs(q.value);
    U *= 2.0;
    if (w > 0 && last <= 1e-17 * std::max(std::abs(acc.value()), 1e-300)) break;
  }
  double rho = before_last > 0.0 ? std::min(last / before_last, 0.9) : 0.5;
  if (!(rho > 0.0) || !std::isfinite(rho)) rho = 0.5;
  out.error += last * rho / (1.0 - rho);
  out.value = acc.value();
  return out;
}

// ---------------------------------------------------------------------------
// Taylor jets at the Bernoulli handoff point
// ---------------------------------------------------------------------------

constexpr int kJet = 12;
using Jet = std::array<Complex, kJet>;

Jet jet_mul(const Jet& a, const Jet& b) {
  Jet r{};
  for (int k = 0; k < kJet; ++k)
    for (int i = 0; i <= k; ++i) r[k] += a[i] * b[k - i];
  return r;
}

Jet jet_scale(const Jet& a, const Complex& c) {
  Jet r{};
  for (int k = 0; k < kJet; ++k) r[k] = c * a[k];
  return r;
}

// b = log a with a[0] away from zero:
// k a0 b_k = k a_k - sum_{j=1}^{k-1} j b_j a_{k-j}
Jet jet_log(const Jet& a) {
  Jet b{};
  b[0] = std::log(a[0]);
  for (int k = 1; k < kJet; ++k) {
    Complex acc = static_cast<double>(k) * a[k];
    for (int j = 1; j < k; ++j)
      acc -= static_cast<double>(j) * b[j] * a[k - j];
    b[k] = acc / (static_cast<double>(k) * a[0]);
  }
  return b;
}

// c = exp(w): c_k = (1/k) sum_{j=1}^{k} j w_j c_{k-j}
Jet jet_exp(const Jet& w) {
  Jet c{};
  c[0] = std::exp(w[0]);
  for (int k = 1; k < kJet; ++k) {
    Complex acc = 0.0;
    for (int j = 1; j <= k; ++j)
      acc += static_cast<double>(j) * w[j] * c[k - j];
    c[k] = acc / static_cast<double>(k);
  }
  return c;
}

// Taylor coefficients of the polynomial at u = M + h (finite, exact).
Jet jet_poly(const RealPolynomial& p, double M) {
  Jet r{};
  const auto& c = p.coefficients();
  // Horner in (M + h) over truncated jets: r = c_d; r = r*(M+h) + c_{d-1}; ...
  Jet x{};
  x[0] = M;
  x[1] = 1.0;
  for (std::size_t i = c.size(); i-- > 0;) {
    r = jet_mul(r, x);
    r[0] += c[i];
  }
  return r;
}

// Jet of log u at u = M + h: log M + log1p(h/M)
Jet jet_log_u(double M) {
  Jet r{};
  r[0] = std::log(M);
  double mp = M;
  for (int k = 1; k < kJet; ++k) {
    r[k] = ((k % 2 == 1) ? 1.0 : -1.0) / (static_cast<double>(k) * mp);
    mp *= M;
  }
  return r;
}

Jet phi_jet(const PolyLogFamily& F, const Complex& s, double M) {
  Jet qj = jet_poly(*F.Q, M);
  Jet lp = jet_log(jet_poly(*F.P, M));
  Jet result = jet_mul(qj, jet_exp(jet_scale(lp, -s)));
  if (F.kappa != 0.0) {
    Jet ll = jet_log(jet_log_u(M));
    result = jet_mul(result, jet_exp(jet_scale(ll, F.kappa)));
  }
  return result;
}

// ---------------------------------------------------------------------------
// model-aware tail bound for |sum_{n>N} a_n e^{-lambda_n s}|
// ---------------------------------------------------------------------------

double direct_tail(const DirichletSeriesSpec& spec, const Complex& s,
                   std::size_t N) {
  const auto& fr = spec.freq;
  const double sigma = s.real();
  switch (spec.coeff.kind) {
    case CoefficientKind::Alternating: {
      const double lamN = fr.lambda(N);
      if (s.imag() == 0.0) {
        // alternating bracket: the remainder is below the next term
        double lam_next;
        if (N < fr.size())
          lam_next = fr.lambda(N + 1);
        else
          lam_next = lamN + (N >= 2 ? lamN - fr.lambda(N - 1) : lamN);
        return std::exp(-lam_next * sigma);
      }
      if (sigma <= 0.0) return kInf;
      // partial summation against the bounded sign sums
      return 2.0 * (1.0 + std::abs(s) / sigma) * std::exp(-lamN * sigma);
    }
    case CoefficientKind::PolyLog: {
      // integral comparison: terms shrink like u^{q - d sigma} (log u)^kappa
      const int d = spec.poly ? spec.poly->degree() : 1;
      const int q = spec.coeff.Q ? spec.coeff.Q->degree() : 0;
      const double p = d * sigma - q;
      const double last = spec.coefficient_abs(N) * std::exp(-fr.lambda(N) * sigma);
      if (p <= 1.0) return kInf;
      // the log factor keeps growing across the tail; the correction series
      // has j-th term below (kappa / ((p-1) log u))^j, so a geometric
      // certificate covers it once the ratio is under 1/2
      const double kap = std::max(spec.coeff.kappa, 0.0);
      const double ell = (p - 1.0) * std::log(std::max(fr.argument(N), 2.0));
      const double ratio = kap > 0.0 ? kap / ell : 0.0;
      const double boost = ratio < 0.5 ? 1.0 / (1.0 - ratio) : 2.0 + 2.0 * ratio;
      return boost * last * fr.argument(N) / std::max(p - 1.0, 0.05);
    }
    case CoefficientKind::Unimodular:
    case CoefficientKind::Random: {
      // explicit finite list: what is left is exactly the remaining mass
      KahanSum rest;
      for (std::size_t n = N + 1; n <= fr.size(); ++n) {
        const double e = -fr.lambda(n) * sigma;
        if (e > 700.0) throw OverflowError("tail term overflows");
        rest.add(spec.coefficient_abs(n) * std::exp(e));
      }
      return rest.value();
    }
  }
  return kInf;
}

}  // namespace

// ---------------------------------------------------------------------------
// DirichletSeriesSpec
// ---------------------------------------------------------------------------

Complex DirichletSeriesSpec::coefficient(std::size_t n) const {
  switch (coeff.kind) {
    case CoefficientKind::Alternating:
      return ((n + freq.offset()) % 2 == 0) ? Complex(1.0, 0.0)
                                            : Complex(-1.0, 0.0);
    case CoefficientKind::PolyLog: {
      const double u = freq.argument(n);
      if (!(u > 1.0))
        throw DomainError("poly-log coefficients need arguments above 1");
      return Complex((*coeff.Q)(u)*std::pow(std::log(u), coeff.kappa), 0.0);
    }
    case CoefficientKind::Unimodular:
    case CoefficientKind::Random:
      if (n == 0 || n > coeff.values.size())
        throw DomainError("coefficient index outside the stored list");
      return coeff.values[n - 1];
  }
  throw DomainError("unknown coefficient kind");
}

double DirichletSeriesSpec::coefficient_abs(std::size_t n) const {
  switch (coeff.kind) {
    case CoefficientKind::Alternating:
      return 1.0;
    case CoefficientKind::PolyLog: {
      const double u = freq.argument(n);
      if (!(u > 1.0))
        throw DomainError("poly-log coefficients need arguments above 1");
      return std::abs((*coeff.Q)(u)) * std::pow(std::log(u), coeff.kappa);
    }
    case CoefficientKind::Unimodular:
    case CoefficientKind::Random:
      if (n == 0 || n > coeff.values.size())
        throw DomainError("coefficient index outside the stored list");
      return std::abs(coeff.values[n - 1]);
  }
  throw DomainError("unknown coefficient kind");
}

DirichletSeriesSpec make_series(FrequencyGenerator gen,
                                const RealPolynomial& P,
                                CoefficientModel coeff, std::size_t N) {
  if (gen == FrequencyGenerator::Explicit)
    throw DomainError("make_series needs a generated family; use make_explicit_series");
  if (coeff.kind == CoefficientKind::PolyLog && !coeff.Q)
    throw DomainError("poly-log coefficients need the envelope Q");
  DirichletSeriesSpec spec;
  spec.freq = lambda_values(gen, P, N);
  if ((coeff.kind == CoefficientKind::Unimodular ||
       coeff.kind == CoefficientKind::Random) &&
      coeff.values.size() != spec.freq.size())
    throw DomainError("coefficient list length must match the frequency count");
  spec.coeff = std::move(coeff);
  spec.poly = P;
  return spec;
}

DirichletSeriesSpec make_explicit_series(std::vector<double> lambdas,
                                         std::vector<Complex> values) {
  DirichletSeriesSpec spec;
  spec.freq = FrequencySequence::explicit_list(std::move(lambdas));
  if (values.size() != spec.freq.size())
    throw DomainError("coefficient list length must match the frequency count");
  spec.coeff.kind = CoefficientKind::Unimodular;
  spec.coeff.values = std::move(values);
  return spec;
}

Abscissas abscissas(const DirichletSeriesSpec& spec) {
  if (spec.abscissa_override) {
    Abscissas ab = *spec.abscissa_override;
    ab.tag_c = ab.tag_a = ab.tag_2 = AbscissaTag::Override;
    ab.reliable = true;
    return ab;
  }
  const auto gen = spec.freq.generator();
  const auto kind = spec.coeff.kind;
  // a finite explicit sum is entire
  if (gen == FrequencyGenerator::Explicit ||
      kind == CoefficientKind::Unimodular)
    return closed_form(-kInf, -kInf, -kInf);
  if (!spec.poly) return estimate_abscissas(spec);
  const int d = spec.poly->degree();
  if (kind == CoefficientKind::Alternating ||
      kind == CoefficientKind::PolyLog) {
    if (gen == FrequencyGenerator::PolyOfPrimes) {
      // prime-generated family: coefficient growth pinned to the
      // n^{d-1} envelope of the covered theorems
      const double sa = 1.0;
      const double s2 = 1.0 - 1.0 / (2.0 * d);
      const double sc = kind == CoefficientKind::Alternating ? 0.0 : sa;
      return closed_form(sc, sa, s2);
    }
    // integer-generated family, keyed to q = deg Q
    const int q =
        kind == CoefficientKind::PolyLog ? spec.coeff.Q->degree() : 0;
    const double sa = (q + 1.0) / d;
    const double s2 = (2.0 * q + 1.0) / (2.0 * d);
    const double sc = kind == CoefficientKind::Alternating ? 0.0 : sa;
    return closed_form(sc, sa, s2);
  }
  // random signs: square-root cancellation closed form for the plain
  // prime frequencies, growth estimate otherwise
  if (kind == CoefficientKind::Random &&
      gen == FrequencyGenerator::PolyOfPrimes && d == 1)
    return closed_form(0.5, 1.0, 0.5);
  return estimate_abscissas(spec);
}

bool coefficient_sandwich(const DirichletSeriesSpec& spec, double C) {
  if (!(C > 0.0)) throw DomainError("sandwich constant must be positive");
  const int d = spec.poly ? spec.poly->degree() : 1;
  const double kap =
      spec.coeff.kind == CoefficientKind::PolyLog
          ? std::max(std::abs(spec.coeff.kappa), 1.0)
          : 1.0;
  for (std::size_t i = 1; i <= spec.freq.size(); ++i) {
    const double n = static_cast<double>(i + spec.freq.offset());
    if (n < 2.0) continue;
    const double body = std::pow(n, d - 1.0);
    const double logs = std::pow(std::log(n), kap);
    const double a = spec.coefficient_abs(i);
    if (a < body / (C * logs) || a > C * body * logs) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// eval_direct
// ---------------------------------------------------------------------------

EvaluationResult eval_direct(const DirichletSeriesSpec& spec, Complex s,
                             std::size_t N) {
  const auto& fr = spec.freq;
  if (N == 0 || N > fr.size())
    throw DomainError("term count outside the cached range");
  const Abscissas ab = abscissas(spec);
  if (!(s.real() > ab.sigma_c))
    throw DivergenceError("Re s must exceed the convergence abscissa " +
                          std::to_string(ab.sigma_c));
  KahanComplexSum acc;
  for (std::size_t n = 1; n <= N; ++n)
    acc.add(spec.coefficient(n) * exp_term(s, fr.lambda(n)));
  EvaluationResult r;
  r.value = acc.value();
  r.method = EvalMethod::Direct;
  r.work = static_cast<std::int64_t>(N);
  const double tail = direct_tail(spec, s, N);
  r.error_estimate = std::isfinite(tail)
                         ? tail
                         : std::abs(spec.coefficient(N)) *
                               std::exp(-fr.lambda(N) * s.real());
  return r;
}

// ---------------------------------------------------------------------------
// eval_smoothed
// ---------------------------------------------------------------------------

EvaluationResult eval_smoothed(const DirichletSeriesSpec& spec, Complex s,
                               double X) {
  if (!(X > 0.0)) throw DomainError("smoothing scale X must be positive");
  const auto& fr = spec.freq;
  const Abscissas ab = abscissas(spec);
  const double sigma = s.real();
  if (!(sigma > ab.sigma_2))
    throw DivergenceError("Re s must exceed the mean-square abscissa " +
                          std::to_string(ab.sigma_2));
  const double t1 = kWeightCut * X;
  const double t2 = kWeightCut * X / 2.0;
  const double t4 = kWeightCut * X / 4.0;
  KahanComplexSum s1, s2, s4;
  std::int64_t work = 0;
  std::size_t first_dropped = fr.size() + 1;
  for (std::size_t n = 1; n <= fr.size(); ++n) {
    const double sc = fr.scale(n);
    if (sc > t1) {
      first_dropped = n;
      break;
    }
    const Complex base = spec.coefficient(n) * exp_term(s, fr.lambda(n));
    s1.add(base * std::exp(-sc / X));
    ++work;
    if (sc <= t2) {
      s2.add(base * std::exp(-2.0 * sc / X));
      ++work;
    }
    if (sc <= t4) {
      s4.add(base * std::exp(-4.0 * sc / X));
      ++work;
    }
  }
  // truncated terms all carry weights below 1e-18
  double trunc = 0.0;
  if (first_dropped <= fr.size()) {
    KahanSum dropped;
    for (std::size_t n = first_dropped; n <= fr.size(); ++n) {
      const double e = -fr.lambda(n) * sigma;
      dropped.add(spec.coefficient_abs(n) * (e > 700.0 ? kInf : std::exp(e)));
    }
    trunc = 1e-18 * dropped.value();
  }
  // weighted mass beyond the cache end
  double endtail = 0.0;
  if (first_dropped > fr.size() && fr.size() >= 1) {
    const std::size_t M = fr.size();
    const double w_end = std::exp(-fr.scale(M) / X);
    const double model = sigma > ab.sigma_a ? direct_tail(spec, s, M) : kInf;
    if (std::isfinite(model)) {
      endtail = w_end * model;
    } else if (M >= 2) {
      const double aN = spec.coefficient_abs(M) *
                        std::exp(-fr.lambda(M) * sigma) * w_end;
      const double aP = spec.coefficient_abs(M - 1) *
                        std::exp(-fr.lambda(M - 1) * sigma) *
                        std::exp(-fr.scale(M - 1) / X);
      const double rho = aP > 0.0 ? std::min(aN / aP, 0.95) : 0.5;
      endtail = aN * rho / (1.0 - rho);
    }
  }
  const double d1 = std::abs(s1.value() - s2.value());
  const double d2 = std::abs(s2.value() - s4.value());
  const double bias = d2 > d1 ? d1 * d1 / (d2 - d1) : std::max(d1, d2);
  EvaluationResult r;
  r.value = s1.value();
  r.method = EvalMethod::Smoothed;
  r.work = std::max<std::int64_t>(work, 1);
  r.error_estimate = bias + trunc + endtail;
  return r;
}

// ---------------------------------------------------------------------------
// eval_afe
// ---------------------------------------------------------------------------

namespace {

Complex afe_value(const PolyLogFamily& F, const Complex& s, double cut,
                  const Complex& partial) {
  Complex v = partial;
  if (F.c_split != 0.0) v += F.c_split * gamma_correction(F, s, cut);
  return v;
}

}  // namespace

EvaluationResult eval_afe(const DirichletSeriesSpec& spec, Complex s,
                          double x, const AfeConfig& cfg) {
  const PolyLogFamily F = polylog_family(spec);
  if (!(cfg.delta > 0.0)) throw DomainError("aperture delta must be positive");
  if (F.c_split != 0.0 && s == Complex(1.0, 0.0))
    throw PoleError("s = 1 is the pole of this family");
  const double edge = 1.0 - 1.0 / F.d;
  if (!(s.real() > edge))
    throw DomainError("Re s must exceed 1 - 1/deg P for the truncated form");
  if (!(std::abs(s.imag()) <= cfg.delta * x))
    throw DomainError("|Im s| exceeds the aperture delta * x");
  const auto& fr = spec.freq;
  const double m = std::floor(x);
  const double m2 = std::floor(x / 2.0);
  const double m4 = std::floor(x / 4.0);
  if (m4 < fr.argument(1))
    throw DomainError("x too small: x/4 must reach the first summed argument");
  if (m > fr.argument(fr.size()))
    throw CapacityError("cached sequence too short for this cut point");
  KahanComplexSum acc;
  Complex p2, p4;
  bool got2 = false, got4 = false;
  std::int64_t work = 0;
  for (std::size_t n = 1; n <= fr.size(); ++n) {
    const double u = fr.argument(n);
    if (u > m) break;
    if (!got4 && u > m4) {
      p4 = acc.value();
      got4 = true;
    }
    if (!got2 && u > m2) {
      p2 = acc.value();
      got2 = true;
    }
    acc.add(spec.coefficient(n) * exp_term(s, fr.lambda(n)));
    ++work;
  }
  if (!got4) p4 = acc.value();
  if (!got2) p2 = acc.value();
  const Complex f1 = afe_value(F, s, m, acc.value());
  const Complex f2 = afe_value(F, s, m2, p2);
  const Complex f4 = afe_value(F, s, m4, p4);
  const double d1 = std::abs(f1 - f2);
  const double d2 = std::abs(f2 - f4);
  EvaluationResult r;
  r.value = f1;
  r.method = EvalMethod::Afe;
  r.work = std::max<std::int64_t>(work, 1);
  r.error_estimate = d2 > d1 ? d1 * d1 / (d2 - d1) : std::max(d1, d2);
  return r;
}

// ---------------------------------------------------------------------------
// euler_maclaurin
// ---------------------------------------------------------------------------

EvaluationResult euler_maclaurin(const DirichletSeriesSpec& spec, Complex s,
                                 std::size_t N) {
  const PolyLogFamily F = polylog_family(spec);
  if (F.c_split != 0.0 && s == Complex(1.0, 0.0))
    throw PoleError("s = 1 is the pole of this family");
  if (!(s.real() > 1.0 - 1.0 / F.d))
    throw DomainError("Re s must exceed 1 - 1/deg P");
  const auto& fr = spec.freq;
  const double Nd = static_cast<double>(N);
  if (Nd < fr.argument(1))
    throw DomainError("split point precedes the first generator argument");
  if (Nd - 1.0 > fr.argument(fr.size()))
    throw CapacityError("cached sequence too short for this split point");

  EvaluationResult r;
  r.method = EvalMethod::EulerMaclaurin;
  KahanComplexSum acc;
  std::int64_t work = 0;
  for (std::size_t n = 1; n <= fr.size(); ++n) {
    const double u = fr.argument(n);
    if (u > Nd - 1.0) break;
    acc.add(spec.coefficient(n) * exp_term(s, fr.lambda(n)));
    ++work;
  }
  Complex value = acc.value();
  double err = 0.0;

  // int_N^inf phi: Gamma closed form for the P' part, numeric remainders
  if (F.c_split != 0.0) {
    value += F.c_split * gamma_correction(F, s, Nd);
    if (F.kappa != 0.0 && !F.monomial) {
      QuadResult br = integrate_to_infinity(
          [&](double u) -> Complex {
            return F.Pprime(u) * log_bracket(F, u) *
                   std::exp(-s * std::log((*F.P)(u)));
          },
          Nd);
      value += F.c_split * br.value;
      err += std::abs(F.c_split) * br.error;
      work += br.evaluations;
    }
  }
  if (F.Q1) {
    QuadResult q1 = integrate_to_infinity(
        [&](double u) -> Complex {
          return (*F.Q1)(u)*std::pow(std::log(u), F.kappa) *
                 std::exp(-s * std::log((*F.P)(u)));
        },
        Nd);
    value += q1.value;
    err += q1.error;
    work += q1.evaluations;
  }

  // int_N^inf rho phi': resolved per unit interval up to M, Bernoulli
  // corrections past M
  const std::size_t M = std::max<std::size_t>(
      N, static_cast<std::size_t>(
             std::ceil(1.5 * F.d * (std::abs(s) + 8.0))));
  for (std::size_t k = N; k < M; ++k) {
    const double mid = static_cast<double>(k) + 0.5;
    QuadResult q = integrate_adaptive(
        [&](double u) -> Complex {
          return (u - mid) * phi_derivative(F, s, u);
        },
        static_cast<double>(k), static_cast<double>(k) + 1.0, 1e-300, 1e-13);
    value += q.value;
    err += q.error;
    work += q.evaluations;
  }
  {
    const double Md = static_cast<double>(M);
    const Jet jet = phi_jet(F, s, Md);
    static const double kBern[6] = {1.0 / 6.0,  -1.0 / 30.0, 1.0 / 42.0,
                                    -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0};
    // int_M^inf rho phi' = -sum_j B_{2j}/(2j)! phi^{(2j-1)}(M) + R
    Complex tail = 0.0;
    double prev_mag = kInf;
    double rem = 0.0;
    for (int j = 1; j <= 6; ++j) {
      const Complex term =
          -(kBern[j - 1] / (2.0 * j)) * jet[static_cast<std::size_t>(2 * j - 1)];
      const double mag = std::abs(term);
      if (mag >= prev_mag) {
        rem = mag;
        break;
      }
      tail += term;
      rem = mag;
      prev_mag = mag;
    }
    value += tail;
    err += rem;
    value += 0.5 * phi_value(F, s, Nd);
  }

  r.value = value;
  r.error_estimate = err + 1e-15 * std::abs(value);
  r.work = std::max<std::int64_t>(work, 1);
  return r;
}

}  // namespace dlab
