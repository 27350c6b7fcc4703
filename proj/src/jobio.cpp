#include "dlab/jobio.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace dlab {
namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known) fail(where, "unknown field '" + item.key() + "'");
  }
}

const json& require(const json& obj, const std::string& where,
                    const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double as_finite(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "expected a finite number");
  return x;
}

std::uint64_t as_count(const json& v, const std::string& where) {
  if (!(v.is_number_unsigned() ||
        (v.is_number_integer() && v.get<std::int64_t>() >= 0)))
    fail(where, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string as_text(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_reals(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_finite(e, where));
  return out;
}

std::vector<Complex> as_complexes(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty())
    fail(where, "expected a nonempty array of [re, im] pairs");
  std::vector<Complex> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2) fail(where, "expected [re, im] pairs");
    out.emplace_back(as_finite(e[0], where), as_finite(e[1], where));
  }
  return out;
}

json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(where, e.what());  // carries the byte offset
  }
}

DirichletSeriesSpec spec_from(const json& root, const std::string& where) {
  reject_unknown(root, where,
                 {"frequency", "coefficients", "abscissas_override"});
  const json& fq = require(root, where, "frequency");
  const json& cf = require(root, where, "coefficients");
  const std::string fw = where + ".frequency";
  const std::string cw = where + ".coefficients";
  const std::string fkind = as_text(require(fq, fw, "kind"), fw + ".kind");
  const std::string ckind = as_text(require(cf, cw, "kind"), cw + ".kind");

  DirichletSeriesSpec spec;
  if (fkind == "explicit") {
    reject_unknown(fq, fw, {"kind", "lambdas"});
    if (ckind != "unimodular")
      fail(cw, "explicit frequencies take unimodular coefficient values");
    reject_unknown(cf, cw, {"kind", "values"});
    auto lambdas = as_reals(require(fq, fw, "lambdas"), fw + ".lambdas");
    auto values = as_complexes(require(cf, cw, "values"), cw + ".values");
    if (lambdas.size() != values.size())
      fail(where, "lambdas and values differ in length");
    for (const Complex& v : values)
      if (std::abs(std::abs(v) - 1.0) > 1e-12)
        fail(cw + ".values", "unimodular values must have modulus 1");
    spec = make_explicit_series(std::move(lambdas), std::move(values));
  } else if (fkind == "poly_primes" || fkind == "poly_integers") {
    reject_unknown(fq, fw, {"kind", "poly", "count"});
    const auto gen = fkind == "poly_primes" ? FrequencyGenerator::PolyOfPrimes
                                            : FrequencyGenerator::PolyOfIntegers;
    auto poly = as_reals(require(fq, fw, "poly"), fw + ".poly");
    const auto count = as_count(require(fq, fw, "count"), fw + ".count");
    if (count == 0) fail(fw + ".count", "expected a positive count");

    CoefficientModel cm;
    if (ckind == "alternating") {
      reject_unknown(cf, cw, {"kind"});
      cm.kind = CoefficientKind::Alternating;
    } else if (ckind == "polylog") {
      reject_unknown(cf, cw, {"kind", "Q", "kappa"});
      cm.kind = CoefficientKind::PolyLog;
      cm.Q = RealPolynomial(as_reals(require(cf, cw, "Q"), cw + ".Q"));
      cm.kappa = as_finite(require(cf, cw, "kappa"), cw + ".kappa");
      if (cm.kappa < 0.0) fail(cw + ".kappa", "expected kappa >= 0");
    } else if (ckind == "unimodular" || ckind == "random") {
      reject_unknown(cf, cw, {"kind", "values"});
      cm.kind = ckind == "unimodular" ? CoefficientKind::Unimodular
                                      : CoefficientKind::Random;
      cm.values = as_complexes(require(cf, cw, "values"), cw + ".values");
      if (cm.values.size() != count)
        fail(cw + ".values", "expected one value per frequency");
      if (cm.kind == CoefficientKind::Unimodular)
        for (const Complex& v : cm.values)
          if (std::abs(std::abs(v) - 1.0) > 1e-12)
            fail(cw + ".values", "unimodular values must have modulus 1");
    } else {
      fail(cw + ".kind", "unknown coefficient kind '" + ckind + "'");
    }
    spec = make_series(gen, RealPolynomial(std::move(poly)), std::move(cm),
                       count);
  } else {
    fail(fw + ".kind", "unknown frequency kind '" + fkind + "'");
  }

  if (const auto it = root.find("abscissas_override"); it != root.end()) {
    const std::string ow = where + ".abscissas_override";
    reject_unknown(*it, ow, {"sigma_c", "sigma_a", "sigma_2"});
    Abscissas ov;
    ov.sigma_c = as_finite(require(*it, ow, "sigma_c"), ow + ".sigma_c");
    ov.sigma_a = as_finite(require(*it, ow, "sigma_a"), ow + ".sigma_a");
    ov.sigma_2 = as_finite(require(*it, ow, "sigma_2"), ow + ".sigma_2");
    if (ov.sigma_c > ov.sigma_a || ov.sigma_2 > ov.sigma_a)
      fail(ow, "absolute convergence must dominate the other abscissas");
    ov.tag_c = ov.tag_a = ov.tag_2 = AbscissaTag::Override;
    spec.abscissa_override = ov;
  }
  return spec;
}

TargetFunction target_from(const json& root, const std::string& where) {
  if (!root.is_object()) fail(where, "expected an object");
  const std::string kind = as_text(require(root, where, "kind"),
                                   where + ".kind");
  if (kind == "constant") {
    reject_unknown(root, where, {"kind", "value"});
    const json& v = require(root, where, "value");
    if (!v.is_array() || v.size() != 2) fail(where + ".value", "expected [re, im]");
    return TargetFunction::constant_value(
        {as_finite(v[0], where), as_finite(v[1], where)});
  }
  if (kind == "polynomial" || kind == "exp_polynomial") {
    reject_unknown(root, where, {"kind", "coefficients"});
    auto coeff = as_complexes(require(root, where, "coefficients"),
                              where + ".coefficients");
    return kind == "polynomial"
               ? TargetFunction::polynomial(std::move(coeff))
               : TargetFunction::exp_polynomial(std::move(coeff));
  }
  if (kind == "translate") {
    reject_unknown(root, where, {"kind", "tau0"});
    return TargetFunction::translate(
        as_finite(require(root, where, "tau0"), where + ".tau0"));
  }
  fail(where + ".kind", "unknown target kind '" + kind + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void fold(std::ostringstream& os, double x) { os << fmt17(x) << ','; }

}  // namespace

DirichletSeriesSpec spec_from_json(const std::string& text) {
  return spec_from(parse_text(text, "spec"), "spec");
}

DirichletSeriesSpec load_spec_file(const std::string& path) {
  return spec_from(parse_text(read_file(path), path), "spec");
}

TargetFunction target_from_json(const std::string& text) {
  return target_from(parse_text(text, "target"), "target");
}

ScanJob scan_job_from_json(const std::string& text) {
  const json root = parse_text(text, "job");
  reject_unknown(root, "job",
                 {"command", "spec", "target", "rect", "epsilon", "T", "dtau",
                  "seed", "output"});
  const std::string cmd =
      as_text(require(root, "job", "command"), "job.command");
  if (cmd != "scan") fail("job.command", "expected 'scan', got '" + cmd + "'");

  ScanJob job;
  job.spec = spec_from(require(root, "job", "spec"), "job.spec");
  job.target = target_from(require(root, "job", "target"), "job.target");
  const json& rect = require(root, "job", "rect");
  reject_unknown(rect, "job.rect",
                 {"sigma_lo", "sigma_hi", "t_lo", "t_hi", "h"});
  job.sigma_lo = as_finite(require(rect, "job.rect", "sigma_lo"),
                           "job.rect.sigma_lo");
  job.sigma_hi = as_finite(require(rect, "job.rect", "sigma_hi"),
                           "job.rect.sigma_hi");
  job.t_lo = as_finite(require(rect, "job.rect", "t_lo"), "job.rect.t_lo");
  job.t_hi = as_finite(require(rect, "job.rect", "t_hi"), "job.rect.t_hi");
  job.h = as_finite(require(rect, "job.rect", "h"), "job.rect.h");
  job.epsilon = as_finite(require(root, "job", "epsilon"), "job.epsilon");
  job.T = as_finite(require(root, "job", "T"), "job.T");
  job.dtau = as_finite(require(root, "job", "dtau"), "job.dtau");
  if (const auto it = root.find("seed"); it != root.end())
    job.seed = as_count(*it, "job.seed");
  if (const auto it = root.find("output"); it != root.end())
    job.output = as_text(*it, "job.output");
  return job;
}

ScanJob load_scan_job(const std::string& path) {
  return scan_job_from_json(read_file(path));
}

std::string spec_digest(const DirichletSeriesSpec& spec) {
  std::ostringstream os;
  os << "gen=" << static_cast<int>(spec.freq.generator())
     << ";N=" << spec.freq.size() << ";P=";
  if (spec.poly)
    for (double c : spec.poly->coefficients()) fold(os, c);
  os << ";ck=" << static_cast<int>(spec.coeff.kind) << ";Q=";
  if (spec.coeff.Q)
    for (double c : spec.coeff.Q->coefficients()) fold(os, c);
  os << ";kappa=" << fmt17(spec.coeff.kappa) << ";l=";
  const std::size_t probe = std::min<std::size_t>(64, spec.freq.size());
  for (std::size_t n = 1; n <= probe; ++n) fold(os, spec.freq.lambda(n));
  os << ";a=";
  for (std::size_t n = 1; n <= probe; ++n) {
    const Complex a = spec.coefficient(n);
    fold(os, a.real());
    fold(os, a.imag());
  }
  if (spec.abscissa_override) {
    os << ";ov=";
    fold(os, spec.abscissa_override->sigma_c);
    fold(os, spec.abscissa_override->sigma_a);
    fold(os, spec.abscissa_override->sigma_2);
  }
  return hex64(fnv1a64(os.str()));
}

std::string text_digest(const std::string& text) {
  return hex64(fnv1a64(text));
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::string out = "re_s,im_s,re_val,im_val,err,method,terms\n";
  for (const EvalRow& r : rows) {
    out += fmt17(r.s.real());
    out += ',';
    out += fmt17(r.s.imag());
    out += ',';
    out += fmt17(r.value.real());
    out += ',';
    out += fmt17(r.value.imag());
    out += ',';
    out += fmt17(r.err);
    out += ',';
    out += r.method;
    out += ',';
    out += std::to_string(r.terms);
    out += '\n';
  }
  return out;
}

std::string scan_csv(const std::vector<std::pair<double, double>>& trace) {
  std::string out = "tau,sup_distance\n";
  for (const auto& [tau, dist] : trace) {
    out += fmt17(tau);
    out += ',';
    out += fmt17(dist);
    out += '\n';
  }
  return out;
}

std::string primes_csv(const PrimeTable& table) {
  std::string out = "n,prime,log_prime\n";
  for (std::size_t n = 1; n <= table.count(); ++n) {
    out += std::to_string(n);
    out += ',';
    out += std::to_string(table.nth(n));
    out += ',';
    out += fmt17(std::log(static_cast<double>(table.nth(n))));
    out += '\n';
  }
  return out;
}

std::string moment_payload(const MomentReport& rep,
                           const std::string& digest) {
  json j;
  j["T"] = rep.T;
  j["mv_error"] = rep.mv_error;
  j["mv_main"] = rep.mv_main;
  j["node_count"] = rep.node_count;
  j["quadrature_value"] = rep.quadrature_value;
  j["refinement_stable"] = rep.refinement_stable;
  j["sigma"] = rep.sigma;
  j["spec_digest"] = digest;
  return j.dump();
}

std::string ddens_payload(const DdensReport& rep, const std::string& digest) {
  json j;
  j["alpha"] = rep.alpha;
  j["beta"] = rep.beta;
  j["empty_windows"] = json::array();
  for (bool b : rep.empty_window) j["empty_windows"].push_back(b);
  j["fitted_exponent"] = rep.fitted_exponent;
  j["interval_sums"] = rep.interval_sums;
  j["pass"] = rep.pass;
  j["spec_digest"] = digest;
  j["target_exponent"] = rep.target_exponent;
  j["x_grid"] = rep.x_grid;
  return j.dump();
}

std::string scan_payload(const TauScanReport& rep, const std::string& digest,
                         std::uint64_t seed, const std::string& csv_or_path,
                         bool embedded) {
  json j;
  j["T"] = rep.T;
  j["best_error"] = rep.best_error;
  j["best_tau"] = rep.best_tau;
  j["dtau"] = rep.dtau;
  j["epsilon"] = rep.epsilon;
  j["eval_floor"] = rep.eval_floor;
  j["good_measure"] = rep.good_measure;
  j["histogram"] = rep.histogram;
  j["ldens_estimate"] = rep.ldens_estimate;
  j["seed"] = seed;
  j["spec_digest"] = digest;
  if (embedded)
    j["csv"] = csv_or_path;
  else
    j["output"] = csv_or_path;
  return j.dump();
}

std::string report_json(const RunReport& rep) {
  json j;
  j["command"] = rep.command;
  j["job_digest"] = rep.job_digest;
  j["tool_version"] = rep.tool_version;
  j["wall_seconds"] = rep.wall_seconds;
  j["warnings"] = rep.warnings;
  if (!rep.payload_json.empty())
    j["payload"] = json::parse(rep.payload_json);
  if (!rep.error_type.empty())
    j["error"] = {{"message", rep.error_message}, {"type", rep.error_type}};
  return j.dump(2) + "\n";
}

std::string current_error_name() {
  try {
    throw;
  } catch (const ParseError&) {
    return "ParseError";
  } catch (const PoleError&) {
    return "PoleError";
  } catch (const BranchCutError&) {
    return "BranchCutError";
  } catch (const DomainError&) {
    return "DomainError";
  } catch (const OverflowError&) {
    return "OverflowError";
  } catch (const CapacityError&) {
    return "CapacityError";
  } catch (const NonMonotoneError&) {
    return "NonMonotoneError";
  } catch (const TableRangeError&) {
    return "TableRangeError";
  } catch (const ZeroGapError&) {
    return "ZeroGapError";
  } catch (const HypothesisError&) {
    return "HypothesisError";
  } catch (const ResolutionError&) {
    return "ResolutionError";
  } catch (const NotFoundError&) {
    return "NotFoundError";
  } catch (const ZeroFactorError&) {
    return "ZeroFactorError";
  } catch (const DivergenceError&) {
    return "DivergenceError";
  } catch (const EmptyIntervalError&) {
    return "EmptyIntervalError";
  } catch (const ComputeError&) {
    return "ComputeError";
  } catch (const Error&) {
    return "Error";
  } catch (const std::exception&) {
    return "ComputeError";
  } catch (...) {
    return "ComputeError";
  }
}

std::string cache_directory() {
  const char* dir = std::getenv("DLAB_CACHE_DIR");
  return dir ? std::string(dir) : std::string();
}

PrimeTable cached_primes_up_to(std::uint64_t limit) {
  const std::string dir = cache_directory();
  if (dir.empty()) return primes_up_to(limit);
  const auto path = std::filesystem::path(dir) /
                    ("primes_le_" + std::to_string(limit) + ".bin");
  if (std::filesystem::exists(path)) {
    try {
      PrimeTable table = load_prime_table(path.string());
      if (table.limit == limit) return table;
    } catch (const Error&) {
      // unreadable cache entry: fall through and rebuild it
    }
  }
  PrimeTable table = primes_up_to(limit);
  try {
    std::filesystem::create_directories(dir);
    save_prime_table(table, path.string());
  } catch (...) {
    // a read-only cache directory must not fail the run
  }
  return table;
}

}  // namespace dlab
