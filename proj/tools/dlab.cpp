// Command-line front end: parses one job, runs the matching module
// operation, and emits exactly one JSON run report on stdout. Artifact
// CSVs go to --output when given, otherwise they are embedded in the
// report payload. Exit codes: 0 success, 1 compute failure, 2 parse
// failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlab/jobio.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

dlab::Complex parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw dlab::ParseError("--s: expected RE,IM, got '" + text + "'");
  const std::string re = text.substr(0, comma);
  const std::string im = text.substr(comma + 1);
  std::size_t used = 0;
  double r = 0.0, i = 0.0;
  try {
    r = std::stod(re, &used);
    if (used != re.size()) throw std::invalid_argument(re);
    i = std::stod(im, &used);
    if (used != im.size()) throw std::invalid_argument(im);
  } catch (const std::exception&) {
    throw dlab::ParseError("--s: expected RE,IM, got '" + text + "'");
  }
  return {r, i};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw dlab::ComputeError(path + ": cannot write");
}

std::vector<double> geometric_grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (double t = lo; t <= hi; t *= step) g.push_back(t);
  return g;
}

dlab::EvalMethod method_from(const std::string& name) {
  if (name == "direct") return dlab::EvalMethod::Direct;
  if (name == "smoothed") return dlab::EvalMethod::Smoothed;
  if (name == "afe") return dlab::EvalMethod::Afe;
  return dlab::EvalMethod::EulerMaclaurin;
}

struct EvalArgs {
  std::string spec_path;
  std::string s_text = "2,0";
  std::string method = "direct";
  std::uint64_t terms = 0;  // 0: method default
  double X = 1e4;           // smoothing scale
  double x = 1e3;           // series cut for afe
  std::string output;
};

void run_eval(const EvalArgs& a, dlab::RunReport& rep) {
  const auto spec = dlab::load_spec_file(a.spec_path);
  const dlab::Complex s = parse_point(a.s_text);
  const std::string digest = dlab::spec_digest(spec);
  rep.job_digest = dlab::text_digest(
      "eval;spec=" + digest + ";s=" + fmt17(s.real()) + "," +
      fmt17(s.imag()) + ";method=" + a.method + ";terms=" +
      std::to_string(a.terms) + ";X=" + fmt17(a.X) + ";x=" + fmt17(a.x));

  const auto ab = dlab::abscissas(spec);
  if (ab.tag_a == dlab::AbscissaTag::Estimated && !ab.reliable)
    rep.warnings.push_back(
        "abscissa estimates disagree across prefix windows; treat "
        "convergence tags as provisional");

  dlab::EvaluationResult r;
  if (a.method == "direct") {
    r = dlab::eval_direct(spec, s, a.terms ? a.terms : spec.freq.size());
  } else if (a.method == "smoothed") {
    r = dlab::eval_smoothed(spec, s, a.X);
  } else if (a.method == "afe") {
    r = dlab::eval_afe(spec, s, a.x);
  } else {
    r = dlab::euler_maclaurin(
        spec, s,
        a.terms ? a.terms : std::min<std::uint64_t>(1000, spec.freq.size()));
  }
  const std::string csv =
      dlab::eval_csv({{s, r.value, r.error_estimate, a.method, r.work}});
  if (!a.output.empty()) write_file(a.output, csv);
  json payload;
  payload["csv"] = csv;
  payload["spec_digest"] = digest;
  rep.payload_json = payload.dump();
}

struct MomentArgs {
  std::string spec_path;
  std::string method = "direct";
  double sigma = 0.0;
  double T = 0.0;
};

void run_moments(const MomentArgs& a, dlab::RunReport& rep) {
  const auto spec = dlab::load_spec_file(a.spec_path);
  const std::string digest = dlab::spec_digest(spec);
  rep.job_digest = dlab::text_digest("moments;spec=" + digest + ";sigma=" +
                                     fmt17(a.sigma) + ";T=" + fmt17(a.T) +
                                     ";method=" + a.method);
  const auto mom =
      dlab::moment_quadrature(spec, a.sigma, a.T, method_from(a.method));
  if (!mom.refinement_stable)
    rep.warnings.push_back(
        "panel refinement moved the quadrature by more than 1%; value is "
        "provisional");
  rep.payload_json = dlab::moment_payload(mom, digest);
}

struct DensityArgs {
  std::string spec_path;
  double alpha = 1.0;
  double beta = 0.2;
  double xmin = 8.0;
  double xmax = 14.0;
  double xstep = 1.0;
  double tolerance = 0.05;
};

void run_density(const DensityArgs& a, dlab::RunReport& rep) {
  const auto spec = dlab::load_spec_file(a.spec_path);
  const std::string digest = dlab::spec_digest(spec);
  rep.job_digest = dlab::text_digest(
      "density;spec=" + digest + ";alpha=" + fmt17(a.alpha) + ";beta=" +
      fmt17(a.beta) + ";xmin=" + fmt17(a.xmin) + ";xmax=" + fmt17(a.xmax) +
      ";xstep=" + fmt17(a.xstep) + ";tol=" + fmt17(a.tolerance));
  if (!(a.xstep > 0.0)) throw dlab::DomainError("--xstep must be positive");
  std::vector<double> grid;
  for (double x = a.xmin; x <= a.xmax + 1e-12; x += a.xstep)
    grid.push_back(x);
  const auto rd = dlab::ddens_check(spec, a.alpha, a.beta, grid, a.tolerance);
  for (std::size_t i = 0; i < rd.x_grid.size(); ++i)
    if (rd.empty_window[i])
      rep.warnings.push_back("window at x=" + fmt17(rd.x_grid[i]) +
                             " holds no frequencies");
  rep.payload_json = dlab::ddens_payload(rd, digest);
}

struct ScanArgs {
  std::string job_path;
  std::optional<double> epsilon, T, dtau;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
};

void run_scan(const ScanArgs& a, dlab::RunReport& rep) {
  dlab::ScanJob job = dlab::load_scan_job(a.job_path);
  if (a.epsilon) job.epsilon = *a.epsilon;
  if (a.T) job.T = *a.T;
  if (a.dtau) job.dtau = *a.dtau;
  if (a.seed) job.seed = *a.seed;
  if (a.output) job.output = *a.output;

  const std::string digest = dlab::spec_digest(job.spec);
  rep.job_digest = dlab::text_digest(
      "scan;spec=" + digest + ";rect=" + fmt17(job.sigma_lo) + "," +
      fmt17(job.sigma_hi) + "," + fmt17(job.t_lo) + "," + fmt17(job.t_hi) +
      "," + fmt17(job.h) + ";eps=" + fmt17(job.epsilon) + ";T=" +
      fmt17(job.T) + ";dtau=" + fmt17(job.dtau) + ";seed=" +
      std::to_string(job.seed));

  const auto grid = dlab::make_grid(job.spec, job.sigma_lo, job.sigma_hi,
                                    job.t_lo, job.t_hi, job.h);
  const auto scan =
      dlab::tau_scan(job.spec, job.target, grid, job.epsilon, job.T, job.dtau);
  const std::string csv = dlab::scan_csv(scan.trace);
  if (!job.output.empty()) {
    write_file(job.output, csv);
    rep.payload_json =
        dlab::scan_payload(scan, digest, job.seed, job.output, false);
  } else {
    rep.payload_json = dlab::scan_payload(scan, digest, job.seed, csv, true);
  }
  if (scan.good_measure == 0.0)
    rep.warnings.push_back(
        "no tau in budget came within epsilon; scan is inconclusive, not "
        "a refutation");
}

struct RandomArgs {
  std::string model;
  std::string command;
  std::uint64_t seed = 0;
  std::uint64_t N = 10000;
  std::string s_text = "0.75,5";
  double sigma = 0.75;
};

void run_random(const RandomArgs& a, dlab::RunReport& rep) {
  const auto kind = a.model == "steinhaus" ? dlab::SignKind::Steinhaus
                                           : dlab::SignKind::Rademacher;
  rep.job_digest = dlab::text_digest(
      "random;model=" + a.model + ";seed=" + std::to_string(a.seed) + ";N=" +
      std::to_string(a.N) + ";command=" + a.command + ";s=" + a.s_text +
      ";sigma=" + fmt17(a.sigma));
  const auto inst =
      dlab::make_instance(dlab::RandomSignModel{kind, a.seed}, a.N);
  json payload;
  payload["digest"] = inst.digest();
  payload["N"] = a.N;

  if (a.command == "euler") {
    const dlab::Complex s = parse_point(a.s_text);
    const dlab::Complex v = dlab::euler_product(inst, s, a.N);
    const dlab::Complex lg = dlab::log_euler_product(inst, s, a.N);
    payload["re_s"] = s.real();
    payload["im_s"] = s.imag();
    payload["re_value"] = v.real();
    payload["im_value"] = v.imag();
    payload["re_log"] = lg.real();
    payload["im_log"] = lg.imag();
  } else if (a.command == "identity") {
    const dlab::Complex s = parse_point(a.s_text);
    const dlab::Complex lhs = dlab::log_euler_product(inst, s, a.N);
    const dlab::Complex px = dlab::eval_direct(inst.spec, s, a.N).value;
    const dlab::Complex corr = dlab::correction_series(inst, s, a.N);
    double per_prime = 0.0;
    for (std::size_t n = 1; n <= a.N; ++n) {
      const dlab::Complex w =
          inst.spec.coefficient(n) * std::exp(-s * inst.spec.freq.lambda(n));
      const dlab::Complex lf = -std::log(dlab::Complex(1.0, 0.0) - w);
      per_prime =
          std::max(per_prime, std::abs(lf - w - dlab::correction_factor(w)));
    }
    payload["re_s"] = s.real();
    payload["im_s"] = s.imag();
    payload["residual_full"] = std::abs(lhs - px - corr);
    payload["residual_per_prime_max"] = per_prime;
  } else {  // order
    const auto grid = geometric_grid(5.0, 5000.0, 1.05);
    const auto fit = dlab::order_fit(inst, a.sigma, grid);
    payload["sigma"] = a.sigma;
    payload["target"] = fit.target;
    payload["exponent"] = fit.exponent;
    payload["residuals"] = fit.residuals;
    rep.warnings.push_back(
        "order-fit pass threshold (target + 0.5) is a desk-scale "
        "convention, not a bound from theory");
  }
  rep.payload_json = payload.dump();
}

struct PrimesArgs {
  std::uint64_t limit = 0;
  std::string output;
};

void run_primes(const PrimesArgs& a, dlab::RunReport& rep) {
  rep.job_digest =
      dlab::text_digest("primes;limit=" + std::to_string(a.limit));
  const auto table = dlab::cached_primes_up_to(a.limit);
  const std::string csv = dlab::primes_csv(table);
  if (!a.output.empty()) write_file(a.output, csv);
  json payload;
  payload["count"] = table.count();
  payload["limit"] = a.limit;
  payload["csv"] = csv;
  rep.payload_json = payload.dump();
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = std::chrono::steady_clock::now();
  dlab::RunReport rep;
  int code = 0;

  CLI::App app{"numerical laboratory for general Dirichlet series"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --threads follow the subcommand
  unsigned threads = 0;
  app.add_option("--threads", threads,
                 "cap worker threads (0 uses the hardware count)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "evaluate a series at one point");
  eval->add_option("--spec", ea.spec_path, "series descriptor JSON file")
      ->required();
  eval->add_option("--s", ea.s_text, "evaluation point RE,IM")->required();
  eval->add_option("--method", ea.method, "evaluation path")
      ->check(CLI::IsMember({"direct", "smoothed", "afe", "em"}));
  eval->add_option("--terms", ea.terms,
                   "truncation (0: all cached terms; em default 1000)");
  eval->add_option("--X", ea.X, "smoothing scale for --method smoothed");
  eval->add_option("--x", ea.x, "series cut for --method afe");
  eval->add_option("--output", ea.output, "write the CSV row here as well");

  MomentArgs ma;
  auto* moments =
      app.add_subcommand("moments", "mean square along a vertical segment");
  moments->add_option("--spec", ma.spec_path, "series descriptor JSON file")
      ->required();
  moments->add_option("--sigma", ma.sigma, "real part of the line")
      ->required();
  moments->add_option("--T", ma.T, "segment length")->required();
  moments->add_option("--method", ma.method, "evaluation path")
      ->check(CLI::IsMember({"direct", "smoothed", "afe", "em"}));

  DensityArgs da;
  auto* density =
      app.add_subcommand("density", "short-window coefficient mass growth");
  density->add_option("--spec", da.spec_path, "series descriptor JSON file")
      ->required();
  density->add_option("--alpha", da.alpha, "window length scale")->required();
  density->add_option("--beta", da.beta, "allowed exponent deficit")
      ->required();
  density->add_option("--xmin", da.xmin, "first window position")->required();
  density->add_option("--xmax", da.xmax, "last window position")->required();
  density->add_option("--xstep", da.xstep, "window spacing (default 1)");
  density->add_option("--tolerance", da.tolerance,
                      "slack on the fitted exponent");

  ScanArgs sa;
  auto* scan =
      app.add_subcommand("scan", "translate scan driven by a job file");
  scan->add_option("--job", sa.job_path, "scan job JSON file")->required();
  scan->add_option("--epsilon", sa.epsilon, "override the job tolerance");
  scan->add_option("--T", sa.T, "override the scan horizon");
  scan->add_option("--dtau", sa.dtau, "override the scan step");
  scan->add_option("--seed", sa.seed, "override the job seed");
  scan->add_option("--output", sa.output, "override the CSV destination");

  RandomArgs ra;
  auto* random =
      app.add_subcommand("random", "randomized Euler product experiments");
  random->add_option("--model", ra.model, "sign model")
      ->required()
      ->check(CLI::IsMember({"steinhaus", "rademacher"}));
  random->add_option("--seed", ra.seed, "stream seed");
  random
      ->add_option("--command", ra.command,
                   "euler: product and log; identity: log product vs "
                   "series plus corrections; order: growth envelope fit")
      ->required()
      ->check(CLI::IsMember({"euler", "order", "identity"}));
  random->add_option("--N", ra.N, "number of primes in the instance");
  random->add_option("--s", ra.s_text, "evaluation point RE,IM");
  random->add_option("--sigma", ra.sigma, "line for --command order");

  PrimesArgs pa;
  auto* primes = app.add_subcommand("primes", "enumerate primes as CSV");
  primes->add_option("--limit", pa.limit, "upper bound (inclusive)")
      ->required();
  primes->add_option("--output", pa.output, "write the CSV here as well");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);  // help text, not a job run
    } catch (const CLI::ParseError& e) {
      throw dlab::ParseError(e.what());
    }
    dlab::set_thread_cap(threads);
    if (eval->parsed()) {
      rep.command = "eval";
      run_eval(ea, rep);
    } else if (moments->parsed()) {
      rep.command = "moments";
      run_moments(ma, rep);
    } else if (density->parsed()) {
      rep.command = "density";
      run_density(da, rep);
    } else if (scan->parsed()) {
      rep.command = "scan";
      run_scan(sa, rep);
    } else if (random->parsed()) {
      rep.command = "random";
      run_random(ra, rep);
    } else {
      rep.command = "primes";
      run_primes(pa, rep);
    }
  } catch (const dlab::ParseError& e) {
    rep.error_type = "ParseError";
    rep.error_message = e.what();
    code = 2;
  } catch (const std::exception& e) {
    rep.error_type = dlab::current_error_name();
    rep.error_message = e.what();
    code = 1;
  }

  if (rep.command.empty() && argc > 1 && argv[1][0] != '-')
    rep.command = argv[1];
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::cout << dlab::report_json(rep);
  return code;
}
