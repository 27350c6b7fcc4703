#pragma once

// Job and spec descriptors (JSON in, strict schema, unknown fields
// rejected), deterministic payload serialization (key-sorted JSON, CSV
// at 17 significant digits), and the run-report envelope the command
// line emits exactly once per invocation.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dlab/estimates.hpp"
#include "dlab/primes.hpp"
#include "dlab/random_model.hpp"
#include "dlab/series.hpp"
#include "dlab/universality.hpp"

namespace dlab {

// Series descriptor:
//   {"frequency": {"kind": "poly_primes" | "poly_integers", "poly": [..],
//                  "count": N}
//      or          {"kind": "explicit", "lambdas": [..]},
//    "coefficients": {"kind": "alternating"}
//      or            {"kind": "polylog", "Q": [..], "kappa": k}
//      or            {"kind": "unimodular" | "random",
//                     "values": [[re, im], ..]},
//    "abscissas_override": {"sigma_c": .., "sigma_a": .., "sigma_2": ..}}
// The override block is optional; everything else is required for its
// branch and nothing further is accepted.
DirichletSeriesSpec spec_from_json(const std::string& text);
DirichletSeriesSpec load_spec_file(const std::string& path);

// Target descriptor: {"kind": "constant", "value": [re, im]} |
// {"kind": "polynomial" | "exp_polynomial", "coefficients": [[re, im],..]}
// | {"kind": "translate", "tau0": t}.
TargetFunction target_from_json(const std::string& text);

struct ScanJob {
  DirichletSeriesSpec spec;
  TargetFunction target;
  double sigma_lo = 0.0, sigma_hi = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  double h = 0.0;
  double epsilon = 0.0;
  double T = 0.0;
  double dtau = 0.0;
  std::uint64_t seed = 0;
  std::string output;  // CSV destination; empty embeds the CSV in the report
};

// Scan job file: {"command": "scan", "spec": {..}, "target": {..},
// "rect": {"sigma_lo","sigma_hi","t_lo","t_hi","h"}, "epsilon", "T",
// "dtau", "seed", "output"} with seed and output optional.
ScanJob scan_job_from_json(const std::string& text);
ScanJob load_scan_job(const std::string& path);

std::string spec_digest(const DirichletSeriesSpec& spec);
std::string text_digest(const std::string& text);

struct EvalRow {
  Complex s;
  Complex value;
  double err = 0.0;
  std::string method;
  std::int64_t terms = 0;
};

std::string eval_csv(const std::vector<EvalRow>& rows);
std::string scan_csv(const std::vector<std::pair<double, double>>& trace);
std::string primes_csv(const PrimeTable& table);

std::string moment_payload(const MomentReport& rep, const std::string& digest);
std::string ddens_payload(const DdensReport& rep, const std::string& digest);
std::string scan_payload(const TauScanReport& rep, const std::string& digest,
                         std::uint64_t seed, const std::string& csv_or_path,
                         bool embedded);

struct RunReport {
  std::string command;
  std::string job_digest;
  std::string tool_version = kToolVersion;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
  std::string payload_json;  // JSON object text; empty when the run failed
  std::string error_type;    // empty on success
  std::string error_message;
};

// Envelope serialization; the payload is embedded as a JSON object, and
// wall_seconds is the only field that varies between identical runs.
std::string report_json(const RunReport& rep);

// Name of the in-flight exception; call inside a catch block.
std::string current_error_name();

// DLAB_CACHE_DIR, or empty when unset.
std::string cache_directory();

// Sieve with a flat-file cache in DLAB_CACHE_DIR when that is set.
PrimeTable cached_primes_up_to(std::uint64_t limit);

}  // namespace dlab
