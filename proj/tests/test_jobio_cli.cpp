// Job parsing, payload serialization, and the command-line binary
// driven end to end through a shell. The binary path comes from the
// build system as DLAB_CLI_PATH.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dlab/jobio.hpp"
#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "dlab-cli-tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = work_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  REQUIRE(out.good());
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const auto out = work_dir() / ("stdout-" + std::to_string(counter++));
  const std::string cmd = env + (env.empty() ? "" : " ") + DLAB_CLI_PATH +
                          " " + args + " > " + out.string() + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(raw);
  r.stdout_text = slurp(out);
  return r;
}

const char* kAltSpec = R"({
  "frequency": {"kind": "poly_primes", "poly": [0, 1], "count": 500},
  "coefficients": {"kind": "alternating"}
})";

const char* kThreeTermSpec = R"({
  "frequency": {"kind": "explicit",
                "lambdas": [0.6931471805599453, 1.0986122886681098,
                            1.6094379124341003]},
  "coefficients": {"kind": "unimodular", "values": [[1,0],[1,0],[1,0]]}
})";

std::string scan_job_text(const std::string& extra = "") {
  std::string spec = kThreeTermSpec;
  return "{\"command\": \"scan\", \"spec\": " + spec +
         ", \"target\": {\"kind\": \"translate\", \"tau0\": 21.3},"
         "\"rect\": {\"sigma_lo\": 0.75, \"sigma_hi\": 0.8, \"t_lo\": 0.0,"
         "\"t_hi\": 0.2, \"h\": 0.05}, \"epsilon\": 0.1, \"T\": 50.0,"
         "\"dtau\": 0.125" +
         extra + "}";
}

}  // namespace

TEST_CASE("spec_from_json: generated and explicit descriptors") {
  auto alt = dlab::spec_from_json(kAltSpec);
  CHECK(alt.freq.size() == 500);
  CHECK(alt.coeff.kind == dlab::CoefficientKind::Alternating);
  auto ab = dlab::abscissas(alt);
  CHECK(ab.sigma_a == doctest::Approx(1.0));
  CHECK(ab.sigma_2 == doctest::Approx(0.5));
  CHECK(ab.sigma_c == doctest::Approx(0.0));

  auto three = dlab::spec_from_json(kThreeTermSpec);
  CHECK(three.freq.size() == 3);
  CHECK(three.freq.lambda(2) == doctest::Approx(std::log(3.0)));

  auto pl = dlab::spec_from_json(R"({
    "frequency": {"kind": "poly_integers", "poly": [0, 0, 1], "count": 64},
    "coefficients": {"kind": "polylog", "Q": [2, 1], "kappa": 1.5}})");
  CHECK(pl.coeff.kappa == 1.5);
  CHECK(pl.poly->degree() == 2);

  auto ov = dlab::spec_from_json(R"({
    "frequency": {"kind": "poly_primes", "poly": [0, 1], "count": 32},
    "coefficients": {"kind": "alternating"},
    "abscissas_override": {"sigma_c": 0.1, "sigma_a": 0.9, "sigma_2": 0.5}})");
  auto oab = dlab::abscissas(ov);
  CHECK(oab.sigma_a == 0.9);
  CHECK(oab.tag_a == dlab::AbscissaTag::Override);
}

TEST_CASE("spec_from_json: strict schema") {
  CHECK_THROWS_AS(dlab::spec_from_json("{"), dlab::ParseError);
  CHECK_THROWS_AS(dlab::spec_from_json("{}"), dlab::ParseError);
  // unknown fields anywhere are fatal, and the message names the field
  try {
    dlab::spec_from_json(R"({
      "frequency": {"kind": "poly_primes", "poly": [0,1], "count": 8,
                    "surprise": 1},
      "coefficients": {"kind": "alternating"}})");
    FAIL("expected ParseError");
  } catch (const dlab::ParseError& e) {
    CHECK(std::string(e.what()).find("surprise") != std::string::npos);
  }
  const char* bad[] = {
      // wrong types
      R"({"frequency": {"kind": "poly_primes", "poly": "x", "count": 8},
          "coefficients": {"kind": "alternating"}})",
      R"({"frequency": {"kind": "poly_primes", "poly": [0,1], "count": -3},
          "coefficients": {"kind": "alternating"}})",
      // unknown enumerators
      R"({"frequency": {"kind": "mystery", "poly": [0,1], "count": 8},
          "coefficients": {"kind": "alternating"}})",
      R"({"frequency": {"kind": "poly_primes", "poly": [0,1], "count": 8},
          "coefficients": {"kind": "mystery"}})",
      // alternating takes no parameters
      R"({"frequency": {"kind": "poly_primes", "poly": [0,1], "count": 8},
          "coefficients": {"kind": "alternating", "kappa": 1}})",
      // value list must match the frequency count
      R"({"frequency": {"kind": "poly_primes", "poly": [0,1], "count": 8},
          "coefficients": {"kind": "random", "values": [[1,0]]}})",
      // unimodular means modulus one
      R"({"frequency": {"kind": "explicit", "lambdas": [1.0]},
          "coefficients": {"kind": "unimodular", "values": [[2,0]]}})",
      // override must keep sigma_a on top
      R"({"frequency": {"kind": "poly_primes", "poly": [0,1], "count": 8},
          "coefficients": {"kind": "alternating"},
          "abscissas_override": {"sigma_c": 2.0, "sigma_a": 1.0,
                                 "sigma_2": 0.5}})",
  };
  for (const char* text : bad)
    CHECK_THROWS_AS(dlab::spec_from_json(text), dlab::ParseError);
}

TEST_CASE("target_from_json: all kinds plus rejection") {
  auto c = dlab::target_from_json(R"({"kind": "constant", "value": [0.1, 0]})");
  CHECK(c.kind == dlab::TargetKind::Constant);
  auto p = dlab::target_from_json(
      R"({"kind": "polynomial", "coefficients": [[1,0],[0,2]]})");
  CHECK(p.coefficients.size() == 2);
  auto e = dlab::target_from_json(
      R"({"kind": "exp_polynomial", "coefficients": [[0,0],[1,0]]})");
  CHECK(e.nonvanishing_certain());
  auto t = dlab::target_from_json(R"({"kind": "translate", "tau0": 37.0})");
  CHECK(t.tau0 == 37.0);

  CHECK_THROWS_AS(dlab::target_from_json(R"({"kind": "spline"})"),
                  dlab::ParseError);
  CHECK_THROWS_AS(
      dlab::target_from_json(R"({"kind": "translate", "tau0": 1, "z": 2})"),
      dlab::ParseError);
}

TEST_CASE("scan_job_from_json: round trip and command gate") {
  auto job = dlab::scan_job_from_json(scan_job_text(", \"seed\": 7"));
  CHECK(job.T == 50.0);
  CHECK(job.dtau == 0.125);
  CHECK(job.seed == 7);
  CHECK(job.spec.freq.size() == 3);
  CHECK(job.target.kind == dlab::TargetKind::Translate);

  // a job without a command is malformed
  std::string no_cmd = scan_job_text();
  no_cmd.replace(no_cmd.find("\"command\": \"scan\", "), 19, "");
  CHECK_THROWS_AS(dlab::scan_job_from_json(no_cmd), dlab::ParseError);
  CHECK_THROWS_AS(dlab::scan_job_from_json(scan_job_text(", \"x\": 1")),
                  dlab::ParseError);
}

TEST_CASE("csv serialization: 17 digits round trip") {
  dlab::EvalRow row;
  row.s = {0.8, 30.0};
  row.value = {0.1234567890123456789, -3.14159265358979323846};
  row.err = 1.0 / 3.0;
  row.method = "direct";
  row.terms = 42;
  const std::string csv = dlab::eval_csv({row});
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "re_s,im_s,re_val,im_val,err,method,terms");
  std::getline(in, line);
  double re_s, im_s, re_v, im_v, err;
  char method[16];
  long terms;
  REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%15[^,],%ld", &re_s,
                      &im_s, &re_v, &im_v, &err, method, &terms) == 7);
  CHECK(re_v == row.value.real());  // bit-exact round trip
  CHECK(im_v == row.value.imag());
  CHECK(err == row.err);
  CHECK(std::string(method) == "direct");
  CHECK(terms == 42);
}

TEST_CASE("digests: stable and input-sensitive") {
  auto a = dlab::spec_from_json(kAltSpec);
  auto b = dlab::spec_from_json(kAltSpec);
  CHECK(dlab::spec_digest(a) == dlab::spec_digest(b));
  auto c = dlab::spec_from_json(R"({
    "frequency": {"kind": "poly_primes", "poly": [0, 1], "count": 501},
    "coefficients": {"kind": "alternating"}})");
  CHECK(dlab::spec_digest(a) != dlab::spec_digest(c));
  CHECK(dlab::text_digest("x") != dlab::text_digest("y"));
  CHECK(dlab::text_digest("x") == dlab::text_digest("x"));
}

TEST_CASE("report_json: envelope embeds payload and error") {
  dlab::RunReport rep;
  rep.command = "eval";
  rep.job_digest = "abc";
  rep.payload_json = R"({"k": 1})";
  auto j = nlohmann::json::parse(dlab::report_json(rep));
  CHECK(j["command"] == "eval");
  CHECK(j["payload"]["k"] == 1);
  CHECK(j["tool_version"] == dlab::kToolVersion);
  CHECK_FALSE(j.contains("error"));

  rep.payload_json.clear();
  rep.error_type = "ParseError";
  rep.error_message = "nope";
  j = nlohmann::json::parse(dlab::report_json(rep));
  CHECK(j["error"]["type"] == "ParseError");
  CHECK_FALSE(j.contains("payload"));
}

TEST_CASE("cli: primes limit 100 gives 25 rows") {
  auto r = run_cli("primes --limit 100");
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j["payload"]["count"] == 25);
  const std::string csv = j["payload"]["csv"];
  // header plus 25 data rows
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);
  CHECK(csv.rfind("25,97,") != std::string::npos);
}

TEST_CASE("cli: eval row matches the module value bit for bit") {
  const auto spec_path = write_temp("alt.json", kAltSpec);
  auto r = run_cli("eval --spec " + spec_path + " --s 1.5,0");
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.stdout_text);
  const std::string csv = j["payload"]["csv"];

  auto spec = dlab::spec_from_json(kAltSpec);
  const auto want = dlab::eval_direct(spec, {1.5, 0.0}, 500);
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  double re_s, im_s, re_v, im_v, err;
  REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &re_s, &im_s, &re_v,
                      &im_v, &err) == 5);
  CHECK(re_v == want.value.real());
  CHECK(im_v == want.value.imag());
  CHECK(err == want.error_estimate);
}

TEST_CASE("cli: malformed jobs exit 2 with an embedded ParseError") {
  auto r = run_cli("eval --spec /nonexistent.json --s 2,0");
  CHECK(r.exit_code == 2);
  auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j["error"]["type"] == "ParseError");

  const auto job_path = write_temp("nocmd.json", [] {
    std::string t = scan_job_text();
    t.replace(t.find("\"command\": \"scan\", "), 19, "");
    return t;
  }());
  r = run_cli("scan --job " + job_path);
  CHECK(r.exit_code == 2);
  j = nlohmann::json::parse(r.stdout_text);
  CHECK(j["error"]["type"] == "ParseError");
  CHECK(std::string(j["error"]["message"]).find("command") !=
        std::string::npos);

  r = run_cli("eval --spec missing-the-point");
  CHECK(r.exit_code == 2);  // --s is required

  r = run_cli("");
  CHECK(r.exit_code == 2);  // a subcommand is required
}

TEST_CASE("cli: compute failures exit 1 and name the error") {
  const auto spec_path = write_temp("alt2.json", kAltSpec);
  // smoothed weights diverge left of the square-summability line
  auto r = run_cli("eval --spec " + spec_path + " --s 0.4,0 --method smoothed");
  CHECK(r.exit_code == 1);
  auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j["error"]["type"] == "DivergenceError");
  CHECK(j.contains("payload") == false);
}

TEST_CASE("cli: reruns and thread counts leave the payload unchanged") {
  const auto job_path = write_temp("scan.json", scan_job_text());
  auto a = run_cli("scan --job " + job_path);
  auto b = run_cli("scan --job " + job_path);
  auto c = run_cli("scan --job " + job_path + " --threads 1");
  auto d = run_cli("scan --job " + job_path + " --threads 4");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  REQUIRE(c.exit_code == 0);
  REQUIRE(d.exit_code == 0);
  const auto pa = nlohmann::json::parse(a.stdout_text)["payload"];
  const auto pb = nlohmann::json::parse(b.stdout_text)["payload"];
  const auto pc = nlohmann::json::parse(c.stdout_text)["payload"];
  const auto pd = nlohmann::json::parse(d.stdout_text)["payload"];
  CHECK(pa.dump() == pb.dump());
  CHECK(pa.dump() == pc.dump());
  CHECK(pa.dump() == pd.dump());
  CHECK(pa["best_tau"] == 21.25);
}

TEST_CASE("cli: scan flags override job-file fields") {
  const auto job_path = write_temp("scan2.json", scan_job_text());
  auto r = run_cli("scan --job " + job_path + " --T 30 --dtau 0.25");
  REQUIRE(r.exit_code == 0);
  auto p = nlohmann::json::parse(r.stdout_text)["payload"];
  CHECK(p["T"] == 30.0);
  CHECK(p["dtau"] == 0.25);
}

TEST_CASE("cli: scan --output writes the trace CSV to a file") {
  const auto job_path = write_temp("scan3.json", scan_job_text());
  const auto csv_path = (work_dir() / "trace.csv").string();
  auto r = run_cli("scan --job " + job_path + " --T 10 --output " + csv_path);
  REQUIRE(r.exit_code == 0);
  auto p = nlohmann::json::parse(r.stdout_text)["payload"];
  CHECK(p["output"] == csv_path);
  CHECK_FALSE(p.contains("csv"));
  const std::string csv = slurp(csv_path);
  CHECK(csv.rfind("tau,sup_distance\n", 0) == 0);
  // header plus floor(10 / 0.125) + 1 scanned points
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 82);
}

TEST_CASE("cli: random identity payload carries tiny residuals") {
  auto r = run_cli(
      "random --model steinhaus --seed 0 --command identity --N 2000");
  REQUIRE(r.exit_code == 0);
  auto p = nlohmann::json::parse(r.stdout_text)["payload"];
  CHECK(double(p["residual_full"]) <= 1e-10);
  CHECK(double(p["residual_per_prime_max"]) <= 1e-13);
  CHECK(std::string(p["digest"]).rfind("steinhaus:", 0) == 0);
}

TEST_CASE("cli: prime cache round trips through DLAB_CACHE_DIR") {
  const auto cache = work_dir() / "cache";
  fs::remove_all(cache);
  const std::string env = "DLAB_CACHE_DIR=" + cache.string();
  auto a = run_cli("primes --limit 50000", env);
  REQUIRE(a.exit_code == 0);
  CHECK(fs::exists(cache / "primes_le_50000.bin"));
  auto b = run_cli("primes --limit 50000", env);
  REQUIRE(b.exit_code == 0);
  CHECK(nlohmann::json::parse(a.stdout_text)["payload"].dump() ==
        nlohmann::json::parse(b.stdout_text)["payload"].dump());
}
