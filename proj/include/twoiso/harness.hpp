#ifndef TWOISO_HARNESS_HPP
#define TWOISO_HARNESS_HPP

// Command-line driver pieces: configuration, the convergence sweep,
// the stored-operator verification suite and report emission.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "twoiso/constructions.hpp"
#include "twoiso/error.hpp"
#include "twoiso/generators.hpp"
#include "twoiso/io.hpp"
#include "twoiso/linalg.hpp"
#include "twoiso/operators.hpp"
#include "twoiso/random.hpp"
#include "twoiso/space.hpp"

namespace twoiso {

enum class Command { Theorem1, Theorem2, Sweep, Verify };
enum class Construction { Theorem1, Theorem2 };
enum class OutputFormat { Csv, Report };

struct RunConfig {
  Command command = Command::Theorem2;
  std::size_t dim_h = 0;
  std::size_t dim_f = 4;
  std::vector<std::size_t> n_list{2, 4, 8, 16};
  std::string family_spec = "svd-random";
  Family family = family::SvdRandom{0};
  std::uint64_t seed = 0;
  std::size_t capacity = 0;
  double tol_build = 1e-12;
  double tol_verify = 1e-9;
  double tol_defect = 1e-8;
  std::size_t samples = 200;
  std::string out;
  OutputFormat format = OutputFormat::Csv;
  std::string input;
  Construction construction = Construction::Theorem2;
  std::optional<double> epsilon;
  bool rotate = false;
  bool timing = true;
  std::vector<std::string> expect;

  ConstructionParams params() const {
    ConstructionParams p;
    p.epsilon = epsilon;
    p.tol_build = tol_build;
    p.tol_verify = tol_verify;
    p.tol_defect = tol_defect;
    p.samples = samples;
    p.seed = seed;
    return p;
  }
};

/// Thrown by parse_config for --help; carries the help text.
struct HelpRequested {
  std::string text;
};

inline Family parse_family(const std::string& spec, std::uint64_t seed) {
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::UsageError, "--family '" + spec + "': " + why);
  };
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw bad("'" + s + "' is not a number");
    }
    if (used != s.size()) throw bad("'" + s + "' is not a number");
    return v;
  };
  if (spec == "svd-random") return family::SvdRandom{seed};
  if (spec == "id-plus-psd") return family::IdentityPlusPsd{seed};
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw bad("expected scalar:<t>, diag:<d1,...>, svd-random or id-plus-psd");
  const std::string head = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (head == "scalar") {
    const double t = number(rest);
    if (!(t >= 1.0)) throw bad("scalar must be >= 1");
    return family::Scalar{t};
  }
  if (head == "diag") {
    family::Diagonal d;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) d.d.push_back(number(item));
    if (d.d.empty()) throw bad("empty diagonal");
    for (double v : d.d) {
      if (!(v >= 1.0)) throw bad("diagonal entries must be >= 1");
    }
    return d;
  }
  throw bad("unknown family '" + head + "'");
}

inline RunConfig parse_config(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"Constructs 2-isometric approximants of expansive operators and certifies their bounds.", "twoiso"};
  std::string command;
  std::size_t dim_h = 0;
  std::string format = "csv";
  std::string construction = "theorem2";
  double epsilon = 0.0;
  bool no_timing = false;

  app.add_option("command", command, "theorem1 | theorem2 | sweep | verify")
      ->required()
      ->check(CLI::IsMember({"theorem1", "theorem2", "sweep", "verify"}));
  app.add_option("--dim-h", dim_h, "dimension of the truncated H")->check(CLI::PositiveNumber);
  app.add_option("--dim-f", cfg.dim_f, "dimension of F")->check(CLI::PositiveNumber);
  app.add_option("--n", cfg.n_list, "comma-separated list of dim F for sweep")->delimiter(',');
  app.add_option("--family", cfg.family_spec, "scalar:<t> | diag:<d1,d2,...> | svd-random | id-plus-psd");
  app.add_option("--seed", cfg.seed, "64-bit seed");
  app.add_option("--capacity", cfg.capacity, "coordinate budget (default 64*dim-h)")->check(CLI::PositiveNumber);
  app.add_option("--tol-build", cfg.tol_build, "construction tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-verify", cfg.tol_verify, "verification tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-defect", cfg.tol_defect, "relative defect threshold")->check(CLI::PositiveNumber);
  app.add_option("--samples", cfg.samples, "random samples per certificate")->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out, "output path (stdout when absent)");
  app.add_option("--format", format, "csv | report")->check(CLI::IsMember({"csv", "report"}));
  app.add_option("--input", cfg.input, "operator file (verify; optional T for theorem2)");
  app.add_option("--construction", construction, "sweep construction: theorem1 | theorem2")
      ->check(CLI::IsMember({"theorem1", "theorem2"}));
  app.add_option("--epsilon", epsilon, "override epsilon (default 1/dim F)")->check(CLI::Range(0.0, 1.0));
  app.add_flag("--rotate", cfg.rotate, "draw F from a seeded random ONB instead of the standard basis");
  app.add_flag("--no-timing", no_timing, "write wall_ms as 0 for byte-reproducible reports");
  app.add_option("--expect", cfg.expect, "verify: properties that must hold")
      ->delimiter(',')
      ->check(CLI::IsMember({"isometry", "2-isometry", "3-isometry", "expansive"}));
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::UsageError, e.what());
  }

  if (command == "theorem1") cfg.command = Command::Theorem1;
  else if (command == "theorem2") cfg.command = Command::Theorem2;
  else if (command == "sweep") cfg.command = Command::Sweep;
  else cfg.command = Command::Verify;
  cfg.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Report;
  cfg.construction = construction == "theorem1" ? Construction::Theorem1 : Construction::Theorem2;
  cfg.timing = !no_timing;
  if (app.count("--epsilon") > 0) {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::UsageError, "--epsilon must lie in (0, 1]");
    cfg.epsilon = epsilon;
  }
  if (cfg.n_list.empty()) throw Error(ErrorCode::UsageError, "--n: empty list");
  for (std::size_t n : cfg.n_list) {
    if (n == 0) throw Error(ErrorCode::UsageError, "--n: entries must be positive");
  }
  std::sort(cfg.n_list.begin(), cfg.n_list.end());
  cfg.n_list.erase(std::unique(cfg.n_list.begin(), cfg.n_list.end()), cfg.n_list.end());

  cfg.family = parse_family(cfg.family_spec, cfg.seed);

  const std::size_t needed = cfg.command == Command::Sweep ? cfg.n_list.back() : cfg.dim_f;
  if (app.count("--dim-h") > 0) {
    cfg.dim_h = dim_h;
  } else if (!cfg.input.empty()) {
    cfg.dim_h = 0;  // taken from the operator file
  } else {
    cfg.dim_h = cfg.command == Command::Sweep ? needed : 2 * needed;
  }
  if (cfg.dim_h != 0) {
    if (cfg.command == Command::Sweep && needed > cfg.dim_h) {
      throw Error(ErrorCode::UsageError,
                  "--n: largest entry " + std::to_string(needed) + " exceeds --dim-h " + std::to_string(cfg.dim_h));
    }
    if (cfg.command != Command::Sweep && cfg.command != Command::Verify && cfg.dim_f > cfg.dim_h) {
      throw Error(ErrorCode::UsageError,
                  "--dim-f " + std::to_string(cfg.dim_f) + " exceeds --dim-h " + std::to_string(cfg.dim_h));
    }
  }
  if (cfg.command == Command::Verify && cfg.input.empty()) {
    throw Error(ErrorCode::UsageError, "--input is required for verify");
  }
  const bool theorem1 = cfg.command == Command::Theorem1 ||
                        (cfg.command == Command::Sweep && cfg.construction == Construction::Theorem1);
  if (theorem1 && !cfg.input.empty()) {
    throw Error(ErrorCode::UsageError, "--input does not apply to the Brownian-unitary construction");
  }
  if (cfg.command != Command::Verify && !cfg.expect.empty()) {
    throw Error(ErrorCode::UsageError, "--expect only applies to verify");
  }
  if (cfg.capacity == 0 && cfg.dim_h != 0) cfg.capacity = 64 * cfg.dim_h;
  return cfg;
}

inline RunConfig parse_config(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"twoiso"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_config(static_cast<int>(argv.size()), argv.data());
}

struct SweepRow {
  std::size_t n = 0;
  double epsilon = 0.0;
  double norm_T = 0.0;
  double bound_theoretical = 0.0;
  double bound_measured = 0.0;
  double defect_max = 0.0;
  double expansivity_min = 0.0;
  double orthogonality_max = 0.0;
  double wall_ms = 0.0;
  std::optional<std::string> failure;
  bool passed = false;
};

inline SweepRow row_from_certificate(const Certificate& c, double wall_ms) {
  SweepRow r;
  r.n = c.n;
  r.epsilon = c.epsilon;
  r.norm_T = c.operator_norm_T;
  r.bound_theoretical = c.bound_theoretical;
  r.bound_measured = c.bound_measured;
  r.defect_max = c.defect_report.relative();
  r.expansivity_min = c.expansivity_min;
  r.orthogonality_max = c.orthogonality_max;
  r.wall_ms = wall_ms;
  r.passed = c.passed();
  return r;
}

/// Orthonormal basis of H whose leading n vectors span the nested F_n.
inline std::vector<Vector> net_basis(std::size_t dim_h, bool rotate, std::uint64_t seed) {
  std::vector<Vector> basis;
  basis.reserve(dim_h);
  if (rotate) {
    Rng rng(seed + 0x5bd1e995ULL);
    return rng.orthonormal_set(dim_h, dim_h);
  }
  for (std::size_t i = 0; i < dim_h; ++i) basis.push_back(Vector::unit(dim_h, i));
  return basis;
}

inline DenseOperator operator_for(const RunConfig& cfg) {
  if (!cfg.input.empty()) return read_operator_file(cfg.input);
  return expansive_generator(cfg.dim_h, cfg.family);
}

inline Certificate run_theorem1_once(const RunConfig& cfg, std::span<const Vector> f) {
  auto space = std::make_shared<AmbientSpace>(cfg.capacity);
  space->allocate_labeled("H", cfg.dim_h);
  const auto params = cfg.params();
  auto res = theorem1_construct(f, space, params);
  return theorem1_certificate(res.block, res.trace, f, params, *space);
}

inline Certificate run_theorem2_once(const RunConfig& cfg, const DenseOperator& t, std::span<const Vector> f) {
  const std::size_t capacity = cfg.capacity != 0 ? cfg.capacity : 64 * t.rows();
  auto space = std::make_shared<AmbientSpace>(capacity);
  return theorem2_construct(t, f, space, cfg.params()).certificate;
}

inline Certificate run_single(const RunConfig& cfg) {
  if (cfg.command == Command::Theorem1) {
    const auto basis = net_basis(cfg.dim_h, cfg.rotate, cfg.seed);
    return run_theorem1_once(cfg, std::span<const Vector>(basis.data(), cfg.dim_f));
  }
  const DenseOperator t = operator_for(cfg);
  if (!t.square()) throw Error(ErrorCode::UsageError, "--input: T must be square");
  if (cfg.dim_f > t.rows()) {
    throw Error(ErrorCode::UsageError,
                "--dim-f " + std::to_string(cfg.dim_f) + " exceeds operator dimension " + std::to_string(t.rows()));
  }
  const auto basis = net_basis(t.rows(), cfg.rotate, cfg.seed);
  return run_theorem2_once(cfg, t, std::span<const Vector>(basis.data(), cfg.dim_f));
}

/// One row per n in increasing order over the nested chain F_n; a failing
/// construction yields a row marked failed instead of aborting the sweep.
inline std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  std::vector<SweepRow> rows;
  std::optional<DenseOperator> t;
  std::size_t dim_h = cfg.dim_h;
  if (cfg.construction == Construction::Theorem2) {
    t = operator_for(cfg);
    dim_h = t->rows();
  }
  const auto basis = net_basis(dim_h, cfg.rotate, cfg.seed);
  for (std::size_t n : cfg.n_list) {
    const auto start = std::chrono::steady_clock::now();
    SweepRow row;
    try {
      if (n > dim_h) throw Error(ErrorCode::InvalidArgument, "n exceeds dim H");
      const std::span<const Vector> f(basis.data(), n);
      const Certificate c = cfg.construction == Construction::Theorem1 ? run_theorem1_once(cfg, f)
                                                                        : run_theorem2_once(cfg, *t, f);
      row = row_from_certificate(c, 0.0);
    } catch (const Error& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row = SweepRow{n, nan, nan, nan, nan, nan, nan, nan, 0.0, std::string(e.what()), false};
    }
    if (cfg.timing) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline constexpr const char* kCsvHeader =
    "n,epsilon,norm_T,bound_theoretical,bound_measured,defect_max,expansivity_min,orthogonality_max,wall_ms";

inline void write_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.n << ',' << format_real(r.epsilon) << ',' << format_real(r.norm_T) << ','
       << format_real(r.bound_theoretical) << ',' << format_real(r.bound_measured) << ',' << format_real(r.defect_max)
       << ',' << format_real(r.expansivity_min) << ',' << format_real(r.orthogonality_max) << ','
       << format_real(r.wall_ms) << '\n';
  }
}

/// Parses CSV written by write_csv. Rows with NaN fields come back marked failed.
inline std::vector<SweepRow> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw Error(ErrorCode::IoError, "missing or wrong CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw Error(ErrorCode::IoError, "CSV row with " + std::to_string(cells.size()) + " fields");
    SweepRow r;
    try {
      r.n = std::stoull(cells[0]);
      double* fields[] = {&r.epsilon,         &r.norm_T,          &r.bound_theoretical,
                          &r.bound_measured,  &r.defect_max,      &r.expansivity_min,
                          &r.orthogonality_max, &r.wall_ms};
      for (std::size_t k = 0; k < 8; ++k) *fields[k] = std::strtod(cells[k + 1].c_str(), nullptr);
    } catch (const std::exception&) {
      throw Error(ErrorCode::IoError, "malformed CSV row: " + line);
    }
    if (std::isnan(r.bound_measured)) r.failure = "failed";
    rows.push_back(r);
  }
  return rows;
}

inline nlohmann::json certificate_to_json(const Certificate& c) {
  return {{"n", c.n},
          {"epsilon", c.epsilon},
          {"operator_norm_T", c.operator_norm_T},
          {"bound_theoretical", c.bound_theoretical},
          {"bound_measured", c.bound_measured},
          {"defect_report",
           {{"m", c.defect_report.m},
            {"samples", c.defect_report.samples},
            {"max_abs_defect", c.defect_report.max_abs_defect},
            {"scale", c.defect_report.scale},
            {"relative", c.defect_report.relative()}}},
          {"expansivity_min", c.expansivity_min},
          {"orthogonality_max", c.orthogonality_max},
          {"residual_identity_max", c.residual_identity_max},
          {"hypothesis_residual", c.hypothesis_residual},
          {"operator_norm_block", c.operator_norm_block},
          {"passed", c.passed()}};
}

inline nlohmann::json row_to_json(const SweepRow& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j = {{"n", r.n},
                      {"epsilon", num(r.epsilon)},
                      {"norm_T", num(r.norm_T)},
                      {"bound_theoretical", num(r.bound_theoretical)},
                      {"bound_measured", num(r.bound_measured)},
                      {"defect_max", num(r.defect_max)},
                      {"expansivity_min", num(r.expansivity_min)},
                      {"orthogonality_max", num(r.orthogonality_max)},
                      {"wall_ms", num(r.wall_ms)},
                      {"passed", r.passed}};
  if (r.failure) j["failure"] = *r.failure;
  return j;
}

inline void emit_report(std::span<const SweepRow> rows, OutputFormat format, const std::string& path) {
  with_output(path, [&](std::ostream& os) {
    if (format == OutputFormat::Csv) {
      write_csv(os, rows);
    } else {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows) arr.push_back(row_to_json(r));
      os << arr.dump(2) << '\n';
    }
  });
}

inline void emit_report(const Certificate& c, OutputFormat format, const std::string& path, double wall_ms = 0.0) {
  if (format == OutputFormat::Csv) {
    const SweepRow row = row_from_certificate(c, wall_ms);
    emit_report(std::span<const SweepRow>(&row, 1), format, path);
    return;
  }
  with_output(path, [&](std::ostream& os) { os << certificate_to_json(c).dump(2) << '\n'; });
}

struct VerifyReport {
  std::size_t dim = 0;
  double operator_norm = 0.0;
  double min_singular_value = 0.0;
  double compression_min = 0.0;      // min eigenvalue of compressed Grams over random S
  double defect_relative[3] = {};    // orders 1, 2, 3
  bool isometry = false;
  bool two_isometry = false;
  bool three_isometry = false;
  bool expansive = false;
  bool all_expected = true;
};

/// Defect suites of orders 1, 2, 3 and the expansivity suite on a stored operator.
inline VerifyReport run_verify(const RunConfig& cfg) {
  const DenseOperator a = read_operator_file(cfg.input);
  if (!a.square()) throw Error(ErrorCode::UsageError, "--input: operator must be square");
  VerifyReport rep;
  rep.dim = a.rows();
  rep.operator_norm = a.operator_norm();
  rep.min_singular_value = min_singular_value(a.matrix());

  Rng rng(cfg.seed);
  std::vector<Vector> samples;
  for (std::size_t s = 0; s < cfg.samples; ++s) samples.push_back(rng.unit_vector(rep.dim));
  for (int m = 1; m <= 3; ++m) {
    rep.defect_relative[m - 1] = defect_suite(a, std::span<const Vector>(samples), m, rep.operator_norm).relative();
  }
  rep.compression_min = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 20; ++s) {
    const auto onb = rng.orthonormal_set(rep.dim, std::min<std::size_t>(6, rep.dim));
    rep.compression_min =
        std::min(rep.compression_min, hermitian_eig(compressed_gram(a, std::span<const Vector>(onb))).values.back());
  }
  rep.isometry = rep.defect_relative[0] <= cfg.tol_defect;
  rep.two_isometry = rep.defect_relative[1] <= cfg.tol_defect;
  rep.three_isometry = rep.defect_relative[2] <= cfg.tol_defect;
  rep.expansive = rep.min_singular_value >= 1.0 - cfg.tol_verify && rep.compression_min >= 1.0 - cfg.tol_verify;
  for (const auto& e : cfg.expect) {
    const bool ok = e == "isometry"     ? rep.isometry
                    : e == "2-isometry" ? rep.two_isometry
                    : e == "3-isometry" ? rep.three_isometry
                                        : rep.expansive;
    rep.all_expected = rep.all_expected && ok;
  }
  return rep;
}

inline nlohmann::json verify_to_json(const VerifyReport& r) {
  return {{"dim", r.dim},
          {"operator_norm", r.operator_norm},
          {"min_singular_value", r.min_singular_value},
          {"compression_min_eigenvalue", r.compression_min},
          {"defect_relative", {{"m1", r.defect_relative[0]}, {"m2", r.defect_relative[1]}, {"m3", r.defect_relative[2]}}},
          {"isometry", r.isometry},
          {"2-isometry", r.two_isometry},
          {"3-isometry", r.three_isometry},
          {"expansive", r.expansive},
          {"expectations_met", r.all_expected}};
}

/// Runs the configured command and returns the process exit code.
inline int run(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Theorem1:
    case Command::Theorem2: {
      const auto start = std::chrono::steady_clock::now();
      const Certificate c = run_single(cfg);
      const double ms =
          cfg.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() : 0.0;
      emit_report(c, cfg.format, cfg.out, ms);
      return c.passed() ? 0 : 1;
    }
    case Command::Sweep: {
      const auto rows = run_sweep(cfg);
      emit_report(rows, cfg.format, cfg.out);
      bool ok = true;
      for (const auto& r : rows) {
        if (r.failure) std::cerr << "row n=" << r.n << " failed: " << *r.failure << '\n';
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
    case Command::Verify: {
      const VerifyReport rep = run_verify(cfg);
      with_output(cfg.out, [&](std::ostream& os) { os << verify_to_json(rep).dump(2) << '\n'; });
      return rep.all_expected ? 0 : 1;
    }
  }
  return 2;
}

}  // namespace twoiso

#endif  // TWOISO_HARNESS_HPP
