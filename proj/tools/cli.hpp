#pragma once

// latinbal command-line frontend. `run` takes the full argument list
// (program name first) and returns the process exit code:
//   0 ok, 2 validation, 3 parse, 4 timeout, 5 verification or search failure.

#include <latinbal/anneal.hpp>
#include <latinbal/certify.hpp>
#include <latinbal/core.hpp>
#include <latinbal/enumerate.hpp>
#include <latinbal/io.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace latinbal::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kParse = 3,
  kTimeout = 4,
  kFailure = 5,
};

/// Environment variable holding the default thread count.
inline constexpr const char* kThreadsEnv = "LATINBAL_THREADS";
/// Perfect-permutation enumeration refuses larger orders without --force.
inline constexpr int kEnumPerfectGuard = 17;

inline int default_threads() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return 1;
}

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError: return kParse;
    case ErrorCode::InvariantViolation: return kFailure;
    default: return kValidation;
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::ParseError, "cannot write " + path);
  file << text;
}

inline std::uint64_t fresh_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

struct Globals {
  int threads = default_threads();
  std::string format = "text";
  bool json() const { return format == "json"; }
};

// ---------------------------------------------------------------------------

inline int cmd_imbalance(const Globals& g, const std::string& path, Streams io) {
  const auto doc = io::load_square(io::read_file(path));
  const auto report = imbalance(doc.square);
  const Int n = report.n;
  const bool sum_ok = report.distance_sum == fixed_distance_sum(n);
  if (g.json()) {
    io::Json out;
    out["n"] = report.n;
    out["imbalance3"] = report.imbalance3;
    out["I"] = report.imbalance();
    out["pair_count"] = report.pair_count;
    out["distance_sum"] = report.distance_sum;
    out["all_even"] = report.all_even;
    out["fixed_sum_ok"] = sum_ok;
    if (is_one_mod_three(n)) {
      out["lower_bound3"] = report.lower_bound3;
      out["gap3"] = report.gap3;
    }
    io.out << out.dump(2) << "\n";
  } else {
    io.out << "n = " << report.n << "\n"
           << "imbalance3 = " << report.imbalance3 << "\n"
           << "I = " << report.imbalance() << "\n"
           << "parity: " << (report.all_even ? "ok (every row distance even)" : "VIOLATED") << "\n"
           << "fixed sum: " << (sum_ok ? "ok" : "VIOLATED") << " (" << report.distance_sum
           << ", expected " << fixed_distance_sum(n) << ")\n";
    if (is_one_mod_three(n))
      io.out << "lower bound I* = " << format_thirds(report.lower_bound3) << ", gap = "
             << format_thirds(report.gap3) << "\n";
  }
  return report.all_even && sum_ok ? kOk : kFailure;
}

struct EnumPpArgs {
  int n = 0;
  bool count_only = false;
  bool force = false;
  std::optional<double> timeout;
  std::string output;
};

inline int cmd_enum_pp(const Globals& g, const EnumPpArgs& args, Streams io) {
  if (args.n > kEnumPerfectGuard && !args.force) {
    io.err << "refusing n = " << args.n << ": exhaustive search beyond n = " << kEnumPerfectGuard
           << " does not finish in practical time (pass --force to try anyway)\n";
    return kValidation;
  }
  EnumerationTask task;
  task.n = args.n;
  task.mode = EnumerationMode::PerfectPermutations;
  task.count_only = args.count_only;
  task.time_limit_seconds = args.timeout;
  task.thread_count = g.threads;

  std::optional<std::ofstream> file;
  if (!args.output.empty()) {
    file.emplace(args.output, std::ios::binary);
    if (!*file) throw Error(ErrorCode::ParseError, "cannot write " + args.output);
  }
  std::ostream& items = file ? static_cast<std::ostream&>(*file) : io.out;
  // Items on stdout push the summary to stderr to keep stdout JSON-lines.
  std::ostream& summary = !args.count_only && !file ? io.err : io.out;

  const auto result = enumerate_perfect(task, [&](const Permutation& sigma) {
    if (!args.count_only) items << io::to_json(io::PermutationDocument{sigma, io::Json::object()}).dump() << "\n";
  });

  if (g.json()) {
    io::Json out;
    out["n"] = result.n;
    out["total"] = result.total_count;
    out["canonical"] = result.canonical_count;
    out["exhausted"] = result.exhausted;
    out["elapsed_seconds"] = result.elapsed_seconds;
    summary << out.dump() << "\n";
  } else {
    summary << "total=" << result.total_count << " canonical=" << result.canonical_count
            << (result.exhausted ? "" : " (timeout, partial)") << "\n";
  }
  return result.exhausted ? kOk : kTimeout;
}

struct EnumLatinArgs {
  int n = 0;
  bool count_only = false;
  std::optional<double> timeout;
  std::string output;
};

inline int cmd_enum_latin(const Globals& g, const EnumLatinArgs& args, Streams io) {
  EnumerationTask task;
  task.n = args.n;
  task.mode = EnumerationMode::AllLatinSquares;
  task.count_only = true;  // squares are streamed, never stored
  task.time_limit_seconds = args.timeout;

  std::optional<std::ofstream> file;
  if (!args.output.empty()) {
    file.emplace(args.output, std::ios::binary);
    if (!*file) throw Error(ErrorCode::ParseError, "cannot write " + args.output);
  }
  std::ostream& items = file ? static_cast<std::ostream&>(*file) : io.out;
  std::ostream& summary = !args.count_only && !file ? io.err : io.out;

  SquareConsumer consumer;
  if (!args.count_only)
    consumer = [&](const LatinSquare& square) {
      items << io::to_json(io::SquareDocument{square, io::Json::object()}).dump() << "\n";
    };
  const auto result = enumerate_latin(task, consumer);
  if (g.json()) {
    io::Json out;
    out["n"] = result.n;
    out["total"] = result.total_count;
    out["exhausted"] = result.exhausted;
    out["elapsed_seconds"] = result.elapsed_seconds;
    summary << out.dump() << "\n";
  } else {
    summary << "total=" << result.total_count << (result.exhausted ? "" : " (timeout, partial)") << "\n";
  }
  return result.exhausted ? kOk : kTimeout;
}

inline int cmd_min_exhaustive(const Globals& g, int n, const std::string& output, Streams io) {
  const auto best = min_imbalance_exhaustive(n);
  if (!output.empty())
    write_text_file(output, io::to_json(io::SquareDocument{best.witness, io::Json::object()}).dump(2) + "\n");
  if (g.json()) {
    io::Json out;
    out["n"] = n;
    out["imbalance3"] = best.imbalance3;
    out["I"] = format_thirds(best.imbalance3);
    out["witness"] = best.witness.rows();
    io.out << out.dump(2) << "\n";
  } else {
    io.out << "n = " << n << "\nimbalance3 = " << best.imbalance3 << "\nI = " << format_thirds(best.imbalance3)
           << "\nwitness:\n"
           << io::format_grid(best.witness);
  }
  return kOk;
}

struct SearchArgs {
  int n = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> initial_temperature;
  std::optional<double> cooling_factor;
  std::optional<int> steps_per_temperature;
  std::optional<int> stagnation_window;
  std::optional<int> restart_limit;
  std::optional<double> value_neighbor_fraction;
  std::optional<double> time_limit;
  std::string output;
  bool record_time = false;
};

inline int cmd_search(const Globals& g, const SearchArgs& args, Streams io) {
  AnnealConfig config;
  config.n = args.n;
  if (!is_one_mod_three(args.n) || args.n < 4) {
    io.err << "search needs n >= 4 with n = 1 (mod 3); got " << args.n << "\n";
    return kValidation;
  }
  config.seed = args.seed ? *args.seed : fresh_seed();
  if (!args.seed) io.err << "seed = " << config.seed << "\n";
  if (args.initial_temperature) config.initial_temperature = *args.initial_temperature;
  if (args.cooling_factor) config.cooling_factor = *args.cooling_factor;
  if (args.steps_per_temperature) config.steps_per_temperature = *args.steps_per_temperature;
  if (args.stagnation_window) config.stagnation_window = *args.stagnation_window;
  if (args.restart_limit) config.restart_limit = *args.restart_limit;
  if (args.value_neighbor_fraction) config.value_neighbor_fraction = *args.value_neighbor_fraction;
  config.time_limit_seconds = args.time_limit;
  config.thread_count = g.threads;

  const auto outcome = search(config);
  std::ostream& summary = args.output.empty() ? io.err : io.out;
  if (const auto* failure = std::get_if<SearchFailure>(&outcome)) {
    summary << "search failed: "
            << (failure->reason == FailureReason::TimeLimitExceeded ? "time limit exceeded" : "restart limit reached")
            << ", best energy " << failure->best_energy << ", restarts " << failure->restarts << ", steps "
            << failure->steps << "\n";
    return kFailure;
  }
  const auto& cert = std::get<NearPPCertificate>(outcome);
  const auto report = certify::verify_near_pp(cert);
  if (!report.passed) {
    summary << "certificate failed independent verification\n";
    return kFailure;
  }
  const std::string text = io::to_json(cert, args.record_time).dump(2) + "\n";
  if (args.output.empty())
    io.out << text;
  else
    write_text_file(args.output, text);
  summary << "I* = " << format_thirds(cert.imbalance3) << "\nelapsed = " << io::format_seconds(cert.elapsed_seconds)
          << " s\n";
  return kOk;
}

struct TableArgs {
  int n_max = 0;
  double budget = 600.0;
  std::uint64_t seed = 1;
  std::string csv;
  std::string json;
};

inline int cmd_table(const Globals& g, const TableArgs& args, Streams io) {
  if (args.n_max > 52) io.err << "note: rows beyond n = 52 are exploratory\n";
  certify::TableOptions options;
  options.seed = args.seed;
  options.thread_count = g.threads;
  const auto manifest = certify::reproduce_table(args.n_max, args.budget, options);

  const std::string csv = io::manifest_csv(manifest);
  if (args.csv.empty())
    io.out << csv;
  else
    write_text_file(args.csv, csv);
  if (!args.json.empty()) write_text_file(args.json, io::to_json(manifest).dump(2) + "\n");

  std::ostream& summary = args.csv.empty() ? io.err : io.out;
  for (const auto& row : manifest.rows) {
    const std::string expected = format_thirds(lower_bound3(row.n));
    summary << "n=" << row.n << " I*=" << (row.ok ? row.i_star : "-") << " expected=" << expected << " "
            << (row.ok ? "verified" : "FAILED: " + row.failure) << " (" << io::format_seconds(row.seconds)
            << " s)\n";
  }
  return manifest.all_ok() ? kOk : kFailure;
}

inline void print_report(const certify::VerificationReport& report, bool json, std::ostream& out) {
  if (json) {
    io::Json doc;
    doc["passed"] = report.passed;
    doc["n"] = report.n;
    doc["classification"] = report.classification;
    doc["imbalance3"] = report.imbalance3;
    doc["lower_bound3"] = report.lower_bound3;
    io::Json mismatches = io::Json::array();
    for (const auto& m : report.mismatches)
      mismatches.push_back({{"field", m.field}, {"claimed", m.claimed}, {"recomputed", m.recomputed}});
    doc["mismatches"] = mismatches;
    out << doc.dump(2) << "\n";
    return;
  }
  out << "n: " << report.n << "\n";
  if (!report.classification.empty()) out << "classification: " << report.classification << "\n";
  if (!report.profile.empty())
    out << "imbalance3: " << report.imbalance3 << " (I = " << format_thirds(report.imbalance3)
        << ", bound " << format_thirds(report.lower_bound3) << ")\n";
  for (const auto& m : report.mismatches)
    out << "mismatch " << m.field << ": claimed " << m.claimed << ", recomputed " << m.recomputed << "\n";
  out << (report.passed ? "PASS" : "FAIL") << "\n";
}

inline int cmd_verify(const Globals& g, const std::string& path, Streams io) {
  const auto doc = io::load_document(io::read_file(path));
  switch (doc.kind) {
    case io::DocumentKind::Certificate: {
      const auto report = certify::verify_near_pp(io::certificate_claims_from_json(doc.json));
      print_report(report, g.json(), io.out);
      return report.passed ? kOk : kFailure;
    }
    case io::DocumentKind::Permutation: {
      const auto perm = io::permutation_from_json(doc.json);
      const auto& sigma = perm.sigma;
      if (sigma.order() >= 4 && is_one_mod_three(sigma.order())) {
        const auto profile = shift_profile(sigma);
        certify::CertificateClaims claims{sigma.order(),
                                          std::vector<int>(sigma.image().begin(), sigma.image().end()),
                                          profile.values, imbalance(circulant(sigma)).imbalance3};
        const auto report = certify::verify_near_pp(claims);
        print_report(report, g.json(), io.out);
        return report.passed ? kOk : kFailure;
      }
      const auto cls = sigma.order() >= 2 ? classify(sigma) : Classification::Neither;
      if (g.json())
        io.out << io::Json{{"n", sigma.order()}, {"classification", to_string(cls)},
                           {"passed", cls == Classification::Perfect}}
                      .dump(2)
               << "\n";
      else
        io.out << "n: " << sigma.order() << "\nclassification: " << to_string(cls) << "\n"
               << (cls == Classification::Perfect ? "PASS" : "FAIL") << "\n";
      return cls == Classification::Perfect ? kOk : kFailure;
    }
    case io::DocumentKind::Square:
    case io::DocumentKind::Grid: {
      const auto square = doc.kind == io::DocumentKind::Square ? io::square_from_json(doc.json).square
                                                               : validate_latin(doc.grid_rows);
      const auto report = certify::verify_bound(square);
      if (g.json()) {
        io::Json out;
        out["passed"] = report.passed;
        out["n"] = report.n;
        out["a"] = report.a;
        out["sum_x"] = report.sum_x;
        out["expected_sum_x"] = report.expected_sum_x;
        out["imbalance3"] = report.imbalance3;
        out["lower_bound3"] = report.lower_bound3;
        out["total_slack"] = report.total_slack;
        io::Json pairs = io::Json::array();
        for (const auto& p : report.pairs)
          pairs.push_back({{"r1", p.r1}, {"r2", p.r2}, {"d", p.distance}, {"x", p.x}, {"slack", p.slack}});
        out["pairs"] = pairs;
        io.out << out.dump(2) << "\n";
      } else {
        io.out << "n: " << report.n << "\na: " << report.a << "\nsum x: " << report.sum_x << " (expected "
               << report.expected_sum_x << ")\n"
               << "imbalance3: " << report.imbalance3 << " >= lower bound " << report.lower_bound3 << "\n"
               << "total slack: " << report.total_slack << "\n";
        for (const auto& p : report.pairs)
          io.out << "  rows " << p.r1 << "," << p.r2 << ": d=" << p.distance << " x=" << p.x
                 << " slack=" << p.slack << "\n";
        io.out << "PASS\n";
      }
      return kOk;
    }
  }
  return kParse;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, Streams io) {
  CLI::App app{"Latin square imbalance toolkit", "latinbal"};
  app.require_subcommand(1);
  app.fallthrough();
  detail::Globals g;
  app.add_option("--threads", g.threads, std::string("Worker threads (default from ") + kThreadsEnv + ", else 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Output format for reports")->check(CLI::IsMember({"text", "json"}));

  std::string path;
  auto* imbalance_cmd = app.add_subcommand("imbalance", "Imbalance of a Latin square file (JSON or grid)");
  imbalance_cmd->add_option("file", path, "Square file")->required();

  detail::EnumPpArgs pp;
  auto* enum_pp = app.add_subcommand("enum-pp", "Enumerate perfect permutations");
  enum_pp->add_option("--n", pp.n, "Order")->required()->check(CLI::Range(1, kMaxPerfectEnumerationOrder));
  enum_pp->add_flag("--count-only", pp.count_only, "Print counts only");
  enum_pp->add_flag("--force", pp.force, "Allow n beyond the practical limit");
  enum_pp->add_option("--timeout", pp.timeout, "Seconds");
  enum_pp->add_option("--output", pp.output, "JSON-lines output for the permutations");

  detail::EnumLatinArgs latin;
  auto* enum_latin = app.add_subcommand("enum-latin", "Enumerate all Latin squares of order n <= 6");
  enum_latin->add_option("--n", latin.n, "Order")->required()->check(CLI::Range(1, kMaxLatinEnumerationOrder));
  enum_latin->add_flag("--count-only", latin.count_only, "Print counts only");
  enum_latin->add_option("--timeout", latin.timeout, "Seconds");
  enum_latin->add_option("--output", latin.output, "JSON-lines output for the squares");

  int min_n = 0;
  std::string min_output;
  auto* min_cmd = app.add_subcommand("min-exhaustive", "Exact minimum imbalance over all squares, n <= 5");
  min_cmd->add_option("--n", min_n, "Order")->required()->check(CLI::Range(1, 5));
  min_cmd->add_option("--output", min_output, "Write the witness as a square document");

  detail::SearchArgs sa;
  auto* search_cmd = app.add_subcommand("search", "Anneal for a near-perfect permutation");
  search_cmd->add_option("--n", sa.n, "Order, n = 1 (mod 3)")->required();
  search_cmd->add_option("--seed", sa.seed, "Random seed (generated and printed if absent)");
  search_cmd->add_option("--initial-temperature", sa.initial_temperature);
  search_cmd->add_option("--cooling", sa.cooling_factor);
  search_cmd->add_option("--steps-per-temperature", sa.steps_per_temperature);
  search_cmd->add_option("--stagnation-window", sa.stagnation_window);
  search_cmd->add_option("--restart-limit", sa.restart_limit);
  search_cmd->add_option("--value-neighbor-fraction", sa.value_neighbor_fraction);
  search_cmd->add_option("--time-limit", sa.time_limit, "Seconds");
  search_cmd->add_option("--output", sa.output, "Certificate path (stdout if absent)");
  search_cmd->add_flag("--record-time", sa.record_time, "Store elapsed seconds in the certificate");

  detail::TableArgs table;
  auto* table_cmd = app.add_subcommand("table", "Search and verify near-perfect permutations for each n = 1 (mod 3) up to --n-max");
  table_cmd->add_option("--n-max", table.n_max, "Largest n")->required();
  table_cmd->add_option("--budget", table.budget, "Seconds per row");
  table_cmd->add_option("--seed", table.seed, "Random seed");
  table_cmd->add_option("--csv", table.csv, "CSV manifest path (stdout if absent)");
  table_cmd->add_option("--json", table.json, "JSON results path");

  auto* verify_cmd = app.add_subcommand("verify", "Verify a certificate, permutation or square");
  verify_cmd->add_option("file", path, "Document")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    io.err << e.what() << "\n";
    return kValidation;
  }

  try {
    if (*imbalance_cmd) return detail::cmd_imbalance(g, path, io);
    if (*enum_pp) return detail::cmd_enum_pp(g, pp, io);
    if (*enum_latin) return detail::cmd_enum_latin(g, latin, io);
    if (*min_cmd) return detail::cmd_min_exhaustive(g, min_n, min_output, io);
    if (*search_cmd) return detail::cmd_search(g, sa, io);
    if (*table_cmd) return detail::cmd_table(g, table, io);
    if (*verify_cmd) return detail::cmd_verify(g, path, io);
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
    return detail::exit_code_for(e);
  }
  return kValidation;
}

}  // namespace latinbal::cli
