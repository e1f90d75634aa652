#pragma once

#include "coarse/check.hpp"
#include "coarse/io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace coarse {

/// A parsed scenario document. Inputs given as strings are file paths relative
/// to `base_dir`; anything else is an inline document.
struct Scenario {
  std::string name;
  std::string pipeline;
  io::Json inputs;
  io::Json parameters;
  std::filesystem::path base_dir;
};

/// Throws InputError naming the offending field.
Scenario parse_scenario(const io::Json& doc, std::filesystem::path base_dir);
Scenario load_scenario(const std::filesystem::path& file);

const std::vector<std::string>& pipeline_names();

using Samples = std::vector<std::pair<double, double>>;

struct Certificate {
  std::string name;
  bool pass = true;
  /// The full certificate document.
  io::Json body;
  /// (R, variation) and (S, tail), in grid order.
  Samples variation;
  Samples tail;
};

/// Executes the scenario's pipeline. Throws InputError / PreconditionError on
/// bad input and SearchExhausted when a cover search finds nothing.
Certificate run_pipeline(const Scenario& scenario);

struct RunOutcome {
  /// 0 all inequalities hold, 1 some inequality fails, 2 input or precondition error.
  int exit_code = 0;
  std::optional<Certificate> certificate;
  std::string error;
};

RunOutcome run_scenario(const std::filesystem::path& file);

std::string certificate_text(const Certificate& cert);

/// "R,variation" and "S,tail" tables with 17 significant digits.
std::string variation_csv(const Certificate& cert);
std::string tail_csv(const Certificate& cert);
/// Writes <name>.variation.csv and <name>.tail.csv into `dir`. Throws
/// InputError for any format other than "csv".
std::vector<std::filesystem::path> export_profiles(const Certificate& cert, const std::string& format,
                                                   const std::filesystem::path& dir);

struct SuiteEntry {
  std::string file;
  int exit_code = 0;
  std::string detail;
};

struct SuiteSummary {
  std::vector<SuiteEntry> entries;
  int passed = 0;
  int total = 0;
  int exit_code() const { return passed == total ? 0 : 1; }
};

/// Runs every scenario (a *.json file with a "pipeline" field) in `dir`,
/// ordered by file name, on up to `threads` workers. Certificates go to
/// `out_dir` when given.
SuiteSummary run_suite(const std::filesystem::path& dir, int threads,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// COARSE_LAB_THREADS if set and positive, else the hardware concurrency.
int thread_budget();

}  // namespace coarse
