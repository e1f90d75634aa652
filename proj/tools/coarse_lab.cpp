// coarse-lab: run scenarios, suites of scenarios, and metric checks.

#include "coarse/error.hpp"
#include "coarse/io.hpp"
#include "coarse/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

int run(const std::string& file, const std::string& out_dir, const std::string& profiles) {
  coarse::RunOutcome o = coarse::run_scenario(file);
  if (!o.certificate) {
    std::cerr << "coarse-lab: " << o.error << "\n";
    return o.exit_code;
  }
  const auto& cert = *o.certificate;
  try {
    if (out_dir.empty()) {
      std::cout << coarse::certificate_text(cert);
    } else {
      std::filesystem::create_directories(out_dir);
      const auto path = std::filesystem::path(out_dir) / (cert.name + ".cert.json");
      std::ofstream f(path, std::ios::binary);
      f << coarse::certificate_text(cert);
      std::cout << "wrote " << path.string() << "\n";
    }
    if (!profiles.empty()) {
      for (const auto& p : coarse::export_profiles(cert, profiles, out_dir.empty() ? "." : out_dir))
        std::cout << "wrote " << p.string() << "\n";
    }
  } catch (const coarse::InputError& e) {
    std::cerr << "coarse-lab: " << e.what() << "\n";
    return 2;
  }
  if (!cert.pass) {
    for (const auto& q : cert.body["checked_inequalities"])
      if (!q["pass"].get<bool>()) std::cerr << "violated: " << q["name"].get<std::string>() << "\n";
  }
  return o.exit_code;
}

int suite(const std::string& dir, const std::string& out_dir) {
  try {
    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) out = out_dir;
    const coarse::SuiteSummary s = coarse::run_suite(dir, coarse::thread_budget(), out);
    for (const auto& e : s.entries) std::cout << e.file << ": exit " << e.exit_code << " " << e.detail << "\n";
    std::cout << "summary " << s.passed << "/" << s.total << " passed\n";
    return s.exit_code();
  } catch (const coarse::InputError& e) {
    std::cerr << "coarse-lab: " << e.what() << "\n";
    return 2;
  }
}

int check_space(const std::string& file) {
  try {
    const auto space = coarse::io::read_space(coarse::io::load_file(file), std::filesystem::path(file).filename().string());
    std::printf("points %d\ndiameter %.17g\nuniform_discreteness %.17g\nmetric ok\n", space.size(), space.diameter(),
                space.uniform_discreteness());
    return 0;
  } catch (const coarse::InputError& e) {
    std::cerr << "coarse-lab: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite coarse-geometry workbench"};
  app.require_subcommand(1);

  std::string scenario, out_dir, profiles;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and emit its certificate");
  run_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Directory for the certificate (default: stdout)");
  run_cmd->add_option("--profiles", profiles, "Also export profile tables in this format (csv)");

  std::string dir, suite_out;
  auto* suite_cmd = app.add_subcommand("suite", "Run every scenario in a directory");
  suite_cmd->add_option("dir", dir, "Scenario directory")->required();
  suite_cmd->add_option("--out", suite_out, "Directory for certificates");

  std::string space_file;
  auto* space_cmd = app.add_subcommand("check-space", "Validate a space file and print its statistics");
  space_cmd->add_option("space", space_file, "Space JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*run_cmd) return run(scenario, out_dir, profiles);
  if (*suite_cmd) return suite(dir, suite_out);
  return check_space(space_file);
}
