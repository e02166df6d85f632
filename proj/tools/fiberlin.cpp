#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fiberlin/bundle.hpp"
#include "fiberlin/cli.hpp"
#include "fiberlin/expr.hpp"
#include "fiberlin/parallel.hpp"

namespace fs = std::filesystem;

namespace {

bool write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  return static_cast<bool>(f);
}

int run(const std::string& command, const std::string& scenario, const std::string& out, int threads, bool verbose) {
  if (threads > 0) fiberlin::set_thread_count(threads);
  std::ifstream in(scenario, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read scenario " << scenario << "\n";
    return fiberlin::kExitConfigError;
  }
  std::ostringstream buf;
  buf << in.rdbuf();

  fiberlin::CommandOutput result;
  try {
    result = fiberlin::run_command(command, buf.str());
  } catch (const fiberlin::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return fiberlin::kExitConfigError;
  } catch (const fiberlin::ParseError& e) {
    std::cerr << "expression error: " << e.what() << "\n";
    return fiberlin::kExitConfigError;
  } catch (const fiberlin::DomainError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return fiberlin::kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return fiberlin::kExitConfigError;
  }

  for (const auto& line : result.table)
    if (verbose || line.rfind("warning", 0) == 0 || command == "verify-estimates") std::cerr << line << "\n";

  const std::string primary = command == "plot" ? result.svg : result.report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << primary;
  } else if (!write_file(out, primary)) {
    std::cerr << "error: cannot write " << out << "\n";
    return fiberlin::kExitConfigError;
  }
  if (command != "plot" && !result.svg.empty()) {
    const fs::path dir = out.empty() ? fs::current_path() : fs::path(out).parent_path();
    if (!write_file(dir / result.svg_name, result.svg)) {
      std::cerr << "error: cannot write figure " << result.svg_name << "\n";
      return fiberlin::kExitConfigError;
    }
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linearizing homotopies of bundle maps: certificates, estimates, symmetry and foliation checks"};
  app.require_subcommand(1);
  std::string scenario, out;
  int threads = 0;
  bool verbose = false;
  for (const auto& name : fiberlin::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, name == "plot" ? "SVG output path" : "Report output path (stdout when omitted)");
    sub->add_option("--threads", threads, "Worker threads; 1 runs the serial path")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", verbose, "Print a summary table");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fiberlin::kExitConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return run(command, scenario, out, threads, verbose);
}
