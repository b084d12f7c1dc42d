// rieszlab CLI: runs declarative potential-theory experiments from JSON
// configs and writes machine-readable reports.
//
// Exit codes: 0 success, 1 config/validation error, 2 numerical failure,
// 3 inconclusive verdict when --require-conclusive is set.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rieszlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rieszlab - inner Riesz balayage, capacities, and Wiener-type diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  rieszlab::RunOptions opts;

  for (const std::string& name : {"capacity", "balayage", "wiener", "kelvin_check", "mass_deficit"}) {
    CLI::App* sub = app.add_subcommand(name, "run a '" + name + "' task config");
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--level", opts.level, "override the level of every level-bearing set");
    sub->add_option("--tol", opts.tol, "override the solver KKT tolerance");
    sub->add_option("--beta", opts.beta, "override the kernel diagonal beta");
    sub->add_option("--threads", opts.threads, "thread budget (results do not depend on it)");
    sub->add_flag("--require-conclusive", opts.require_conclusive,
                  "exit 3 when a verdict comes back inconclusive");
    sub->add_flag("--check-symmetry", opts.check_symmetry, "balayage: add the symmetry-identity check");
    sub->add_flag("--check-restriction", opts.check_restriction,
                  "balayage: add the restriction-identity check");
    sub->add_flag("--check-superposition", opts.check_superposition,
                  "balayage: add the Dirac-superposition check");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const rieszlab::Json config = rieszlab::load_config_file(config_path);
    const rieszlab::RunResult result = rieszlab::run_config(config, command, opts);
    rieszlab::write_run_result(result, out_dir);
    for (const auto& [name, content] : result.files)
      std::cout << "wrote " << (std::filesystem::path(out_dir) / name).string() << "\n";
    return 0;
  } catch (const rieszlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const rieszlab::InconclusiveError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return 3;
  } catch (const rieszlab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
