#include <iostream>

#include "CLI11.hpp"
#include "cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace rbk::cli;
  CLI::App app{"RBK coagulation laboratory: simulation, blowup runs, verification suites"};
  app.require_subcommand(1);
  Options opt;
  int rc = kOk;

  auto* sim = app.add_subcommand("simulate", "Integrate a configuration and write a trajectory CSV");
  sim->add_option("--config", opt.config, "JSON run configuration")->required();
  sim->add_option("--out", opt.out, "output CSV path")->required();
  sim->add_option("--chart", opt.chart, "t | log-t | phi (overrides the config)");
  sim->add_option("--cap", opt.cap, "phi_1 cap for the phi chart");
  sim->callback([&] { rc = cmd_simulate(opt, std::cout, std::cerr); });

  auto* blow = app.add_subcommand("blowup", "Integrate the phi-system to blowup; CSV plus JSON report");
  blow->add_option("--config", opt.config, "JSON run configuration")->required();
  blow->add_option("--out", opt.out, "output CSV path (report written alongside as .json)")->required();
  blow->add_option("--cap", opt.cap, "phi_1 cap (default 1e10)");
  blow->callback([&] { rc = cmd_blowup(opt, std::cout, std::cerr); });

  auto* ver = app.add_subcommand("verify", "Run a verification suite: identities | support | asymptotics | theorem-constants");
  ver->add_option("suite,--suite", opt.suite, "suite name");
  ver->add_option("--config", opt.config, "JSON run configuration");
  ver->add_option("--N", opt.n, "system dimension");
  ver->add_option("--m", opt.m, "support gcd");
  ver->add_option("--p", opt.p, "support maximum");
  ver->add_option("--cap", opt.cap, "phi_1 cap for blowup runs");
  ver->callback([&] { rc = cmd_verify(opt, std::cout, std::cerr); });

  auto* con = app.add_subcommand("constants", "Print the asymptotic constants tables as JSON");
  con->add_option("--N", opt.n, "system dimension")->required();
  con->add_option("--m", opt.m, "support gcd (default 1)");
  con->add_option("--p", opt.p, "support maximum (default: largest multiple of m <= N)");
  con->callback([&] { rc = cmd_constants(opt, std::cout, std::cerr); });

  auto* sw = app.add_subcommand("sweep", "Run a parameter grid concurrently");
  sw->add_option("--config", opt.config, "JSON sweep configuration {base, grid}")->required();
  sw->add_option("--out", opt.out, "output directory")->required();
  sw->callback([&] { rc = cmd_sweep(opt, std::cout, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  return rc;
}
