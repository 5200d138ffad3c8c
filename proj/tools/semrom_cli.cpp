#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "semrom/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Parametrized channel-flow solver: spectral element FOM with a "
               "POD-Galerkin reduced-order model"};
  app.require_subcommand(1);

  std::string config_path, archive_dir, dump_field;
  double mu = 1.0;

  CLI::App* offline = app.add_subcommand("offline", "Run the offline phase and write an archive");
  offline->add_option("--config", config_path, "Run configuration file (key=value)")->required();

  CLI::App* online = app.add_subcommand("online", "Solve at one parameter from a reduced archive");
  online->add_option("--archive", archive_dir, "Archive directory written by `offline`")
      ->required();
  online->add_option("--mu", mu, "Gap-width parameter")->required();
  online->add_option("--dump-field", dump_field,
                     "Write the reconstructed full-order state to this matrix file");

  CLI::App* study = app.add_subcommand("study", "Error and timing study against fresh FOM solves");
  study->add_option("--config", config_path, "Run configuration file (key=value)")->required();
  study->add_option("--archive", archive_dir, "Archive directory written by `offline`")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (offline->parsed()) {
      semrom::cmd_offline(semrom::parse_run_config(config_path));
    } else if (online->parsed()) {
      semrom::cmd_online(archive_dir, mu, dump_field);
    } else {
      semrom::cmd_study(semrom::parse_run_config(config_path), archive_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
