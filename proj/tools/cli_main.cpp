#include <exception>
#include <iostream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "cdfband/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"streaming time- and value-uniform confidence bands for CDFs"};
  std::string config_path;
  app.add_option("--config", config_path,
                 "flat key=value configuration file (flags override it)");
  // Every flag value is routed through the same key=value parser as the
  // configuration file, so semantics and error reporting match exactly.
  const std::pair<const char*, const char*> flags[] = {
      {"--command", "band | simulate | sweep | compare-oracles | coverage"},
      {"--generator", "stream generator kind"},
      {"--oracle", "bernoulli | subgaussian | empbern | ddrm"},
      {"--alpha", "total error budget in (0, 1]"},
      {"--horizon", "stream length"},
      {"--grid", "probe grid: N, N:lo:hi, or list:v1,v2,..."},
      {"--seeds", "replicate count for coverage / compare-oracles"},
      {"--out", "output file path"},
      {"--format", "csv | json"},
  };
  std::vector<std::string> values(std::size(flags));
  for (std::size_t i = 0; i < std::size(flags); ++i)
    app.add_option(flags[i].first, values[i], flags[i].second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cdfband::cli::RunConfig config;
  try {
    if (!config_path.empty())
      cdfband::cli::load_config_file(config, config_path);
    for (std::size_t i = 0; i < std::size(flags); ++i) {
      if (app.count(flags[i].first) == 0) continue;
      cdfband::cli::apply_assignment(config, flags[i].first + 2, values[i]);
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return cdfband::cli::run(config, std::cerr);
}
