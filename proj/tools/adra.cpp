#include <string>
#include <vector>

#include "adra_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return adra::cli::run_cli(args);
}
