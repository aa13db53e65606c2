#include <string>
#include <vector>

#include "hduva/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hduva::cli::run_cli(args);
}
