#include <string>
#include <vector>

#include "pradkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pradkit::cli::run(args);
}
