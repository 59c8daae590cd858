#include <vector>

#include "valueprobe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return valueprobe::cli::run(std::move(args));
}
