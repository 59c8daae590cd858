#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace clirun {

inline std::string cli_binary() { return VALUEPROBE_CLI_BIN; }

struct Result {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

// Runs the CLI binary as a subprocess with the given arguments.
inline Result run(const std::vector<std::string>& args, const std::string& log_path) {
  std::string command = cli_binary();
  for (const auto& a : args) command += " '" + a + "'";
  command += " >'" + log_path + "' 2>&1";
  const int status = std::system(command.c_str());
  Result result;
  if (status == -1)
    result.exit_code = -1;
  else if (WIFEXITED(status))
    result.exit_code = WEXITSTATUS(status);
  else
    result.exit_code = 128;
  std::ifstream in(log_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  return result;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline bool exists(const std::string& path) {
  std::ifstream in(path);
  return in.good();
}

}  // namespace clirun
