#pragma once

#include <sys/types.h>

#include <string>
#include <vector>

namespace process {

struct Child {
  pid_t pid = -1;
  int out = -1;  // read end of the child's stdout
};

/// Starts `program args...` with stdout piped back; stderr goes to /dev/null
/// when quiet.
Child spawn(const std::string& program, const std::vector<std::string>& args, bool quiet_stderr = true);

/// Exit code, or 128 + signal.
int wait_exit(pid_t pid);

struct Result {
  int code = -1;
  std::string out;
};

/// spawn, read stdout to EOF, wait.
Result run(const std::string& program, const std::vector<std::string>& args);

std::string read_line(int fd);

}  // namespace process
