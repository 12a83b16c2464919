#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace coedit {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs a program to completion, capturing stdout and stderr. argv[0] is
// resolved through PATH. Extra environment entries override the inherited
// environment.
ProcessResult run_process(const std::vector<std::string> &argv,
                          const std::filesystem::path &cwd = {},
                          const std::map<std::string, std::string> &env = {},
                          const std::string &stdin_data = {});

// A long-lived child with pipes on stdin/stdout, used for
// `git cat-file --batch`. Not copyable; the child is reaped on destruction.
class PipedProcess {
public:
  PipedProcess(const std::vector<std::string> &argv,
               const std::filesystem::path &cwd);
  ~PipedProcess();

  PipedProcess(const PipedProcess &) = delete;
  PipedProcess &operator=(const PipedProcess &) = delete;

  void write_line(const std::string &line);
  std::string read_line();
  std::string read_exact(std::size_t n);

private:
  bool fill();

  int pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  std::size_t pos_ = 0;
};

} // namespace coedit
