#include "coedit/process.hpp"

#include "coedit/error.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

extern char **environ;

namespace coedit {

const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::NotARepository: return "not-a-repository";
  case ErrorKind::CloneFailed: return "clone-failed";
  case ErrorKind::GitFailure: return "git-failure";
  case ErrorKind::PathNotFound: return "path-not-found";
  case ErrorKind::BinaryContent: return "binary-content";
  case ErrorKind::MalformedDiff: return "malformed-diff";
  case ErrorKind::StoreIo: return "store-io";
  case ErrorKind::FingerprintMismatch: return "fingerprint-mismatch";
  case ErrorKind::InvalidArgument: return "invalid-argument";
  case ErrorKind::CycleDetected: return "cycle-detected";
  case ErrorKind::MissingMergeRecords: return "missing-merge-records";
  case ErrorKind::RankDeficient: return "rank-deficient";
  }
  return "unknown";
}

namespace {

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fds, O_CLOEXEC) != 0)
      throw Error(ErrorKind::GitFailure, std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
  int release_read() { int f = fds[0]; fds[0] = -1; return f; }
  int release_write() { int f = fds[1]; fds[1] = -1; return f; }
};

std::vector<std::string> build_env(const std::map<std::string, std::string> &extra) {
  std::vector<std::string> env;
  for (char **e = environ; e && *e; ++e) {
    std::string entry(*e);
    auto eq = entry.find('=');
    std::string key = entry.substr(0, eq);
    if (extra.count(key)) continue;
    env.push_back(std::move(entry));
  }
  for (const auto &[k, v] : extra) env.push_back(k + "=" + v);
  return env;
}

std::vector<char *> c_array(std::vector<std::string> &items) {
  std::vector<char *> out;
  out.reserve(items.size() + 1);
  for (auto &s : items) out.push_back(s.data());
  out.push_back(nullptr);
  return out;
}

int spawn(const std::vector<std::string> &argv, const std::filesystem::path &cwd,
          const std::map<std::string, std::string> &env, int stdin_fd, int stdout_fd,
          int stderr_fd) {
  static const bool sigpipe_ignored = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;

  // Everything allocated before fork; the child only dups, chdirs and execs.
  auto args = argv;
  auto cargs = c_array(args);
  auto envs = build_env(env);
  auto cenv = c_array(envs);

  pid_t pid = ::fork();
  if (pid < 0)
    throw Error(ErrorKind::GitFailure, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    if (stdin_fd >= 0) ::dup2(stdin_fd, STDIN_FILENO);
    ::dup2(stdout_fd, STDOUT_FILENO);
    ::dup2(stderr_fd, STDERR_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) ::_exit(127);
    ::execvpe(cargs[0], cargs.data(), cenv.data());
    ::_exit(127);
  }
  return pid;
}

int wait_child(int pid) {
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

} // namespace

ProcessResult run_process(const std::vector<std::string> &argv,
                          const std::filesystem::path &cwd,
                          const std::map<std::string, std::string> &env,
                          const std::string &stdin_data) {
  Pipe in, out, err;
  int pid = spawn(argv, cwd, env, in.fds[0], out.fds[1], err.fds[1]);
  in.close_read();
  out.close_write();
  err.close_write();

  ProcessResult result;
  std::size_t written = 0;
  if (stdin_data.empty()) in.close_write();

  char buf[65536];
  while (out.fds[0] >= 0 || err.fds[0] >= 0) {
    pollfd fds[3];
    int n = 0;
    int out_idx = -1, err_idx = -1, in_idx = -1;
    if (out.fds[0] >= 0) { fds[n] = {out.fds[0], POLLIN, 0}; out_idx = n++; }
    if (err.fds[0] >= 0) { fds[n] = {err.fds[0], POLLIN, 0}; err_idx = n++; }
    if (in.fds[1] >= 0) { fds[n] = {in.fds[1], POLLOUT, 0}; in_idx = n++; }
    if (::poll(fds, n, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    auto drain = [&](int idx, Pipe &p, std::string &sink) {
      if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
      ssize_t r = ::read(p.fds[0], buf, sizeof(buf));
      if (r > 0)
        sink.append(buf, static_cast<std::size_t>(r));
      else if (r == 0 || errno != EINTR)
        p.close_read();
    };
    drain(out_idx, out, result.out);
    drain(err_idx, err, result.err);
    if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t w = ::write(in.fds[1], stdin_data.data() + written, stdin_data.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EINTR && errno != EAGAIN) in.close_write();
      if (written >= stdin_data.size()) in.close_write();
    }
  }
  in.close_write();
  result.exit_code = wait_child(pid);
  if (result.exit_code == 127 && result.out.empty() && result.err.empty())
    result.err = "failed to execute " + argv.front();
  return result;
}

PipedProcess::PipedProcess(const std::vector<std::string> &argv,
                           const std::filesystem::path &cwd) {
  Pipe in, out;
  int devnull = ::open("/dev/null", O_WRONLY | O_CLOEXEC);
  pid_ = spawn(argv, cwd, {}, in.fds[0], out.fds[1], devnull);
  ::close(devnull);
  in.close_read();
  out.close_write();
  in_fd_ = in.release_write();
  out_fd_ = out.release_read();
}

PipedProcess::~PipedProcess() {
  if (in_fd_ >= 0) ::close(in_fd_);
  if (out_fd_ >= 0) ::close(out_fd_);
  if (pid_ > 0) wait_child(pid_);
}

void PipedProcess::write_line(const std::string &line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t w = ::write(in_fd_, data.data() + off, data.size() - off);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::GitFailure, "write to child process failed");
    }
    off += static_cast<std::size_t>(w);
  }
}

bool PipedProcess::fill() {
  if (pos_ > 0) {
    buffer_.erase(0, pos_);
    pos_ = 0;
  }
  char buf[65536];
  for (;;) {
    ssize_t r = ::read(out_fd_, buf, sizeof(buf));
    if (r > 0) {
      buffer_.append(buf, static_cast<std::size_t>(r));
      return true;
    }
    if (r < 0 && errno == EINTR) continue;
    return false;
  }
}

std::string PipedProcess::read_line() {
  for (;;) {
    auto nl = buffer_.find('\n', pos_);
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(pos_, nl - pos_);
      pos_ = nl + 1;
      return line;
    }
    if (!fill()) throw Error(ErrorKind::GitFailure, "child process closed its output");
  }
}

std::string PipedProcess::read_exact(std::size_t n) {
  while (buffer_.size() - pos_ < n) {
    if (!fill()) throw Error(ErrorKind::GitFailure, "child process closed its output");
  }
  std::string data = buffer_.substr(pos_, n);
  pos_ += n;
  return data;
}

} // namespace coedit
