#pragma once

#include <stdexcept>
#include <string>

namespace coedit {

enum class ErrorKind {
  NotARepository,
  CloneFailed,
  GitFailure,
  PathNotFound,
  BinaryContent,
  MalformedDiff,
  StoreIo,
  FingerprintMismatch,
  InvalidArgument,
  CycleDetected,
  MissingMergeRecords,
  RankDeficient,
};

const char *to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace coedit
