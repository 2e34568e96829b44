// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ragjudge {

// Root of every error the toolkit raises. Precondition violations use
// std::invalid_argument instead.
struct Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------- backend ----------------

struct NetworkError : public Error {
  using Error::Error;
};

struct BackendError : public Error {
  int status{0};
  BackendError(const std::string& message, int status_code) : Error(message), status(status_code) {}
  explicit BackendError(const std::string& message) : Error(message) {}
};

struct EmptyCompletion : public Error {
  using Error::Error;
};

struct SchemaViolation : public Error {
  using Error::Error;
};

// ---------------- prompting ----------------

struct MissingBinding : public Error {
  std::string name;
  explicit MissingBinding(std::string placeholder)
      : Error("no binding for placeholder {" + placeholder + "}"), name(std::move(placeholder)) {}
};

struct UnknownPlaceholder : public Error {
  std::string name;
  explicit UnknownPlaceholder(std::string placeholder)
      : Error("binding {" + placeholder + "} does not appear in the template"), name(std::move(placeholder)) {}
};

struct NoStatementsFound : public Error {
  using Error::Error;
};

// ---------------- verdict parsing ----------------

struct ZeroVerdicts : public Error {
  using Error::Error;
};

struct UnsupportedSchema : public Error {
  using Error::Error;
};

struct UnknownState : public Error {
  using Error::Error;
};

struct IndexCoverageError : public Error {
  using Error::Error;
};

// ---------------- metrics ----------------

struct UndefinedScore : public Error {
  using Error::Error;
};

struct LengthMismatch : public Error {
  using Error::Error;
};

struct EmptyInput : public Error {
  using Error::Error;
};

struct DegenerateInput : public Error {
  using Error::Error;
};

// ---------------- datasets / config ----------------

struct DatasetError : public Error {
  using Error::Error;
};

struct FileNotFound : public DatasetError {
  using DatasetError::DatasetError;
};

struct RecordIssue {
  std::size_t line{0};  // 1-based
  std::string message;
};

struct RecordValidationError : public DatasetError {
  std::vector<RecordIssue> issues;

  explicit RecordValidationError(std::vector<RecordIssue> found)
      : DatasetError(describe(found)), issues(std::move(found)) {}

 private:
  static std::string describe(const std::vector<RecordIssue>& found) {
    std::string out = "invalid records:";
    for (const auto& issue : found) {
      out += "\n  line " + std::to_string(issue.line) + ": " + issue.message;
    }
    return out;
  }
};

struct DuplicateId : public DatasetError {
  std::string id;
  std::size_t line{0};
  DuplicateId(std::string sample_id, std::size_t at_line)
      : DatasetError("line " + std::to_string(at_line) + ": duplicate id '" + sample_id + "'"),
        id(std::move(sample_id)),
        line(at_line) {}
};

struct ConfigError : public Error {
  using Error::Error;
};

}  // namespace ragjudge
