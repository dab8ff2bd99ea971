#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rigmotion {

// Every failure surfaced by the library carries a stable machine-readable
// code ("NotATree", "SyntaxError", ...). The service and CLI report it as-is.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, std::string expected, const std::string& found = {})
      : Error("SyntaxError", describe(line, column, expected, found)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  static std::string describe(int line, int column, const std::string& expected,
                              const std::string& found) {
    std::string msg = "line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": expected " + expected;
    if (!found.empty()) msg += ", found '" + found + "'";
    return msg;
  }

  int line_;
  int column_;
  std::string expected_;
};

class ArityError : public Error {
 public:
  ArityError(std::string section, int line, int expected, int found)
      : Error("ArityError", "line " + std::to_string(line) + ": section '" + section +
                                "' needs tuples of " + std::to_string(expected) +
                                " numbers, found " + std::to_string(found)),
        section_(std::move(section)),
        line_(line) {}

  const std::string& section() const noexcept { return section_; }
  int line() const noexcept { return line_; }

 private:
  std::string section_;
  int line_;
};

// Raised when the validate-and-repair loop runs out of attempts.
class GenerationFailure : public Error {
 public:
  GenerationFailure(std::string code, int attempts, std::vector<std::string> last_errors,
                    std::vector<std::string> repair_notes)
      : Error(std::move(code), summarize(attempts, last_errors)),
        attempts_(attempts),
        last_errors_(std::move(last_errors)),
        repair_notes_(std::move(repair_notes)) {}

  int attempts() const noexcept { return attempts_; }
  const std::vector<std::string>& last_errors() const noexcept { return last_errors_; }
  const std::vector<std::string>& repair_notes() const noexcept { return repair_notes_; }

 private:
  static std::string summarize(int attempts, const std::vector<std::string>& errors) {
    std::string msg = "no valid output after " + std::to_string(attempts) + " attempt(s)";
    if (!errors.empty()) msg += ": " + errors.front();
    return msg;
  }

  int attempts_;
  std::vector<std::string> last_errors_;
  std::vector<std::string> repair_notes_;
};

}  // namespace rigmotion
