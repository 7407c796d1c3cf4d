#pragma once

#include <stdexcept>
#include <string>

namespace probfp {

// Base for every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class invalid_argument : public error {
 public:
  using error::error;
};

class singular_division : public error {
 public:
  using error::error;
};

// Work that would need an infeasible enumeration (format too wide).
class feasibility_error : public error {
 public:
  using error::error;
};

class unbound_variable : public error {
 public:
  explicit unbound_variable(std::string name)
      : error("unbound variable '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class syntax_error : public error {
 public:
  syntax_error(const std::string& msg, int line, int column)
      : error("syntax error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class unsupported_semantics : public error {
 public:
  using error::error;
};

class tree_violation : public error {
 public:
  using error::error;
};

// Malformed analysis spec (schema or value errors).
class spec_error : public error {
 public:
  using error::error;
};

}  // namespace probfp
