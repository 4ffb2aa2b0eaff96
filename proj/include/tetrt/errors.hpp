#pragma once

#include <stdexcept>
#include <string>

namespace tetrt {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A mesh that breaks one of the structural invariants (adjacency, orientation, links).
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, long tet_a = -1, long tet_b = -1)
      : Error(what), tet_a_(tet_a), tet_b_(tet_b) {}

  long tet_a() const noexcept { return tet_a_; }
  long tet_b() const noexcept { return tet_b_; }

 private:
  long tet_a_;
  long tet_b_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, long line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  long line() const noexcept { return line_; }

 private:
  std::string file_;
  long line_;
};

class AssociationError : public Error {
 public:
  using Error::Error;
};

// Traversal ran longer than the mesh has tetrahedra.
class CorruptMeshError : public Error {
 public:
  using Error::Error;
};

// Ray origin is not inside the tetrahedron the caller claimed.
class InvalidStartError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tetrt
