#pragma once

#include <stdexcept>
#include <string>

namespace vfkit {

// Base class for everything this library throws on bad input.
class Error : public std::runtime_error {
 public:
  explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

// Multiplication table fails one of the group axioms.
class NotAGroup : public Error {
 public:
  enum class Reason { Identity, Inverses, Associativity, LatinSquare };

  NotAGroup(Reason reason, std::string msg)
      : Error(std::move(msg)), reason(reason) {}

  Reason reason;
};

class GroupTooLarge : public Error {
 public:
  using Error::Error;
};

class NotInjective : public Error {
 public:
  using Error::Error;
};

class NotHomomorphism : public Error {
 public:
  using Error::Error;
};

class Disconnected : public Error {
 public:
  Disconnected(int u, int v, std::string msg)
      : Error(std::move(msg)), witness_u(u), witness_v(v) {}

  int witness_u;
  int witness_v;
};

class NotClosed : public Error {
 public:
  using Error::Error;
};

class IsATree : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class EdgePairGroupMismatch : public Error {
 public:
  using Error::Error;
};

class BaseMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownEdge : public Error {
 public:
  using Error::Error;
};

class UnknownElement : public Error {
 public:
  using Error::Error;
};

class IdentityGenerator : public Error {
 public:
  IdentityGenerator(int index, std::string msg)
      : Error(std::move(msg)), index(index) {}

  int index;
};

// A folding merge tried to identify (B,x) with (B,x*s), s != identity: the
// generated subgroup meets a conjugate of a vertex group nontrivially.
class FreeActionViolation : public Error {
 public:
  FreeActionViolation(int vertex_type, int twist, std::string msg)
      : Error(std::move(msg)), vertex_type(vertex_type), twist(twist) {}

  int vertex_type;
  int twist;
  std::string subgroup;  // filled in by callers that know the subgroup name
};

class AmbientMismatch : public Error {
 public:
  using Error::Error;
};

// Oracle resource caps (ball depth, vertex count, element set size).
class CapExceeded : public Error {
 public:
  using Error::Error;
};

// Instance file is structurally malformed (missing keys, bad indices).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A statement the implementation guarantees failed to hold; always a bug.
class InternalCheckFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace vfkit
