// Copyright 2026 the cocycle-lab developers.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cocyclelab {

// Every library error derives from Error and carries a numeric-vs-precondition
// classification used by the CLI exit codes (2 = precondition, 3 = numerical).
class Error : public std::runtime_error {
 public:
  enum class Kind { precondition, numerical };
  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class PreconditionViolation : public Error {
 public:
  explicit PreconditionViolation(const std::string& what)
      : Error(Kind::precondition, what) {}
};

class GapTooLarge : public Error {
 public:
  explicit GapTooLarge(const std::string& what) : Error(Kind::numerical, what) {}
};

class PrecisionExhausted : public Error {
 public:
  explicit PrecisionExhausted(const std::string& what) : Error(Kind::numerical, what) {}
};

class AliasingDetected : public Error {
 public:
  explicit AliasingDetected(const std::string& what) : Error(Kind::numerical, what) {}
};

class SymmetryViolated : public Error {
 public:
  explicit SymmetryViolated(const std::string& what) : Error(Kind::precondition, what) {}
};

class PeriodMismatch : public Error {
 public:
  explicit PeriodMismatch(const std::string& what) : Error(Kind::precondition, what) {}
};

class SmallDenominator : public Error {
 public:
  SmallDenominator(long mode, double magnitude, const std::string& what)
      : Error(Kind::numerical, what), mode_(mode), magnitude_(magnitude) {}
  long mode() const { return mode_; }
  double magnitude() const { return magnitude_; }

 private:
  long mode_;
  double magnitude_;
};

class ChartEscape : public Error {
 public:
  explicit ChartEscape(const std::string& what) : Error(Kind::numerical, what) {}
};

class Stalled : public Error {
 public:
  explicit Stalled(const std::string& what) : Error(Kind::numerical, what) {}
};

class NotUnimodular : public Error {
 public:
  explicit NotUnimodular(const std::string& what) : Error(Kind::precondition, what) {}
};

class SeamMatchFailed : public Error {
 public:
  explicit SeamMatchFailed(const std::string& what) : Error(Kind::numerical, what) {}
};

class ZeroLeadingCoefficient : public Error {
 public:
  explicit ZeroLeadingCoefficient(const std::string& what)
      : Error(Kind::precondition, what) {}
};

class UnderResolved : public Error {
 public:
  explicit UnderResolved(const std::string& what) : Error(Kind::numerical, what) {}
};

// Pipeline stages rethrow with a stage tag so a failure names the stage it
// happened in.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& inner)
      : Error(inner.kind(), "[" + stage + "] " + inner.what()), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace cocyclelab
