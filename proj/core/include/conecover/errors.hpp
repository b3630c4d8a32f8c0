#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conecover {

// Base class for all domain errors. `code()` is a stable machine-readable
// identifier that reports reproduce verbatim; what() is the human text.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error("ParseError", msg) {}
};

class RowNotStochastic : public Error {
 public:
  RowNotStochastic(std::string vertex, double sum)
      : Error("RowNotStochastic",
              "row of vertex '" + vertex + "' sums to " + std::to_string(sum)),
        vertex(std::move(vertex)),
        sum(sum) {}
  std::string vertex;
  double sum;
};

class BackwardProbOutOfRange : public Error {
 public:
  BackwardProbOutOfRange(std::string vertex, double value, double eps)
      : Error("BackwardProbOutOfRange",
              "p(-" + vertex + ") = " + std::to_string(value) +
                  " outside (" + std::to_string(eps) + ", " +
                  std::to_string(1.0 - eps) + ")"),
        vertex(std::move(vertex)),
        value(value),
        epsilon(eps) {}
  std::string vertex;
  double value;
  double epsilon;
};

class MultiEdgeDetected : public Error {
 public:
  MultiEdgeDetected(std::string from, std::string to)
      : Error("MultiEdgeDetected",
              "parallel edges " + from + " -> " + to +
                  "; run expand_multiedges first"),
        from(std::move(from)),
        to(std::move(to)) {}
  std::string from, to;
};

class UnreachableVertex : public Error {
 public:
  explicit UnreachableVertex(std::string vertex)
      : Error("UnreachableVertex",
              "vertex '" + vertex + "' not reachable from root"),
        vertex(std::move(vertex)) {}
  std::string vertex;
};

class UnknownVertex : public Error {
 public:
  explicit UnknownVertex(std::string vertex)
      : Error("UnknownVertex", "unknown vertex '" + vertex + "'"),
        vertex(std::move(vertex)) {}
  std::string vertex;
};

class InvalidEdgeProbability : public Error {
 public:
  InvalidEdgeProbability(std::string from, std::string to, double value)
      : Error("InvalidEdgeProbability",
              "edge " + from + " -> " + to + " has probability " +
                  std::to_string(value)),
        from(std::move(from)),
        to(std::move(to)),
        value(value) {}
  std::string from, to;
  double value;
};

class NoOutEdges : public Error {
 public:
  explicit NoOutEdges(std::string vertex)
      : Error("NoOutEdges", "vertex '" + vertex + "' has no outgoing edges"),
        vertex(std::move(vertex)) {}
  std::string vertex;
};

class BadGeneratorSpec : public Error {
 public:
  explicit BadGeneratorSpec(const std::string& msg)
      : Error("BadGeneratorSpec", msg) {}
};

class GeneratorFailure : public Error {
 public:
  explicit GeneratorFailure(const std::string& msg)
      : Error("GeneratorFailure", msg) {}
};

class ZeroMatrix : public Error {
 public:
  ZeroMatrix() : Error("ZeroMatrix", "truncated ball induces the zero matrix") {}
};

class NonConvergence : public Error {
 public:
  NonConvergence(std::int64_t max_iters, double previous, double last)
      : Error("NonConvergence",
              "no convergence after " + std::to_string(max_iters) +
                  " iterations; last estimates " + std::to_string(previous) +
                  ", " + std::to_string(last)),
        max_iters(max_iters),
        previous_estimate(previous),
        last_estimate(last) {}
  std::int64_t max_iters;
  double previous_estimate;
  double last_estimate;
};

class NonPositiveTestFunction : public Error {
 public:
  explicit NonPositiveTestFunction(std::string vertex)
      : Error("NonPositiveTestFunction",
              "test function not strictly positive at '" + vertex + "'"),
        vertex(std::move(vertex)) {}
  std::string vertex;
};

class SingularCollapse : public Error {
 public:
  SingularCollapse()
      : Error("SingularCollapse", "running matrix product collapsed to zero") {}
};

class MaxIterExceeded : public Error {
 public:
  MaxIterExceeded(std::int64_t iters, double residual)
      : Error("MaxIterExceeded",
              "fixed-point iteration hit " + std::to_string(iters) +
                  " iterations, residual " + std::to_string(residual)),
        iterations(iters),
        residual(residual) {}
  std::int64_t iterations;
  double residual;
};

class TruncationRequired : public Error {
 public:
  TruncationRequired()
      : Error("TruncationRequired",
              "infinite base graph: a truncation radius is required") {}
};

class SingularSystem : public Error {
 public:
  explicit SingularSystem(const std::string& msg)
      : Error("SingularSystem", msg) {}
};

class RecurrentType : public Error {
 public:
  explicit RecurrentType(std::string vertex)
      : Error("RecurrentType",
              "F(-" + vertex + ") >= 1: exit chain undefined for recurrent type"),
        vertex(std::move(vertex)) {}
  std::string vertex;
};

class Reducible : public Error {
 public:
  Reducible(const std::string& msg, std::vector<std::string> component)
      : Error("Reducible", msg), component(std::move(component)) {}
  std::vector<std::string> component;
};

class NotTransientEnough : public Error {
 public:
  explicit NotTransientEnough(double escape_fraction)
      : Error("NotTransientEnough",
              "escape fraction " + std::to_string(escape_fraction) +
                  " below the transience guard"),
        escape_fraction(escape_fraction) {}
  double escape_fraction;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error("UsageError", msg) {}
};

}  // namespace conecover
