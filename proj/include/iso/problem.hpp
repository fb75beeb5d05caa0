#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iso/cost.hpp"
#include "iso/distribution.hpp"
#include "iso/envelope.hpp"
#include "iso/exponents.hpp"

namespace iso {

// Parse/validation failure with the offending field named.
struct problem_error : std::runtime_error {
  std::string field;
  problem_error(std::string f, const std::string& msg)
      : std::runtime_error(f + ": " + msg), field(std::move(f)) {}
};

struct ProblemSpec {
  Distribution p_x;
  Distribution p_y;
  CostMatrix cost;
  bool metric = false;
  double p_exponent = 1.0;
  SearchConfig search;

  ProblemSpec(Distribution px, Distribution py, CostMatrix c)
      : p_x(std::move(px)), p_y(std::move(py)), cost(std::move(c)) {}
};

struct ResultRow {
  std::string quantity;
  double alpha = 0.0, tau = 0.0, lambda = 0.0;
  size_t n = 0;
  ExtReal value;
  std::string method;
  double wall_ms = 0.0;
};

// JSON problem file -> validated spec; throws problem_error naming the field.
ProblemSpec parse_problem(const std::string& path);
ProblemSpec parse_problem_text(const std::string& text);

// CSV with header alpha,tau,value,method; +inf as the literal `inf`;
// row order follows the grid (alpha-major).
void emit_curve(const ExponentCurve& curve, const std::string& path);
ExponentCurve parse_curve(const std::string& path);

std::string format_value(const ExtReal& v);

// 64-bit FNV-1a of a byte string / file contents.
std::uint64_t fnv1a(const std::string& data);
std::uint64_t fnv1a_file(const std::string& path);

// manifest.json in dir: per-file content hashes plus the run seed.
void write_manifest(const std::string& dir, const std::vector<std::string>& files,
                    std::uint64_t seed);

// Driver entry shared by the binary and the tests; returns the exit code
// (0 ok, 1 usage, 2 input validation, 3 guard violation, 4 verify failure).
int run_cli(int argc, const char* const* argv);

}  // namespace iso
