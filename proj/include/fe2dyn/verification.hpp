#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fe2dyn {

/// One acceptance check: measured value vs oracle at a declared tolerance.
struct OracleReport {
  std::string name;
  double measured = 0.0;
  double oracle = 0.0;
  double tolerance = 0.0;
  std::string kind;  // "max" (measured <= tolerance), "rel", "min" (measured >= tolerance)
  bool pass = false;
  std::string note;
};

/// The single place where acceptance tolerances live.
struct ToleranceEntry {
  const char* name;
  double value;
  const char* kind;
};

std::span<const ToleranceEntry> acceptance_tolerances();

struct VerificationOptions {
  int threads = 1;
  std::ostream* log = nullptr;  // per-criterion progress lines
};

/// Runs all acceptance criteria on desk-scale scenarios and returns one
/// report per criterion, in order.
std::vector<OracleReport> run_acceptance(const VerificationOptions& options = {});

std::string reports_csv(const std::vector<OracleReport>& reports);
std::string reports_markdown(const std::vector<OracleReport>& reports);

}  // namespace fe2dyn
