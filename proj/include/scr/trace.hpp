#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace scr {

enum class StepClass { VerySuccessful, Successful, Unsuccessful, None };

const char* step_class_name(StepClass c);
StepClass step_class_from_name(const std::string& name);

/// One benchmark row per outer iteration. Baselines fill the SCR-specific
/// columns with sentinels (NaN for rho/sigma, -1 for sizes and krylov_dim).
struct TraceRecord {
  int64_t iteration = 0;
  double seconds = 0.0;        // wall clock since run start
  double epochs = 0.0;         // cumulative sample evaluations / n
  double f_full = 0.0;         // full-dataset objective after the iteration
  double grad_norm_full = std::numeric_limits<double>::quiet_NaN();  // when computed
  double rho = std::numeric_limits<double>::quiet_NaN();
  StepClass step_class = StepClass::None;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  int64_t grad_samples = -1;  // |S_g|
  int64_t hess_samples = -1;  // |S_B|
  double step_norm = std::numeric_limits<double>::quiet_NaN();
  int64_t krylov_dim = -1;
};

struct Trace {
  // State at the starting point, before any step.
  double initial_f = 0.0;
  double initial_grad_norm = 0.0;
  std::vector<TraceRecord> records;
};

/// Canonical shortest round-trip-exact formatting ("%.17g").
std::string format_double(double v);

const char* trace_csv_header();

/// zero_time replaces the wall-clock column with 0 so repeated runs of a
/// deterministic configuration produce byte-identical files.
void write_trace_csv(const Trace& trace, std::ostream& out, bool zero_time = false);
void write_trace_csv(const Trace& trace, const std::string& path, bool zero_time = false);

Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::string& path);

/// Header + per-row column count/type validation; throws ParseError.
void validate_trace_schema(std::istream& in);

}  // namespace scr
