#include "scr/trace.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "scr/common.hpp"

namespace scr {

namespace {

constexpr const char* kHeader =
    "iteration,seconds,epochs,f_full,grad_norm_full,rho,step_class,sigma,grad_samples,"
    "hess_samples,step_norm,krylov_dim";
constexpr int kColumns = 12;

double parse_double(const std::string& field, int64_t line) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') throw ParseError("bad numeric field: " + field, line);
  return v;
}

int64_t parse_int(const std::string& field, int64_t line) {
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0') throw ParseError("bad integer field: " + field, line);
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

const char* step_class_name(StepClass c) {
  switch (c) {
    case StepClass::VerySuccessful: return "very_successful";
    case StepClass::Successful: return "successful";
    case StepClass::Unsuccessful: return "unsuccessful";
    case StepClass::None: return "-";
  }
  return "-";
}

StepClass step_class_from_name(const std::string& name) {
  if (name == "very_successful") return StepClass::VerySuccessful;
  if (name == "successful") return StepClass::Successful;
  if (name == "unsuccessful") return StepClass::Unsuccessful;
  if (name == "-") return StepClass::None;
  throw ParseError("unknown step class: " + name);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* trace_csv_header() { return kHeader; }

void write_trace_csv(const Trace& trace, std::ostream& out, bool zero_time) {
  out << kHeader << '\n';
  // Row -1 carries the starting point so suboptimality curves include it.
  out << "-1,0," << "0," << format_double(trace.initial_f) << ','
      << format_double(trace.initial_grad_norm) << ",nan,-,nan,-1,-1,nan,-1\n";
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << format_double(zero_time ? 0.0 : r.seconds) << ','
        << format_double(r.epochs) << ',' << format_double(r.f_full) << ','
        << format_double(r.grad_norm_full) << ',' << format_double(r.rho) << ','
        << step_class_name(r.step_class) << ',' << format_double(r.sigma) << ','
        << r.grad_samples << ',' << r.hess_samples << ',' << format_double(r.step_norm) << ','
        << r.krylov_dim << '\n';
  }
}

void write_trace_csv(const Trace& trace, const std::string& path, bool zero_time) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_trace_csv(trace, out, zero_time);
  if (!out) throw IoError("write failed: " + path);
}

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace file");
  if (line != kHeader) throw ParseError("unexpected trace header", 1);

  Trace trace;
  int64_t line_no = 1;
  bool saw_initial = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (static_cast<int>(fields.size()) != kColumns)
      throw ParseError("expected " + std::to_string(kColumns) + " columns", line_no);
    TraceRecord r;
    r.iteration = parse_int(fields[0], line_no);
    r.seconds = parse_double(fields[1], line_no);
    r.epochs = parse_double(fields[2], line_no);
    r.f_full = parse_double(fields[3], line_no);
    r.grad_norm_full = parse_double(fields[4], line_no);
    r.rho = parse_double(fields[5], line_no);
    r.step_class = step_class_from_name(fields[6]);
    r.sigma = parse_double(fields[7], line_no);
    r.grad_samples = parse_int(fields[8], line_no);
    r.hess_samples = parse_int(fields[9], line_no);
    r.step_norm = parse_double(fields[10], line_no);
    r.krylov_dim = parse_int(fields[11], line_no);
    if (r.iteration == -1) {
      trace.initial_f = r.f_full;
      trace.initial_grad_norm = r.grad_norm_full;
      saw_initial = true;
    } else {
      trace.records.push_back(r);
    }
  }
  if (!saw_initial) throw ParseError("trace has no starting-point row");
  return trace;
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_trace_csv(in);
}

void validate_trace_schema(std::istream& in) { (void)read_trace_csv(in); }

}  // namespace scr
