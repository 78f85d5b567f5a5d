#pragma once

// Command implementations behind the qrobust tool and the reports they produce.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrobust/logic.hpp"

namespace qrobust {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// A computed number with the uncertainty that goes with it.
struct Quantity {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;  // solver or comparison tolerance
  double residual = 0.0;   // truncation mass added to guaranteed bounds
};

struct NoiseEcho {
  AstPath path;
  std::string statement;
  double probability = 0.0;
  std::string channel;
};

struct ReportInputs {
  std::string file;
  ParamMap params;
  std::string annotation;  // path of the annotation document, empty when none
  std::map<std::string, std::string> options;  // flags as given (specs, Q, lambda, mode, ...)
  std::map<std::string, double> tolerances;
  std::vector<NoiseEcho> noise;
  std::uint64_t seed = 0;
};

struct LoopReport {
  AstPath path;
  bool bounded = false;
  double a = 1.0;
  int n = 0;
  double off_support_leak = 0.0;
  std::string diagnostic;
};

struct NamedMatrix {
  std::string name;
  ComplexMatrix value;
};

struct TraceStep {
  std::size_t index = 0;
  std::string program;  // remaining program, empty once terminated
  double trace = 0.0;
  ComplexMatrix state;
};

struct DerivationSummary {
  std::string rule;
  double epsilon = 0.0;
  double lambda = 0.0;
  std::size_t nodes = 0;
  bool verified = false;
  std::string document;  // derivation document, as produced by derivation_to_json
};

struct AnalysisReport {
  int schema_version = kReportSchemaVersion;
  std::string tool_version = kToolVersion;
  std::string command;
  std::string program;
  ReportInputs inputs;
  std::vector<Quantity> results;
  std::optional<DerivationSummary> derivation;
  std::vector<LoopReport> loops;
  std::vector<NamedMatrix> matrices;
  std::vector<TraceStep> trace;
  std::vector<std::string> notes;        // informational remarks
  std::vector<std::string> diagnostics;  // errors, also written to standard error
  int exit_code = 0;
  double seconds = 0.0;

  const Quantity* find(const std::string& name) const;
};

// {"schema_version": 1, ...}; a batch is {"schema_version": 1, "reports": [...]}.
std::string report_to_json(const AnalysisReport& r);
std::string reports_to_json(const std::vector<AnalysisReport>& rs);
// Throws ValidationError on malformed or foreign-version documents.
AnalysisReport report_from_json(const std::string& text);
std::vector<AnalysisReport> reports_from_json(const std::string& text);
std::string report_to_text(const AnalysisReport& r, bool tree = false);

// Exit code for an exception escaping a command: 2 for input problems, 3 for numerical ones.
int exit_code_for(const std::exception& ex);

struct AnalyzeRequest {
  std::string file;
  ParamMap params;
  std::optional<std::string> annotation;  // explicit document
  bool discover_annotation = true;        // use <stem>.annot.json next to the program when present
  bool semantic = false;
  std::string dump_sdp;
  std::uint64_t seed = 0;
};

struct DiamondRequest {
  std::string spec_a;
  std::string spec_b;
  std::string q;  // empty: identity
  double lambda = 0.0;
  std::string definitions;  // optional .qw file whose definition table the specs may name
  ParamMap params;
  int trials = 2000;
  std::uint64_t seed = 0;
  std::string dump_sdp;
};

struct BoundedRequest {
  std::string file;
  ParamMap params;
  int n_max = 10;
};

struct SimulateRequest {
  std::string file;
  ParamMap params;
  std::string input;
  std::string mode = "op";
};

// Each command fills exit_code; exceptions that escape are mapped with exit_code_for.
AnalysisReport cmd_analyze(const AnalyzeRequest& req);
AnalysisReport cmd_diamond(const DiamondRequest& req);
AnalysisReport cmd_bounded(const BoundedRequest& req);
AnalysisReport cmd_simulate(const SimulateRequest& req);

// Channel spec: ';'-separated factors multiplied left to right, so "H;Z" is the unitary H Z.
Superoperator channel_from_spec(const std::string& spec, const Elaborated* ctx = nullptr);
// "proj<bits>" for a computational-basis projector, otherwise a matrix expression.
ComplexMatrix predicate_from_spec(const std::string& spec, const Elaborated* ctx = nullptr);
// Basis label, ket or density-matrix expression; kets are turned into projectors.
ComplexMatrix state_from_spec(const std::string& spec, const Elaborated& e);

}  // namespace qrobust
