#pragma once

// Abstract syntax, concrete syntax and elaboration of noisy quantum while-programs.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qrobust/quantum.hpp"

namespace qrobust {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

// Expressions for matrices, channels and scalars.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    Number,     // text holds the literal; imaginary marks a trailing i
    Ident,      // name reference: parameter, definition or builtin
    Call,       // text(args...); pattern is set for controlled-X gates like 11-TOFFOLI
    Unary,      // text "-"
    Binary,     // text "+", "-", "*", "/"
    Matrix,     // rows of scalar expressions
    Ket,        // text is the label between | and >
    Outer,      // text is ket label, pattern is bra label
    KrausList,  // {E1, E2, ...}
    BitString,  // argument of proj(...)
  };
  Kind kind = Kind::Number;
  std::string text;
  std::string pattern;
  bool imaginary = false;
  std::vector<ExprPtr> args;
  std::vector<std::size_t> row_sizes;  // Matrix only: args are stored row-major
  SourceLoc loc;

  static ExprPtr number(double value);
  static ExprPtr number_text(std::string text, bool imaginary = false);
  static ExprPtr ident(std::string name);
  static ExprPtr call(std::string name, std::vector<ExprPtr> args);
  static ExprPtr controlled_x(std::string pattern);
};

std::string to_string(const ExprPtr& e);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

enum class NodeKind { Skip, Init, Unitary, Seq, Case, While };
const char* to_string(NodeKind k);

struct Node;

// Immutable handle to a program tree.
class Program {
 public:
  Program() = default;
  explicit Program(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Program skip();
  static Program init(std::string var);
  static Program unitary(std::vector<std::string> vars, ExprPtr gate, ExprPtr noise_prob = nullptr,
                         ExprPtr noise_channel = nullptr);
  static Program seq(std::vector<Program> items);
  static Program case_of(std::vector<std::string> vars, std::string measurement, std::vector<std::string> labels,
                         std::vector<Program> branches);
  static Program while_loop(std::vector<std::string> vars, std::string measurement, Program body);

  const Node& node() const { return *node_; }
  const Node* operator->() const { return node_.get(); }
  const std::shared_ptr<const Node>& ptr() const { return node_; }
  bool valid() const { return node_ != nullptr; }
  NodeKind kind() const;
  const std::vector<Program>& children() const;

 private:
  std::shared_ptr<const Node> node_;
};

// Operators resolved during elaboration.
struct Resolved {
  ComplexMatrix unitary;              // Unitary
  double probability = 0.0;           // Unitary
  std::optional<Superoperator> noise;  // Unitary, present when probability > 0 or channel given
  Measurement measurement;            // Case/While
};

struct Node {
  NodeKind kind = NodeKind::Skip;
  std::vector<std::string> vars;
  ExprPtr gate;
  ExprPtr noise_prob;
  ExprPtr noise_channel;
  std::string measurement;
  std::vector<std::string> labels;
  std::vector<Program> children;
  SourceLoc loc;
  std::shared_ptr<const Resolved> resolved;
};

// Structural equality of syntax (resolved data is ignored).
bool operator==(const Program& a, const Program& b);
inline bool operator!=(const Program& a, const Program& b) { return !(a == b); }

// Clears every noise annotation.
Program ideal(const Program& p);
// Keeps noise channels but sets every probability to zero.
Program zero_noise(const Program& p);
std::size_t node_count(const Program& p);
std::size_t depth(const Program& p);
bool contains(const Program& p, NodeKind k);
// Child-index path: Seq item i, Case branch i, While body 0.
Program at_path(const Program& p, const std::vector<std::size_t>& path);
std::string path_to_string(const std::vector<std::size_t>& path);

enum class VarType { Qubit, Ancilla, Int };

struct VarDecl {
  std::string name;
  VarType type = VarType::Qubit;
  SourceLoc loc;
};

struct Definition {
  enum class Kind { Param, Gate, Channel, Measurement };
  Kind kind = Kind::Gate;
  std::string name;
  ExprPtr value;                                   // Param, Gate, Channel
  std::vector<std::pair<std::string, ExprPtr>> outcomes;  // Measurement
  SourceLoc loc;
};

struct SourceFile {
  std::string name;
  std::vector<VarDecl> decls;
  std::vector<Definition> defs;
  Program body;
};

SourceFile parse(const std::string& text);
std::string to_source(const SourceFile& f);
std::string to_source(const Program& p, int indent = 0);

using ParamMap = std::map<std::string, double>;

// Fully resolved program ready for evaluation.
struct Elaborated {
  std::string name;
  Register reg;                     // declaration order; factor 0 is the most significant
  std::vector<std::string> ancillas;
  ParamMap params;
  Program body;
  std::map<std::string, ComplexMatrix> gates;
  std::map<std::string, Superoperator> channels;
  std::map<std::string, Measurement> measurements;
};

// Diagnostics for unitarity, completeness, trace-non-increase, probability range and unsupported types.
std::vector<std::string> validate(const SourceFile& f, const ParamMap& overrides = {});
// Throws ValidationError with the diagnostics when validation fails.
Elaborated elaborate(const SourceFile& f, const ParamMap& overrides = {});
// Re-resolves a transformed body (ideal, zero_noise, subtrees) in the context of an elaboration.
Program resolve(const Elaborated& ctx, const Program& p);

// Evaluates a free-standing expression (builtins, literals, definitions of ctx when given).
ComplexMatrix eval_matrix(const std::string& text, const Elaborated* ctx = nullptr);
Superoperator eval_channel(const std::string& text, const Elaborated* ctx = nullptr);
ExprPtr parse_expr(const std::string& text);

// Builtin single-qubit measurements: "std" (labels 0, 1) and "pm" (labels +, -).
std::optional<Measurement> builtin_measurement(const std::string& name);

// Variables whose first access on every execution path is an initialisation.
std::vector<std::string> initialized_first(const Program& p, const Register& reg);
// All variables mentioned by the statement.
std::vector<std::string> touched_vars(const Program& p);

}  // namespace qrobust
