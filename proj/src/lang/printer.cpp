#include <sstream>

#include "qrobust/lang.hpp"

namespace qrobust {

namespace {

std::string join_vars(const std::vector<std::string>& vs) {
  std::string s;
  for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? ", " : "") + vs[i];
  return s;
}

std::string gate_text(const ExprPtr& g) {
  if (g->kind == Expr::Kind::Ident || g->kind == Expr::Kind::Call) return to_string(g);
  return "(" + to_string(g) + ")";
}

// A label that would lex as part of a ket needs surrounding spaces, which the printer always emits.
void print(std::ostringstream& os, const Program& p, int indent, bool nested_seq);

void print_list(std::ostringstream& os, const Program& p, int indent) {
  if (p.kind() == NodeKind::Seq) {
    const auto& items = p.children();
    for (std::size_t i = 0; i < items.size(); ++i) {
      print(os, items[i], indent, true);
      os << (i + 1 < items.size() ? ";\n" : "\n");
    }
  } else {
    print(os, p, indent, false);
    os << "\n";
  }
}

void print(std::ostringstream& os, const Program& p, int indent, bool nested_seq) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const Node& n = p.node();
  switch (n.kind) {
    case NodeKind::Skip: os << pad << "skip"; return;
    case NodeKind::Init: os << pad << n.vars[0] << " := |0>"; return;
    case NodeKind::Unitary:
      os << pad << join_vars(n.vars) << " := " << gate_text(n.gate) << "[" << join_vars(n.vars) << "]";
      if (n.noise_prob) os << " noisy(" << to_string(n.noise_prob) << ", " << to_string(n.noise_channel) << ")";
      return;
    case NodeKind::Seq:
      if (nested_seq) {
        os << pad << "(\n";
        print_list(os, p, indent + 1);
        os << pad << ")";
      } else {
        // Top-level sequence inside a block is printed as a plain list by the caller.
        std::ostringstream inner;
        print_list(inner, p, indent);
        std::string s = inner.str();
        if (!s.empty() && s.back() == '\n') s.pop_back();
        os << s;
      }
      return;
    case NodeKind::Case:
      os << pad << "case measure " << n.measurement << "[" << join_vars(n.vars) << "]\n";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        os << pad << "| " << n.labels[i] << " ->\n";
        print_list(os, n.children[i], indent + 1);
      }
      os << pad << "end";
      return;
    case NodeKind::While:
      os << pad << "while measure " << n.measurement << "[" << join_vars(n.vars) << "] = 1 do\n";
      print_list(os, n.children[0], indent + 1);
      os << pad << "end";
      return;
  }
}

}  // namespace

std::string to_source(const Program& p, int indent) {
  std::ostringstream os;
  print_list(os, p, indent);
  return os.str();
}

std::string to_source(const SourceFile& f) {
  std::ostringstream os;
  os << "program " << f.name << "\n";
  // Group consecutive declarations of the same type.
  for (std::size_t i = 0; i < f.decls.size();) {
    const VarType ty = f.decls[i].type;
    os << (ty == VarType::Qubit ? "qubits" : ty == VarType::Ancilla ? "ancilla" : "int");
    while (i < f.decls.size() && f.decls[i].type == ty) os << " " << f.decls[i++].name;
    os << ";\n";
  }
  for (const auto& d : f.defs) {
    switch (d.kind) {
      case Definition::Kind::Param: os << "param " << d.name << " = " << to_string(d.value) << ";\n"; break;
      case Definition::Kind::Gate: os << "gate " << d.name << " = " << to_string(d.value) << ";\n"; break;
      case Definition::Kind::Channel: os << "channel " << d.name << " = " << to_string(d.value) << ";\n"; break;
      case Definition::Kind::Measurement:
        os << "measurement " << d.name << " = {";
        for (std::size_t i = 0; i < d.outcomes.size(); ++i)
          os << (i ? ", " : " ") << d.outcomes[i].first << ": " << to_string(d.outcomes[i].second);
        os << " };\n";
        break;
    }
  }
  os << "\n" << to_source(f.body, 0);
  return os.str();
}

}  // namespace qrobust
