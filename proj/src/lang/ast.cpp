#include <algorithm>
#include <cstdio>
#include <functional>

#include "qrobust/lang.hpp"

namespace qrobust {

ExprPtr Expr::number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Number;
  e->text = buf;
  return e;
}

ExprPtr Expr::number_text(std::string text, bool imaginary) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Number;
  e->text = std::move(text);
  e->imaginary = imaginary;
  return e;
}

ExprPtr Expr::ident(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Ident;
  e->text = std::move(name);
  return e;
}

ExprPtr Expr::call(std::string name, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Call;
  e->text = std::move(name);
  e->args = std::move(args);
  return e;
}

ExprPtr Expr::controlled_x(std::string pattern) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Call;
  e->text = "TOFFOLI";
  e->pattern = std::move(pattern);
  return e;
}

std::string to_string(const ExprPtr& e) {
  if (!e) return "";
  switch (e->kind) {
    case Expr::Kind::Number: return e->text + (e->imaginary ? "i" : "");
    case Expr::Kind::Ident: return e->text;
    case Expr::Kind::BitString: return e->text;
    case Expr::Kind::Ket: return "|" + e->text + ">";
    case Expr::Kind::Outer: return "|" + e->text + "><" + e->pattern + "|";
    case Expr::Kind::Call: {
      if (!e->pattern.empty()) return e->pattern + "-" + e->text;
      std::string s = e->text + "(";
      for (std::size_t i = 0; i < e->args.size(); ++i) s += (i ? ", " : "") + to_string(e->args[i]);
      return s + ")";
    }
    case Expr::Kind::Unary: return "(" + e->text + to_string(e->args[0]) + ")";
    case Expr::Kind::Binary: return "(" + to_string(e->args[0]) + " " + e->text + " " + to_string(e->args[1]) + ")";
    case Expr::Kind::Matrix: {
      std::string s = "[";
      std::size_t k = 0;
      for (std::size_t r = 0; r < e->row_sizes.size(); ++r) {
        s += r ? ", [" : "[";
        for (std::size_t c = 0; c < e->row_sizes[r]; ++c) s += (c ? ", " : "") + to_string(e->args[k++]);
        s += "]";
      }
      return s + "]";
    }
    case Expr::Kind::KrausList: {
      std::string s = "{";
      for (std::size_t i = 0; i < e->args.size(); ++i) s += (i ? ", " : "") + to_string(e->args[i]);
      return s + "}";
    }
  }
  return "";
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->text != b->text || a->pattern != b->pattern || a->imaginary != b->imaginary ||
      a->row_sizes != b->row_sizes || a->args.size() != b->args.size())
    return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!expr_equal(a->args[i], b->args[i])) return false;
  return true;
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Skip: return "Skip";
    case NodeKind::Init: return "Init";
    case NodeKind::Unitary: return "Unitary";
    case NodeKind::Seq: return "Seq";
    case NodeKind::Case: return "Case";
    case NodeKind::While: return "While";
  }
  return "?";
}

NodeKind Program::kind() const { return node_->kind; }
const std::vector<Program>& Program::children() const { return node_->children; }

Program Program::skip() {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Skip;
  return Program(n);
}

Program Program::init(std::string var) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Init;
  n->vars = {std::move(var)};
  return Program(n);
}

Program Program::unitary(std::vector<std::string> vars, ExprPtr gate, ExprPtr noise_prob, ExprPtr noise_channel) {
  if (!gate) throw Error("unitary statement needs a gate");
  if ((noise_prob == nullptr) != (noise_channel == nullptr)) throw Error("noise needs both a probability and a channel");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Unitary;
  n->vars = std::move(vars);
  n->gate = std::move(gate);
  n->noise_prob = std::move(noise_prob);
  n->noise_channel = std::move(noise_channel);
  return Program(n);
}

Program Program::seq(std::vector<Program> items) {
  if (items.size() < 2) throw Error("sequence needs at least two statements");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Seq;
  n->children = std::move(items);
  return Program(n);
}

Program Program::case_of(std::vector<std::string> vars, std::string measurement, std::vector<std::string> labels,
                         std::vector<Program> branches) {
  if (labels.size() != branches.size() || labels.empty()) throw Error("case needs one branch per label");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Case;
  n->vars = std::move(vars);
  n->measurement = std::move(measurement);
  n->labels = std::move(labels);
  n->children = std::move(branches);
  return Program(n);
}

Program Program::while_loop(std::vector<std::string> vars, std::string measurement, Program body) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::While;
  n->vars = std::move(vars);
  n->measurement = std::move(measurement);
  n->children = {std::move(body)};
  return Program(n);
}

bool operator==(const Program& a, const Program& b) {
  if (!a.valid() || !b.valid()) return a.valid() == b.valid();
  const Node& x = a.node();
  const Node& y = b.node();
  if (x.kind != y.kind || x.vars != y.vars || x.measurement != y.measurement || x.labels != y.labels ||
      x.children.size() != y.children.size())
    return false;
  if (!expr_equal(x.gate, y.gate) || !expr_equal(x.noise_prob, y.noise_prob) ||
      !expr_equal(x.noise_channel, y.noise_channel))
    return false;
  for (std::size_t i = 0; i < x.children.size(); ++i)
    if (!(x.children[i] == y.children[i])) return false;
  return true;
}

namespace {

Program map_tree(const Program& p, const std::function<void(Node&)>& fn) {
  auto n = std::make_shared<Node>(p.node());
  for (auto& c : n->children) c = map_tree(c, fn);
  fn(*n);
  return Program(n);
}

}  // namespace

Program ideal(const Program& p) {
  return map_tree(p, [](Node& n) {
    if (n.kind != NodeKind::Unitary) return;
    n.noise_prob = nullptr;
    n.noise_channel = nullptr;
    if (n.resolved) {
      auto r = std::make_shared<Resolved>(*n.resolved);
      r->probability = 0.0;
      r->noise.reset();
      n.resolved = r;
    }
  });
}

Program zero_noise(const Program& p) {
  return map_tree(p, [](Node& n) {
    if (n.kind != NodeKind::Unitary || !n.noise_prob) return;
    n.noise_prob = Expr::number_text("0");
    if (n.resolved) {
      auto r = std::make_shared<Resolved>(*n.resolved);
      r->probability = 0.0;
      n.resolved = r;
    }
  });
}

std::size_t node_count(const Program& p) {
  std::size_t c = 1;
  for (const auto& ch : p.children()) c += node_count(ch);
  return c;
}

std::size_t depth(const Program& p) {
  std::size_t d = 0;
  for (const auto& ch : p.children()) d = std::max(d, depth(ch));
  return d + 1;
}

bool contains(const Program& p, NodeKind k) {
  if (p.kind() == k) return true;
  for (const auto& ch : p.children())
    if (contains(ch, k)) return true;
  return false;
}

Program at_path(const Program& p, const std::vector<std::size_t>& path) {
  Program cur = p;
  for (std::size_t i : path) {
    if (i >= cur.children().size()) throw Error("path " + path_to_string(path) + " does not name a statement");
    cur = cur.children()[i];
  }
  return cur;
}

std::string path_to_string(const std::vector<std::size_t>& path) {
  std::string s = "[";
  for (std::size_t i = 0; i < path.size(); ++i) s += (i ? "," : "") + std::to_string(path[i]);
  return s + "]";
}

std::vector<std::string> touched_vars(const Program& p) {
  std::vector<std::string> out;
  std::function<void(const Program&)> walk = [&](const Program& q) {
    for (const auto& v : q->vars)
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    for (const auto& c : q.children()) walk(c);
  };
  walk(p);
  return out;
}

namespace {

// Classes of execution paths with respect to one variable.
enum PathClass : unsigned { kInitFirst = 1, kUsedFirst = 2, kUntouched = 4 };

unsigned first_access(const Program& p, const std::string& v) {
  const Node& n = p.node();
  const bool mentions = std::find(n.vars.begin(), n.vars.end(), v) != n.vars.end();
  switch (n.kind) {
    case NodeKind::Skip: return kUntouched;
    case NodeKind::Init: return mentions ? kInitFirst : kUntouched;
    case NodeKind::Unitary: return mentions ? kUsedFirst : kUntouched;
    case NodeKind::Seq: {
      unsigned acc = 0;
      bool reach = true;
      for (const auto& c : n.children) {
        if (!reach) break;
        const unsigned s = first_access(c, v);
        acc |= s & ~kUntouched;
        reach = (s & kUntouched) != 0;
      }
      return reach ? (acc | kUntouched) : acc;
    }
    case NodeKind::Case: {
      if (mentions) return kUsedFirst;
      unsigned acc = 0;
      for (const auto& c : n.children) acc |= first_access(c, v);
      return acc;
    }
    case NodeKind::While: {
      if (mentions) return kUsedFirst;
      return kUntouched | first_access(n.children[0], v);
    }
  }
  return kUsedFirst;
}

}  // namespace

std::vector<std::string> initialized_first(const Program& p, const Register& reg) {
  std::vector<std::string> out;
  for (const auto& v : reg)
    if (first_access(p, v) == kInitFirst) out.push_back(v);
  return out;
}

}  // namespace qrobust
