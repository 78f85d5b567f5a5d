#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "qrobust/lang.hpp"

namespace qrobust {

std::optional<Measurement> builtin_measurement(const std::string& name) {
  if (name == "std") return Measurement({{"0", projector(basis_ket("0"))}, {"1", projector(basis_ket("1"))}});
  if (name == "pm") {
    const double s = 1.0 / std::sqrt(2.0);
    const ComplexMatrix plus = (basis_ket("0") + basis_ket("1")) * cplx(s);
    const ComplexMatrix minus = (basis_ket("0") - basis_ket("1")) * cplx(s);
    return Measurement({{"+", projector(plus)}, {"-", projector(minus)}});
  }
  return std::nullopt;
}

namespace {

struct Value {
  enum class Kind { Scalar, Matrix, Channel } kind = Kind::Scalar;
  cplx scalar = 0.0;
  ComplexMatrix matrix;
  Superoperator channel;

  static Value of(cplx s) {
    Value v;
    v.scalar = s;
    return v;
  }
  static Value of(ComplexMatrix m) {
    Value v;
    v.kind = Kind::Matrix;
    v.matrix = std::move(m);
    return v;
  }
  static Value of(Superoperator c) {
    Value v;
    v.kind = Kind::Channel;
    v.channel = std::move(c);
    return v;
  }
};

struct Env {
  const ParamMap* params = nullptr;
  const std::map<std::string, ComplexMatrix>* gates = nullptr;
  const std::map<std::string, Superoperator>* channels = nullptr;
};

std::string where(const ExprPtr& e) {
  if (e->loc.line == 0) return "";
  return std::to_string(e->loc.line) + ":" + std::to_string(e->loc.column) + ": ";
}

[[noreturn]] void type_error(const ExprPtr& e, const std::string& msg) { throw Error(where(e) + msg); }

ComplexMatrix ket_of(const std::string& label) {
  const double s = 1.0 / std::sqrt(2.0);
  if (label == "+") return (basis_ket("0") + basis_ket("1")) * cplx(s);
  if (label == "-") return (basis_ket("0") - basis_ket("1")) * cplx(s);
  return basis_ket(label);
}

Value eval(const ExprPtr& e, const Env& env);

double real_scalar(const ExprPtr& e, const Env& env, const char* what) {
  Value v = eval(e, env);
  if (v.kind != Value::Kind::Scalar) type_error(e, std::string(what) + " must be a scalar");
  if (std::abs(v.scalar.imag()) > 1e-12) type_error(e, std::string(what) + " must be real");
  return v.scalar.real();
}

ComplexMatrix as_matrix(const ExprPtr& e, const Env& env) {
  Value v = eval(e, env);
  if (v.kind != Value::Kind::Matrix) type_error(e, "expected a matrix, got " + std::string(v.kind == Value::Kind::Scalar ? "a scalar" : "a channel"));
  return v.matrix;
}

Superoperator as_channel(Value v, const ExprPtr& e) {
  if (v.kind == Value::Kind::Channel) return v.channel;
  if (v.kind == Value::Kind::Matrix) {
    if (!v.matrix.square()) type_error(e, "a channel built from a matrix needs a square matrix");
    return Superoperator::unitary(v.matrix);
  }
  type_error(e, "expected a channel, got a scalar");
}

Value binary(const ExprPtr& e, const Value& a, const Value& b) {
  using K = Value::Kind;
  const std::string& op = e->text;
  if (a.kind == K::Channel || b.kind == K::Channel) type_error(e, "arithmetic on channels is not supported; use a Kraus list");
  if (op == "+" || op == "-") {
    const double sign = op == "+" ? 1.0 : -1.0;
    if (a.kind == K::Scalar && b.kind == K::Scalar) return Value::of(a.scalar + sign * b.scalar);
    if (a.kind == K::Matrix && b.kind == K::Matrix) {
      if (a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols()) type_error(e, "matrix shapes differ");
      return Value::of(a.matrix + b.matrix * cplx(sign));
    }
    type_error(e, "cannot add a scalar and a matrix");
  }
  if (op == "*") {
    if (a.kind == K::Scalar && b.kind == K::Scalar) return Value::of(a.scalar * b.scalar);
    if (a.kind == K::Scalar) return Value::of(b.matrix * a.scalar);
    if (b.kind == K::Scalar) return Value::of(a.matrix * b.scalar);
    if (a.matrix.cols() != b.matrix.rows()) type_error(e, "matrix product shapes differ");
    return Value::of(a.matrix * b.matrix);
  }
  if (op == "/") {
    if (b.kind != K::Scalar) type_error(e, "division by a matrix");
    if (b.scalar == cplx(0.0)) type_error(e, "division by zero");
    if (a.kind == K::Scalar) return Value::of(a.scalar / b.scalar);
    return Value::of(a.matrix * (cplx(1.0) / b.scalar));
  }
  type_error(e, "unknown operator " + op);
}

Value call(const ExprPtr& e, const Env& env) {
  const std::string& f = e->text;
  const auto& args = e->args;
  auto need = [&](std::size_t n) {
    if (args.size() != n) type_error(e, f + " takes " + std::to_string(n) + " argument(s)");
  };
  if (!e->pattern.empty()) return Value::of(builtins::controlled_x(e->pattern));
  if (f == "sqrt") {
    need(1);
    Value v = eval(args[0], env);
    if (v.kind != Value::Kind::Scalar) type_error(e, "sqrt expects a scalar");
    return Value::of(std::sqrt(v.scalar));
  }
  if (f == "proj") {
    if (args.empty()) type_error(e, "proj needs at least one bit string");
    ComplexMatrix p;
    for (const auto& a : args) {
      ComplexMatrix k = basis_ket(a->text);
      if (!p.empty() && p.rows() != k.rows()) type_error(e, "proj bit strings differ in length");
      p = p.empty() ? projector(k) : p + projector(k);
    }
    return Value::of(p);
  }
  if (f == "kron") {
    if (args.size() < 2) type_error(e, "kron needs at least two arguments");
    Value acc = eval(args[0], env);
    for (std::size_t i = 1; i < args.size(); ++i) {
      Value v = eval(args[i], env);
      if (acc.kind == Value::Kind::Matrix && v.kind == Value::Kind::Matrix) {
        acc = Value::of(kron(acc.matrix, v.matrix));
      } else if (acc.kind != Value::Kind::Scalar && v.kind != Value::Kind::Scalar) {
        acc = Value::of(tensor(as_channel(acc, args[0]), as_channel(v, args[i])));
      } else {
        type_error(e, "kron expects matrices or channels");
      }
    }
    return acc;
  }
  if (f == "kronpow") {
    need(2);
    const double n = real_scalar(args[1], env, "kronpow exponent");
    if (n != std::floor(n) || n < 1 || n > 8) type_error(e, "kronpow exponent must be an integer in 1..8");
    Value base = eval(args[0], env);
    if (base.kind == Value::Kind::Matrix) {
      ComplexMatrix m = base.matrix;
      for (int i = 1; i < static_cast<int>(n); ++i) m = kron(m, base.matrix);
      return Value::of(m);
    }
    Superoperator c = as_channel(base, args[0]);
    Superoperator acc = c;
    for (int i = 1; i < static_cast<int>(n); ++i) acc = tensor(acc, c);
    return Value::of(acc);
  }
  if (f == "compose") {
    need(2);
    Value later = eval(args[0], env), first = eval(args[1], env);
    if (later.kind == Value::Kind::Matrix && first.kind == Value::Kind::Matrix) return Value::of(later.matrix * first.matrix);
    return Value::of(compose(as_channel(later, args[0]), as_channel(first, args[1])));
  }
  if (f == "unitary") {
    need(1);
    return Value::of(as_channel(eval(args[0], env), args[0]));
  }
  if (f == "dagger") {
    need(1);
    return Value::of(dagger(as_matrix(args[0], env)));
  }
  if (f == "REP3") {
    need(1);
    return Value::of(builtins::repetition_logical(as_matrix(args[0], env)));
  }
  std::vector<double> params;
  for (const auto& a : args) params.push_back(real_scalar(a, env, "builtin parameter"));
  try {
    if (builtins::is_gate(f)) return Value::of(builtins::gate(f, params));
    if (builtins::is_channel(f)) return Value::of(builtins::channel(f, params));
  } catch (const UnknownGateError&) {
    throw;
  } catch (const Error& err) {
    type_error(e, err.what());
  }
  throw UnknownGateError(where(e) + "unknown function '" + f + "'");
}

Value eval(const ExprPtr& e, const Env& env) {
  switch (e->kind) {
    case Expr::Kind::Number: {
      char* end = nullptr;
      const double v = std::strtod(e->text.c_str(), &end);
      if (end == e->text.c_str()) type_error(e, "malformed number '" + e->text + "'");
      return Value::of(e->imaginary ? cplx(0.0, v) : cplx(v, 0.0));
    }
    case Expr::Kind::Ident: {
      const std::string& n = e->text;
      if (env.params) {
        auto it = env.params->find(n);
        if (it != env.params->end()) return Value::of(cplx(it->second));
      }
      if (env.gates) {
        auto it = env.gates->find(n);
        if (it != env.gates->end()) return Value::of(it->second);
      }
      if (env.channels) {
        auto it = env.channels->find(n);
        if (it != env.channels->end()) return Value::of(it->second);
      }
      if (builtins::is_gate(n)) {
        try {
          return Value::of(builtins::gate(n));
        } catch (const Error& err) {
          type_error(e, err.what());
        }
      }
      // Numbered aliases such as depolarizing1.
      const std::string dep = "depolarizing";
      if (n.size() > dep.size() && n.compare(0, dep.size(), dep) == 0) {
        const std::string k = n.substr(dep.size());
        if (k.find_first_not_of("0123456789") == std::string::npos)
          return Value::of(builtins::channel(dep, {std::stod(k)}));
      }
      if (builtins::is_channel(n)) type_error(e, "channel '" + n + "' needs parameters");
      throw UnknownGateError(where(e) + "unknown name '" + n + "'");
    }
    case Expr::Kind::Call: return call(e, env);
    case Expr::Kind::Unary: {
      Value v = eval(e->args[0], env);
      if (v.kind == Value::Kind::Scalar) return Value::of(-v.scalar);
      if (v.kind == Value::Kind::Matrix) return Value::of(-v.matrix);
      type_error(e, "cannot negate a channel");
    }
    case Expr::Kind::Binary: return binary(e, eval(e->args[0], env), eval(e->args[1], env));
    case Expr::Kind::Matrix: {
      const std::size_t rows = e->row_sizes.size();
      const std::size_t cols = e->row_sizes.front();
      for (auto c : e->row_sizes)
        if (c != cols) type_error(e, "ragged matrix literal");
      ComplexMatrix m(rows, cols);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
          Value v = eval(e->args[i * cols + j], env);
          if (v.kind != Value::Kind::Scalar) type_error(e->args[i * cols + j], "matrix entries must be scalars");
          m(i, j) = v.scalar;
        }
      return Value::of(m);
    }
    case Expr::Kind::Ket: return Value::of(ket_of(e->text));
    case Expr::Kind::Outer: {
      ComplexMatrix k = ket_of(e->text), b = ket_of(e->pattern);
      return Value::of(ket_bra(k, b));
    }
    case Expr::Kind::KrausList: {
      std::vector<ComplexMatrix> ops;
      for (const auto& a : e->args) ops.push_back(as_matrix(a, env));
      try {
        return Value::of(Superoperator(std::move(ops)));
      } catch (const Error& err) {
        type_error(e, err.what());
      }
    }
    case Expr::Kind::BitString: return Value::of(basis_ket(e->text));
  }
  type_error(e, "unsupported expression");
}

Env env_of(const Elaborated& ctx) { return Env{&ctx.params, &ctx.gates, &ctx.channels}; }

std::string loc_prefix(const SourceLoc& loc) {
  if (loc.line == 0) return "";
  return std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": ";
}

Program resolve_tree(const Elaborated& ctx, const Program& p, std::vector<std::string>& diags) {
  auto n = std::make_shared<Node>(p.node());
  for (auto& c : n->children) c = resolve_tree(ctx, c, diags);
  auto r = std::make_shared<Resolved>();
  const Env env = env_of(ctx);
  const std::string at = loc_prefix(n->loc);
  for (const auto& v : n->vars)
    if (std::find(ctx.reg.begin(), ctx.reg.end(), v) == ctx.reg.end()) diags.push_back(at + "unknown variable '" + v + "'");
  const std::size_t dim = std::size_t{1} << n->vars.size();
  try {
    if (n->kind == NodeKind::Unitary) {
      r->unitary = as_matrix(n->gate, env);
      if (r->unitary.rows() != dim || r->unitary.cols() != dim) {
        diags.push_back(at + "gate " + to_string(n->gate) + " is " + std::to_string(r->unitary.rows()) + "x" +
                        std::to_string(r->unitary.cols()) + " but acts on " + std::to_string(n->vars.size()) + " qubit(s)");
      } else if (max_abs_diff(dagger(r->unitary) * r->unitary, ComplexMatrix::identity(dim)) > 1e-9) {
        diags.push_back(at + "gate " + to_string(n->gate) + " is not unitary");
      }
      if (n->noise_prob) {
        r->probability = real_scalar(n->noise_prob, env, "noise probability");
        if (!(r->probability >= -1e-9 && r->probability <= 1.0 + 1e-9)) {
          diags.push_back(at + "noise probability " + std::to_string(r->probability) + " is outside [0, 1]");
        }
        r->probability = std::clamp(r->probability, 0.0, 1.0);
        r->noise = as_channel(eval(n->noise_channel, env), n->noise_channel);
        if (r->noise->d_in() != dim || r->noise->d_out() != dim) {
          diags.push_back(at + "noise channel " + to_string(n->noise_channel) + " does not act on " +
                          std::to_string(n->vars.size()) + " qubit(s)");
        } else if (!r->noise->trace_non_increasing(1e-9)) {
          diags.push_back(at + "noise channel " + to_string(n->noise_channel) + " is not trace-non-increasing");
        }
      }
    } else if (n->kind == NodeKind::Case || n->kind == NodeKind::While) {
      auto it = ctx.measurements.find(n->measurement);
      if (it != ctx.measurements.end()) {
        r->measurement = it->second;
      } else if (auto b = builtin_measurement(n->measurement)) {
        r->measurement = *b;
      } else {
        diags.push_back(at + "unknown measurement '" + n->measurement + "'");
      }
      if (r->measurement.size() > 0 && r->measurement.dim() != dim) {
        diags.push_back(at + "measurement " + n->measurement + " does not act on " + std::to_string(n->vars.size()) + " qubit(s)");
      }
      if (n->kind == NodeKind::While && r->measurement.size() > 0) {
        if (r->measurement.size() != 2 || !r->measurement.index_of("0") || !r->measurement.index_of("1"))
          diags.push_back(at + "loop measurement " + n->measurement + " must have exactly the outcomes 0 and 1");
      }
      if (n->kind == NodeKind::Case && r->measurement.size() > 0) {
        for (const auto& l : n->labels)
          if (!r->measurement.index_of(l)) diags.push_back(at + "case branch '" + l + "' is not an outcome of " + n->measurement);
        if (n->labels.size() != r->measurement.size()) diags.push_back(at + "case branches do not cover the outcomes of " + n->measurement);
      }
    }
  } catch (const UnknownGateError& err) {
    diags.push_back(err.what());
  } catch (const Error& err) {
    diags.push_back(at + err.what());
  }
  n->resolved = r;
  return Program(n);
}

Elaborated build_context(const SourceFile& f, const ParamMap& overrides, std::vector<std::string>& diags) {
  Elaborated ctx;
  ctx.name = f.name;
  for (const auto& d : f.decls) {
    if (d.type == VarType::Int) {
      diags.push_back(loc_prefix(d.loc) + "variable '" + d.name + "' has unsupported type int (only qubits are supported)");
      continue;
    }
    ctx.reg.push_back(d.name);
    if (d.type == VarType::Ancilla) ctx.ancillas.push_back(d.name);
  }
  for (const auto& [name, value] : overrides) {
    bool found = false;
    for (const auto& d : f.defs) found |= d.kind == Definition::Kind::Param && d.name == name;
    if (!found) diags.push_back("unknown parameter '" + name + "'");
  }
  for (const auto& d : f.defs) {
    const Env env = env_of(ctx);
    const std::string at = loc_prefix(d.loc);
    try {
      switch (d.kind) {
        case Definition::Kind::Param: {
          auto ov = overrides.find(d.name);
          ctx.params[d.name] = ov != overrides.end() ? ov->second : real_scalar(d.value, env, "parameter");
          break;
        }
        case Definition::Kind::Gate: {
          Value v = eval(d.value, env);
          if (v.kind != Value::Kind::Matrix) throw Error("gate " + d.name + " must be a matrix");
          ctx.gates[d.name] = v.matrix;
          break;
        }
        case Definition::Kind::Channel: {
          ctx.channels[d.name] = as_channel(eval(d.value, env), d.value);
          if (!ctx.channels[d.name].trace_non_increasing(1e-9))
            diags.push_back(at + "channel " + d.name + " is not trace-non-increasing");
          break;
        }
        case Definition::Kind::Measurement: {
          std::vector<Measurement::Outcome> outs;
          for (const auto& [label, expr] : d.outcomes) outs.emplace_back(label, as_matrix(expr, env));
          Measurement m(std::move(outs));
          if (!m.complete(1e-9))
            diags.push_back(at + "measurement " + d.name + " is not complete (sum of M^dag M differs from I by " +
                            std::to_string(m.completeness_defect()) + ")");
          ctx.measurements[d.name] = std::move(m);
          break;
        }
      }
    } catch (const Error& err) {
      diags.push_back(at + err.what());
    }
  }
  return ctx;
}

}  // namespace

std::vector<std::string> validate(const SourceFile& f, const ParamMap& overrides) {
  std::vector<std::string> diags;
  Elaborated ctx = build_context(f, overrides, diags);
  resolve_tree(ctx, f.body, diags);
  return diags;
}

Elaborated elaborate(const SourceFile& f, const ParamMap& overrides) {
  std::vector<std::string> diags;
  Elaborated ctx = build_context(f, overrides, diags);
  ctx.body = resolve_tree(ctx, f.body, diags);
  if (!diags.empty()) throw ValidationError(diags);
  return ctx;
}

Program resolve(const Elaborated& ctx, const Program& p) {
  std::vector<std::string> diags;
  Program out = resolve_tree(ctx, p, diags);
  if (!diags.empty()) throw ValidationError(diags);
  return out;
}

ComplexMatrix eval_matrix(const std::string& text, const Elaborated* ctx) {
  ExprPtr e = parse_expr(text);
  Env env = ctx ? env_of(*ctx) : Env{};
  return as_matrix(e, env);
}

Superoperator eval_channel(const std::string& text, const Elaborated* ctx) {
  ExprPtr e = parse_expr(text);
  Env env = ctx ? env_of(*ctx) : Env{};
  return as_channel(eval(e, env), e);
}

}  // namespace qrobust
