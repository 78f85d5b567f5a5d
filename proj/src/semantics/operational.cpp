#include <map>

#include "kernels.hpp"
#include "qrobust/semantics.hpp"

namespace qrobust {

namespace {

// Program left after the first statement of a sequence has become `head`.
Program continue_with(const Program& head, const std::vector<Program>& rest) {
  std::vector<Program> items;
  if (head.valid()) items.push_back(head);
  items.insert(items.end(), rest.begin(), rest.end());
  if (items.empty()) return Program();
  if (items.size() == 1) return items[0];
  return Program::seq(std::move(items));
}

// Identity of a remaining program: the statements still to run, as shared nodes.
std::vector<const Node*> program_key(const Program& p) {
  if (p.kind() != NodeKind::Seq) return {p.ptr().get()};
  std::vector<const Node*> key;
  for (const auto& c : p.children()) key.push_back(c.ptr().get());
  return key;
}

}  // namespace

std::vector<Configuration> step(const Configuration& c, const Register& reg) {
  if (c.terminated()) throw Error("step: configuration has already terminated");
  const Node& n = c.program.node();
  const std::size_t nq = reg.size();
  switch (n.kind) {
    case NodeKind::Skip: return {{Program(), c.state}};
    case NodeKind::Init: return {{Program(), detail::forward_init(c.state, positions_in(n.vars, reg)[0], nq)}};
    case NodeKind::Unitary:
      return {{Program(), detail::forward_unitary(c.state, n, positions_in(n.vars, reg), nq)}};
    case NodeKind::Seq: {
      const std::vector<Program> rest(n.children.begin() + 1, n.children.end());
      std::vector<Configuration> out;
      for (auto& s : step({n.children[0], c.state}, reg)) out.push_back({continue_with(s.program, rest), std::move(s.state)});
      return out;
    }
    case NodeKind::Case: {
      const Measurement& m = detail::resolved_of(n).measurement;
      const auto pos = positions_in(n.vars, reg);
      std::vector<Configuration> out;
      for (std::size_t i = 0; i < n.children.size(); ++i)
        out.push_back({n.children[i], conjugate_local(c.state, detail::outcome_op(m, n.labels[i]), pos, nq)});
      return out;
    }
    case NodeKind::While: {
      const Measurement& m = detail::resolved_of(n).measurement;
      const auto pos = positions_in(n.vars, reg);
      return {{Program(), conjugate_local(c.state, detail::outcome_op(m, "0"), pos, nq)},
              {continue_with(n.children[0], {c.program}), conjugate_local(c.state, detail::outcome_op(m, "1"), pos, nq)}};
    }
  }
  throw Error("step: unknown statement");
}

OperationalResult run_operational(const Program& p, const Register& reg, const ComplexMatrix& rho,
                                  const OperationalOptions& opts) {
  if (!(opts.cutoff > 0.0)) throw Error("run_operational: cutoff must be positive");
  const std::size_t d = std::size_t{1} << reg.size();
  if (rho.rows() != d || rho.cols() != d) throw DimensionError("run_operational: state does not match the register");
  OperationalResult res;
  res.state = ComplexMatrix(d, d);
  std::vector<Configuration> level{{p, rho}};
  while (!level.empty()) {
    std::vector<Configuration> next;
    std::map<std::vector<const Node*>, std::size_t> slot;
    for (auto& c : level) {
      const double mass = trace(c.state).real();
      if (mass < opts.cutoff) {
        res.residual += std::max(mass, 0.0);
        continue;
      }
      if (opts.observer) opts.observer(c);
      if (c.terminated()) {
        res.state += c.state;
        ++res.terminals;
        continue;
      }
      if (++res.steps > opts.step_budget)
        throw BudgetExceeded("run_operational: step budget of " + std::to_string(opts.step_budget) + " exhausted");
      for (auto& s : step(c, reg)) {
        if (!opts.merge || s.terminated()) {
          next.push_back(std::move(s));
          continue;
        }
        auto [it, fresh] = slot.try_emplace(program_key(s.program), next.size());
        if (fresh) next.push_back(std::move(s));
        else next[it->second].state += s.state;
      }
    }
    level = std::move(next);
  }
  return res;
}

}  // namespace qrobust
