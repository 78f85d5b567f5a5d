#include <algorithm>
#include <cmath>
#include <functional>

#include "../semantics/kernels.hpp"
#include "internal.hpp"

namespace qrobust {

namespace {

struct Pre {
  ComplexMatrix q;
  double lambda = 0.0;
};

bool same_pre(const Pre& a, const Pre& b) {
  return std::abs(a.lambda - b.lambda) <= 1e-12 && detail::same_predicate(a.q, b.q);
}

bool has_site_below(const Annotation& ann, const AstPath& path) {
  for (const auto& [p, s] : ann.sites)
    if (p.size() >= path.size() && std::equal(path.begin(), path.end(), p.begin())) return true;
  return false;
}

class Deriver {
 public:
  Deriver(const Elaborated& e, const Annotation& ann, const LogicOptions& opts)
      : e_(e), ann_(ann), opts_(opts), dim_(detail::register_dim(e.reg)) {
    if (resolved_default(e.body, ann) == DefaultPrecondition::Universal) {
      dflt_ = {ComplexMatrix::identity(dim_), 1.0};
    } else {
      dflt_ = {ComplexMatrix(dim_, dim_), 0.0};
    }
  }

  DerivationTree derive(const Program& p, const AstPath& path, const std::optional<Pre>& target) {
    if (auto sp = site_pre(path)) {
      DerivationTree t = derive_at(p, path, *sp);
      return target ? adapt(t, *target) : t;
    }
    return derive_at(p, path, target ? *target : natural(p, path).value_or(dflt_));
  }

 private:
  const SiteAnnotation* site(const AstPath& path) const {
    auto it = ann_.sites.find(path);
    return it == ann_.sites.end() ? nullptr : &it->second;
  }

  std::optional<Pre> site_pre(const AstPath& path) const {
    const SiteAnnotation* s = site(path);
    if (!s || (!s->q && !s->lambda)) return std::nullopt;
    return Pre{s->q.value_or(ComplexMatrix::identity(dim_)), s->lambda.value_or(1.0)};
  }

  RuleInput input(const AstPath& path, const Pre& pre) const {
    RuleInput in;
    in.path = path;
    in.q = pre.q;
    in.lambda = pre.lambda;
    return in;
  }

  DerivationTree adapt(const DerivationTree& t, const Pre& target) const {
    if (same_pre({t.conclusion.q, t.conclusion.lambda}, target)) return t;
    RuleInput in = input(t.conclusion.path, target);
    in.epsilon = t.conclusion.epsilon;
    return apply_rule(e_, Rule::Weaken, {t}, in, opts_);
  }

  ComplexMatrix wp(const Program& p, const ComplexMatrix& x) const {
    return hermitian_part(heisenberg(ideal(p), e_.reg, x, opts_.denote).matrix);
  }

  // Precondition a subtree fixes by itself through annotations underneath it.
  std::optional<Pre> natural(const Program& p, const AstPath& path) const {
    if (auto sp = site_pre(path)) return sp;
    const SiteAnnotation* s = site(path);
    if (s && s->semantic) return std::nullopt;
    switch (p.kind()) {
      case NodeKind::While: {
        auto body = natural(p.children()[0], detail::child_path(path, 0));
        if (!body) return std::nullopt;
        const ComplexMatrix m0 = detail::lifted_outcome(p.node(), "0", e_.reg);
        const ComplexMatrix m1 = detail::lifted_outcome(p.node(), "1", e_.reg);
        return Pre{hermitian_part(dagger(m0) * m0 * cplx(body->lambda) + dagger(m1) * body->q * m1), body->lambda};
      }
      case NodeKind::Case: {
        std::vector<Pre> branches;
        bool any = false;
        for (std::size_t i = 0; i < p.children().size(); ++i) {
          auto b = natural(p.children()[i], detail::child_path(path, i));
          any = any || b.has_value();
          branches.push_back(b.value_or(dflt_));
        }
        if (!any) return std::nullopt;
        double lam = 0.0;
        for (const auto& b : branches) lam = std::max(lam, b.lambda);
        const double t = (s && s->t) ? *s->t : 0.0;
        ComplexMatrix q(dim_, dim_);
        for (std::size_t i = 0; i < branches.size(); ++i) {
          const ComplexMatrix m = detail::lifted_outcome(p.node(), p->labels[i], e_.reg);
          q += dagger(m) * branches[i].q * m;
        }
        return Pre{hermitian_part(q), 1.0 - t * (1.0 - lam)};
      }
      case NodeKind::Seq: {
        const auto& items = p.children();
        for (std::size_t j = 0; j < items.size(); ++j) {
          auto nj = natural(items[j], detail::child_path(path, j));
          if (!nj) continue;
          ComplexMatrix q = nj->q;
          for (std::size_t i = j; i-- > 0;) q = wp(items[i], q);
          return Pre{q, nj->lambda};
        }
        return std::nullopt;
      }
      default:
        return std::nullopt;
    }
  }

  // A postcondition r with {q} p {r} for the ideal p.
  ComplexMatrix post(const Program& p, const AstPath& path, const ComplexMatrix& q) const {
    if (detail::is_zero(q)) return ComplexMatrix(dim_, dim_);
    const Node& n = p.node();
    switch (n.kind) {
      case NodeKind::Skip:
        return q;
      case NodeKind::Unitary: {
        const ComplexMatrix u = lift(detail::resolved_of(n).unitary, n.vars, e_.reg);
        return hermitian_part(u * q * dagger(u));
      }
      case NodeKind::Init: {
        Register rest;
        for (const auto& v : e_.reg)
          if (v != n.vars[0]) rest.push_back(v);
        ComplexMatrix b = ComplexMatrix::identity(std::size_t{1} << rest.size());
        if (auto lp = detail::local_predicate(q, e_.reg, rest); lp && lp->exact) b = lp->q;
        const ComplexMatrix zero = {{1, 0}, {0, 0}};
        ComplexMatrix r = lift(zero, {n.vars[0]}, e_.reg);
        if (!rest.empty()) r = r * lift(b, rest, e_.reg);
        return hermitian_part(r);
      }
      case NodeKind::Seq: {
        ComplexMatrix cur = q;
        for (std::size_t i = 0; i < n.children.size(); ++i)
          cur = post(n.children[i], detail::child_path(path, i), cur);
        return cur;
      }
      case NodeKind::Case:
      case NodeKind::While: {
        const ComplexMatrix id = ComplexMatrix::identity(dim_);
        bool ok = false;
        try {
          ok = check_hoare(q, p, id, e_.reg, opts_).holds;
        } catch (const Unconverged&) {
        }
        if (ok) return id;
        throw SideConditionFailed("no postcondition found for the statement at " + path_to_string(path) +
                                  "; annotate the statement that follows it");
      }
    }
    return q;
  }

  DerivationTree derive_at(const Program& p, const AstPath& path, const Pre& pre) {
    const SiteAnnotation* s = site(path);
    if (s && s->semantic) return apply_rule(e_, Rule::Semantic, {}, input(path, pre), opts_);
    switch (p.kind()) {
      case NodeKind::Skip:
        return apply_rule(e_, Rule::Skip, {}, input(path, pre), opts_);
      case NodeKind::Init:
        return apply_rule(e_, Rule::Init, {}, input(path, pre), opts_);
      case NodeKind::Unitary:
        return apply_rule(e_, Rule::Unitary, {}, input(path, pre), opts_);
      case NodeKind::Seq:
        return derive_seq(p, path, pre);
      case NodeKind::Case:
        return derive_case(p, path, pre);
      case NodeKind::While:
        return derive_while(p, path, pre);
    }
    throw SideConditionFailed("unknown statement");
  }

  DerivationTree derive_seq(const Program& p, const AstPath& path, const Pre& pre) {
    const auto& items = p.children();
    std::vector<std::optional<Pre>> naturals;
    for (std::size_t j = 0; j < items.size(); ++j) naturals.push_back(natural(items[j], detail::child_path(path, j)));
    std::vector<DerivationTree> trees;
    ComplexMatrix prev = pre.q;
    for (std::size_t i = 0; i < items.size(); ++i) {
      Pre target = pre;
      if (i > 0) {
        std::optional<ComplexMatrix> chosen;
        // Precondition pinned further along, pulled back to this item.
        std::size_t j = i;
        while (j < items.size() && !naturals[j]) ++j;
        if (j < items.size() && std::abs(naturals[j]->lambda - pre.lambda) <= 1e-12) {
          ComplexMatrix cand = naturals[j]->q;
          for (std::size_t k = j; k-- > i;) cand = wp(items[k], cand);
          try {
            if (check_hoare(prev, items[i - 1], cand, e_.reg, opts_).holds) chosen = cand;
          } catch (const Unconverged&) {
          }
        }
        target.q = chosen ? *chosen : post(items[i - 1], detail::child_path(path, i - 1), prev);
      }
      trees.push_back(derive(items[i], detail::child_path(path, i), target));
      prev = target.q;
    }
    return apply_rule(e_, Rule::Sequence, trees, input(path, pre), opts_);
  }

  DerivationTree derive_case(const Program& p, const AstPath& path, const Pre& pre) {
    std::vector<DerivationTree> branches;
    double lam = 0.0, eps = 0.0;
    for (std::size_t i = 0; i < p.children().size(); ++i) {
      branches.push_back(derive(p.children()[i], detail::child_path(path, i), std::nullopt));
      lam = std::max(lam, branches.back().conclusion.lambda);
      eps = std::max(eps, branches.back().conclusion.epsilon);
    }
    const double delta = 1.0 - lam;
    const SiteAnnotation* s = site(path);
    RuleInput in = input(path, pre);
    std::vector<CaseFrontierPoint> frontier;
    if (s && s->t) {
      in.t = *s->t;
    } else {
      // Smallest t whose conclusion is no stronger than the required lambda.
      in.t = delta <= 1e-15 ? 0.0 : std::clamp((1.0 - pre.lambda) / delta, 0.0, 1.0);
      for (int k = 0; k <= 20; ++k) {
        const double t = k / 20.0;
        frontier.push_back({t, 1.0 - t * delta, std::min(1.0, (1.0 - t) * eps + t)});
      }
    }
    DerivationTree t = apply_rule(e_, Rule::Case, branches, in, opts_);
    t.frontier = std::move(frontier);
    return adapt(t, pre);
  }

  DerivationTree derive_while(const Program& p, const AstPath& path, const Pre& pre) {
    const SiteAnnotation* s = site(path);
    BoundednessResult b;
    if (s && s->loop_n) {
      b = boundedness(p, e_.reg, *s->loop_n, opts_);
    } else {
      b = boundedness_search(p, e_.reg, (s && s->n_max) ? *s->n_max : opts_.n_max, opts_);
    }
    if (s && s->loop_a) {
      // A claimed a replaces the computed one; the rule re-verifies it.
      b.certificate.a = *s->loop_a;
      b.bounded = *s->loop_a < 1.0;
    }
    auto unbounded = [&](const std::string& why) {
      DerivationTree t = apply_rule(e_, Rule::WhileUnbounded, {}, input(path, pre), opts_);
      t.side_conditions.push_back({"no boundedness certificate: " + why, true, b.certificate.a});
      return t;
    };
    if (!b.bounded) return unbounded(b.diagnostic);
    const AstPath body_path = detail::child_path(path, 0);
    const Program& body = p.children()[0];
    std::optional<Pre> body_target;
    if (!natural(body, body_path)) {
      body_target = same_pre(pre, dflt_) ? dflt_ : Pre{ComplexMatrix::identity(dim_), pre.lambda};
    }
    try {
      DerivationTree bt = derive(body, body_path, body_target);
      RuleInput in = input(path, pre);
      in.certificate = b.certificate;
      return adapt(apply_rule(e_, Rule::WhileBounded, {bt}, in, opts_), pre);
    } catch (const SideConditionFailed& ex) {
      if (has_site_below(ann_, path)) throw;
      return unbounded(ex.what());
    }
  }

  const Elaborated& e_;
  const Annotation& ann_;
  const LogicOptions& opts_;
  std::size_t dim_;
  Pre dflt_;
};

bool case_outside_semantic(const Program& p, const AstPath& path, const Annotation& ann) {
  auto it = ann.sites.find(path);
  if (it != ann.sites.end() && it->second.semantic) return false;
  if (p.kind() == NodeKind::Case) return true;
  for (std::size_t i = 0; i < p.children().size(); ++i)
    if (case_outside_semantic(p.children()[i], detail::child_path(path, i), ann)) return true;
  return false;
}

}  // namespace

DefaultPrecondition resolved_default(const Program& p, const Annotation& ann) {
  if (ann.default_pre != DefaultPrecondition::Auto) return ann.default_pre;
  // (0, 0) cannot carry a Case rule with t < 1, while (I, 1) can.
  return case_outside_semantic(p, {}, ann) ? DefaultPrecondition::Universal : DefaultPrecondition::False;
}

DerivationTree auto_derive(const Elaborated& e, const Annotation& ann, const LogicOptions& opts) {
  Deriver d(e, ann, opts);
  return d.derive(e.body, {}, std::nullopt);
}

}  // namespace qrobust
