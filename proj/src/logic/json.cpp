#include <cmath>

#include "internal.hpp"
#include "json.hpp"

namespace qrobust {

namespace {

using nlohmann::json;

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

ComplexMatrix matrix_from(const json& j) {
  const std::size_t r = j.size();
  const std::size_t c = r ? j[0].size() : 0;
  ComplexMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (j[i].size() != c) throw Error("ragged matrix in derivation document");
    for (std::size_t k = 0; k < c; ++k) m(i, k) = cplx(j[i][k].at(0).get<double>(), j[i][k].at(1).get<double>());
  }
  return m;
}

json tree_json(const DerivationTree& t) {
  json j;
  j["rule"] = to_string(t.rule);
  j["path"] = t.conclusion.path;
  j["statement"] = to_string(t.conclusion.program.kind());
  j["conclusion"] = {{"Q", matrix_json(t.conclusion.q)},
                     {"lambda", t.conclusion.lambda},
                     {"epsilon", t.conclusion.epsilon}};
  j["residual"] = t.residual;
  if (t.rule == Rule::Case) {
    j["t"] = t.t;
    j["delta"] = t.delta;
  }
  if (t.rule == Rule::Rescale) j["delta"] = t.delta;
  if (t.rule == Rule::Unitary || t.rule == Rule::Semantic) j["norm"] = t.norm;
  if (t.certificate)
    j["certificate"] = {{"a", t.certificate->a}, {"n", t.certificate->n},
                        {"off_support_leak", t.certificate->off_support_leak}};
  if (!t.frontier.empty()) {
    json f = json::array();
    for (const auto& p : t.frontier) f.push_back({{"t", p.t}, {"lambda", p.lambda}, {"epsilon", p.epsilon}});
    j["frontier"] = f;
  }
  json sc = json::array();
  for (const auto& c : t.side_conditions)
    sc.push_back({{"description", c.description}, {"verified", c.verified}, {"witness", c.witness}});
  j["side_conditions"] = sc;
  json prem = json::array();
  for (const auto& p : t.premises) prem.push_back(tree_json(p));
  j["premises"] = prem;
  return j;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

DerivationTree recheck_node(const Elaborated& e, const json& j, const LogicOptions& opts) {
  const Rule rule = rule_from_string(j.at("rule").get<std::string>());
  std::vector<DerivationTree> premises;
  for (const auto& p : j.at("premises")) premises.push_back(recheck_node(e, p, opts));
  RuleInput in;
  in.path = j.at("path").get<AstPath>();
  const json& c = j.at("conclusion");
  in.q = matrix_from(c.at("Q"));
  in.lambda = c.at("lambda").get<double>();
  in.epsilon = c.at("epsilon").get<double>();
  if (j.contains("t")) in.t = j["t"].get<double>();
  if (rule == Rule::Rescale) in.delta = j.at("delta").get<double>();
  if (j.contains("certificate")) {
    BoundednessCertificate cert;
    cert.a = j["certificate"].at("a").get<double>();
    cert.n = j["certificate"].at("n").get<int>();
    in.certificate = cert;
  }
  DerivationTree t = apply_rule(e, rule, premises, in, opts);
  t.frontier.clear();
  if (j.contains("frontier"))
    for (const auto& f : j["frontier"])
      t.frontier.push_back({f.at("t").get<double>(), f.at("lambda").get<double>(), f.at("epsilon").get<double>()});
  const std::string where = std::string(to_string(rule)) + " at " + path_to_string(in.path);
  if (!close(t.conclusion.epsilon, in.epsilon))
    throw SideConditionFailed(where + ": recorded epsilon " + std::to_string(in.epsilon) + " but the rule gives " +
                              std::to_string(t.conclusion.epsilon));
  if (!close(t.conclusion.lambda, in.lambda))
    throw SideConditionFailed(where + ": recorded lambda does not follow from the premises");
  if (t.conclusion.q.rows() != in.q.rows() || max_abs_diff(t.conclusion.q, in.q) > 1e-9)
    throw SideConditionFailed(where + ": recorded precondition does not follow from the premises");
  return t;
}

double number(const json& j, const std::string& key, std::vector<std::string>& diags, const std::string& where) {
  if (!j[key].is_number()) {
    diags.push_back(where + ": '" + key + "' must be a number");
    return 0.0;
  }
  return j[key].get<double>();
}

}  // namespace

std::string derivation_to_json(const DerivationTree& t, int indent) {
  json doc = {{"version", 1}, {"derivation", tree_json(t)}};
  return doc.dump(indent);
}

DerivationTree recheck_derivation(const Elaborated& e, const std::string& json_text, const LogicOptions& opts) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw ValidationError({std::string("derivation document: ") + ex.what()});
  }
  if (doc.value("version", 0) != 1) throw ValidationError({"derivation document: unsupported version"});
  try {
    return recheck_node(e, doc.at("derivation"), opts);
  } catch (const json::exception& ex) {
    throw ValidationError({std::string("derivation document: ") + ex.what()});
  }
}

Annotation parse_annotation(const std::string& json_text, const Elaborated& e) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw ValidationError({std::string("annotation: ") + ex.what()});
  }
  std::vector<std::string> diags;
  Annotation ann;
  if (!doc.is_object() || doc.value("version", 0) != 1) throw ValidationError({"annotation: expected version 1 object"});
  const std::string dflt = doc.value("default", std::string("auto"));
  if (dflt == "auto") ann.default_pre = DefaultPrecondition::Auto;
  else if (dflt == "false") ann.default_pre = DefaultPrecondition::False;
  else if (dflt == "universal") ann.default_pre = DefaultPrecondition::Universal;
  else diags.push_back("annotation: default must be auto, false or universal");

  const std::size_t dim = detail::register_dim(e.reg);
  for (const auto& s : doc.value("sites", json::array())) {
    SiteAnnotation site;
    AstPath path;
    try {
      path = s.at("path").get<AstPath>();
      at_path(e.body, path);
    } catch (const std::exception& ex) {
      diags.push_back(std::string("annotation site: ") + ex.what());
      continue;
    }
    const std::string where = "annotation " + path_to_string(path);
    if (s.contains("Q")) {
      try {
        ComplexMatrix q = eval_matrix(s["Q"].get<std::string>(), &e);
        if (s.contains("vars")) {
          const auto vars = s["vars"].get<std::vector<std::string>>();
          q = lift(q, vars, e.reg);
        } else if (q.rows() == 1 && q.cols() == 1) {
          q = ComplexMatrix::identity(dim) * q(0, 0);
        }
        detail::require_predicate(q, dim, where);
        site.q = q;
      } catch (const std::exception& ex) {
        diags.push_back(where + ": " + ex.what());
      }
    }
    auto unit = [&](const char* key) -> std::optional<double> {
      if (!s.contains(key)) return std::nullopt;
      const double x = number(s, key, diags, where);
      if (!(x >= 0.0 && x <= 1.0)) diags.push_back(where + ": '" + key + "' must lie in [0, 1]");
      return x;
    };
    site.lambda = unit("lambda");
    site.t = unit("t");
    if (s.contains("loop")) {
      const json& l = s["loop"];
      if (l.is_string() && l.get<std::string>() == "auto") {
      } else if (l.is_object()) {
        if (l.contains("n")) site.loop_n = l["n"].get<int>();
        if (l.contains("a")) site.loop_a = l["a"].get<double>();
        if (l.contains("n_max")) site.n_max = l["n_max"].get<int>();
        if ((site.loop_n && *site.loop_n < 1) || (site.n_max && *site.n_max < 1))
          diags.push_back(where + ": loop n must be positive");
        if (site.loop_a && !(*site.loop_a >= 0.0 && *site.loop_a < 1.0)) diags.push_back(where + ": loop a must lie in [0, 1)");
      } else {
        diags.push_back(where + ": loop must be \"auto\" or an object");
      }
    }
    if (s.contains("rule")) {
      if (s["rule"] == "semantic") site.semantic = true;
      else diags.push_back(where + ": only the \"semantic\" rule can be requested");
    }
    ann.sites[path] = site;
  }
  if (!diags.empty()) throw ValidationError(diags);
  return ann;
}

}  // namespace qrobust
