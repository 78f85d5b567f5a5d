#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "qrobust/cli.hpp"

namespace qrobust {

namespace {

using nlohmann::ordered_json;

ordered_json matrix_json(const ComplexMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from(const ordered_json& j) {
  const std::size_t r = j.size();
  const std::size_t c = r ? j.at(0).size() : 0;
  ComplexMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (j[i].size() != c) throw ValidationError({"report: ragged matrix"});
    for (std::size_t k = 0; k < c; ++k) m(i, k) = cplx(j[i][k].at(0).get<double>(), j[i][k].at(1).get<double>());
  }
  return m;
}

ordered_json to_json(const AnalysisReport& r) {
  ordered_json j;
  j["schema_version"] = r.schema_version;
  j["tool_version"] = r.tool_version;
  j["command"] = r.command;
  j["program"] = r.program;

  ordered_json in;
  in["file"] = r.inputs.file;
  in["params"] = r.inputs.params;
  in["annotation"] = r.inputs.annotation;
  in["options"] = r.inputs.options;
  in["tolerances"] = r.inputs.tolerances;
  ordered_json noise = ordered_json::array();
  for (const auto& n : r.inputs.noise)
    noise.push_back({{"path", n.path}, {"statement", n.statement}, {"probability", n.probability}, {"channel", n.channel}});
  in["noise"] = noise;
  in["seed"] = r.inputs.seed;
  j["inputs"] = in;

  ordered_json res = ordered_json::array();
  for (const auto& q : r.results)
    res.push_back({{"name", q.name}, {"value", q.value}, {"tolerance", q.tolerance}, {"residual", q.residual}});
  j["results"] = res;

  if (r.derivation) {
    const auto& d = *r.derivation;
    j["derivation"] = {{"rule", d.rule},         {"epsilon", d.epsilon},
                       {"lambda", d.lambda},     {"nodes", d.nodes},
                       {"verified", d.verified}, {"document", ordered_json::parse(d.document)}};
  }
  ordered_json loops = ordered_json::array();
  for (const auto& l : r.loops)
    loops.push_back({{"path", l.path}, {"bounded", l.bounded}, {"a", l.a}, {"n", l.n},
                     {"off_support_leak", l.off_support_leak}, {"diagnostic", l.diagnostic}});
  j["loops"] = loops;
  ordered_json mats = ordered_json::array();
  for (const auto& m : r.matrices) mats.push_back({{"name", m.name}, {"value", matrix_json(m.value)}});
  j["matrices"] = mats;
  ordered_json trace = ordered_json::array();
  for (const auto& s : r.trace)
    trace.push_back({{"index", s.index}, {"program", s.program}, {"trace", s.trace}, {"state", matrix_json(s.state)}});
  j["trace"] = trace;
  j["notes"] = r.notes;
  j["diagnostics"] = r.diagnostics;
  j["exit_code"] = r.exit_code;
  j["timing"] = {{"seconds", r.seconds}};
  return j;
}

AnalysisReport from_json(const ordered_json& j) {
  AnalysisReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion)
    throw ValidationError({"report: unsupported schema version " + std::to_string(r.schema_version)});
  r.tool_version = j.at("tool_version").get<std::string>();
  r.command = j.at("command").get<std::string>();
  r.program = j.at("program").get<std::string>();

  const auto& in = j.at("inputs");
  r.inputs.file = in.at("file").get<std::string>();
  r.inputs.params = in.at("params").get<ParamMap>();
  r.inputs.annotation = in.at("annotation").get<std::string>();
  r.inputs.options = in.at("options").get<std::map<std::string, std::string>>();
  r.inputs.tolerances = in.at("tolerances").get<std::map<std::string, double>>();
  for (const auto& n : in.at("noise"))
    r.inputs.noise.push_back({n.at("path").get<AstPath>(), n.at("statement").get<std::string>(),
                              n.at("probability").get<double>(), n.at("channel").get<std::string>()});
  r.inputs.seed = in.at("seed").get<std::uint64_t>();

  for (const auto& q : j.at("results"))
    r.results.push_back({q.at("name").get<std::string>(), q.at("value").get<double>(), q.at("tolerance").get<double>(),
                         q.at("residual").get<double>()});
  if (j.contains("derivation")) {
    const auto& d = j["derivation"];
    DerivationSummary s;
    s.rule = d.at("rule").get<std::string>();
    s.epsilon = d.at("epsilon").get<double>();
    s.lambda = d.at("lambda").get<double>();
    s.nodes = d.at("nodes").get<std::size_t>();
    s.verified = d.at("verified").get<bool>();
    s.document = d.at("document").dump(2);
    r.derivation = s;
  }
  for (const auto& l : j.at("loops"))
    r.loops.push_back({l.at("path").get<AstPath>(), l.at("bounded").get<bool>(), l.at("a").get<double>(),
                       l.at("n").get<int>(), l.at("off_support_leak").get<double>(),
                       l.at("diagnostic").get<std::string>()});
  for (const auto& m : j.at("matrices")) r.matrices.push_back({m.at("name").get<std::string>(), matrix_from(m.at("value"))});
  for (const auto& s : j.at("trace"))
    r.trace.push_back({s.at("index").get<std::size_t>(), s.at("program").get<std::string>(), s.at("trace").get<double>(),
                       matrix_from(s.at("state"))});
  r.notes = j.at("notes").get<std::vector<std::string>>();
  r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  r.exit_code = j.at("exit_code").get<int>();
  r.seconds = j.at("timing").at("seconds").get<double>();
  return r;
}

ordered_json parse_document(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const ordered_json::exception& ex) {
    throw ValidationError({std::string("report: ") + ex.what()});
  }
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const ordered_json::exception& ex) {
    throw ValidationError({std::string("report: ") + ex.what()});
  }
}

std::string number(double x) {
  std::ostringstream s;
  s << std::setprecision(12) << x;
  return s.str();
}

std::string cell(cplx z) {
  const double re = std::abs(z.real()) < 1e-15 ? 0.0 : z.real();
  const double im = std::abs(z.imag()) < 1e-15 ? 0.0 : z.imag();
  std::ostringstream s;
  s << std::setprecision(6) << re;
  if (im != 0.0) s << (im > 0 ? "+" : "-") << std::setprecision(6) << std::abs(im) << "i";
  return s.str();
}

void print_matrix(std::ostringstream& out, const ComplexMatrix& m, const std::string& indent) {
  if (m.rows() > 4 || m.cols() > 4) {
    out << indent << m.rows() << " x " << m.cols() << " matrix, max |entry| " << number(max_abs(m)) << " (full value in --json)\n";
    return;
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << indent << "[";
    for (std::size_t k = 0; k < m.cols(); ++k) out << (k ? ", " : "") << std::setw(10) << cell(m(i, k));
    out << "]\n";
  }
}

void print_tree(std::ostringstream& out, const ordered_json& node, int depth) {
  out << std::string(2 * depth + 4, ' ') << node.at("rule").get<std::string>() << " "
      << path_to_string(node.at("path").get<AstPath>()) << "  lambda " << number(node["conclusion"]["lambda"])
      << "  epsilon " << number(node["conclusion"]["epsilon"]);
  if (node.contains("certificate"))
    out << "  (a " << number(node["certificate"]["a"]) << ", n " << node["certificate"]["n"].get<int>() << ")";
  if (node.contains("t") && node.at("rule") == "Case") out << "  t " << number(node["t"]);
  out << "\n";
  for (const auto& p : node.at("premises")) print_tree(out, p, depth + 1);
}

}  // namespace

const Quantity* AnalysisReport::find(const std::string& name) const {
  for (const auto& q : results)
    if (q.name == name) return &q;
  return nullptr;
}

std::string report_to_json(const AnalysisReport& r) { return to_json(r).dump(2) + "\n"; }

std::string reports_to_json(const std::vector<AnalysisReport>& rs) {
  ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  ordered_json list = ordered_json::array();
  for (const auto& r : rs) list.push_back(to_json(r));
  doc["reports"] = list;
  return doc.dump(2) + "\n";
}

AnalysisReport report_from_json(const std::string& text) {
  const ordered_json j = parse_document(text);
  return guarded([&] { return from_json(j); });
}

std::vector<AnalysisReport> reports_from_json(const std::string& text) {
  const ordered_json j = parse_document(text);
  return guarded([&] {
    if (!j.contains("reports")) return std::vector<AnalysisReport>{from_json(j)};
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw ValidationError({"report: unsupported schema version"});
    std::vector<AnalysisReport> out;
    for (const auto& r : j["reports"]) out.push_back(from_json(r));
    return out;
  });
}

std::string report_to_text(const AnalysisReport& r, bool tree) {
  std::ostringstream out;
  out << r.command << " ";
  if (!r.program.empty()) out << r.program;
  else if (r.command == "diamond" && r.inputs.options.count("a"))
    out << "'" << r.inputs.options.at("a") << "' vs '" << r.inputs.options.at("b") << "', Q = " << r.inputs.options.at("Q")
        << ", lambda = " << r.inputs.options.at("lambda");
  else out << r.inputs.file;
  out << "\n";
  if (!r.inputs.params.empty()) {
    out << "  params:";
    for (const auto& [k, v] : r.inputs.params) out << " " << k << "=" << number(v);
    out << "\n";
  }
  if (!r.inputs.annotation.empty()) out << "  annotation: " << r.inputs.annotation << "\n";
  for (const auto& n : r.inputs.noise)
    out << "  noise " << path_to_string(n.path) << ": p = " << number(n.probability) << ", " << n.channel << "\n";
  for (const auto& q : r.results) {
    out << "  " << std::left << std::setw(26) << q.name << std::right << number(q.value);
    if (q.tolerance > 0.0) out << "  (tolerance " << number(q.tolerance) << ")";
    if (q.residual > 0.0) out << "  (residual " << number(q.residual) << ")";
    out << "\n";
  }
  if (r.derivation) {
    const auto& d = *r.derivation;
    out << "  derivation: " << d.rule << ", " << d.nodes << " nodes, side conditions "
        << (d.verified ? "verified" : "NOT verified") << "\n";
    if (tree) print_tree(out, ordered_json::parse(d.document).at("derivation"), 0);
  }
  for (const auto& l : r.loops) {
    out << "  loop " << path_to_string(l.path) << ": ";
    if (l.bounded) out << "(a = " << number(l.a) << ", n = " << l.n << ")-bounded\n";
    else out << "not bounded: " << l.diagnostic << "\n";
  }
  for (const auto& s : r.trace) {
    out << "  config " << s.index << ": <" << (s.program.empty() ? "E" : s.program) << ">, trace " << number(s.trace)
        << "\n";
    print_matrix(out, s.state, "      ");
  }
  for (const auto& m : r.matrices) {
    out << "  " << m.name << ":\n";
    print_matrix(out, m.value, "    ");
  }
  for (const auto& n : r.notes) out << "  note: " << n << "\n";
  for (const auto& d : r.diagnostics) out << "  diagnostic: " << d << "\n";
  out << "  time " << std::fixed << std::setprecision(3) << r.seconds << " s\n";
  return out.str();
}

int exit_code_for(const std::exception& ex) {
  if (dynamic_cast<const NumericalFailure*>(&ex) || dynamic_cast<const BudgetExceeded*>(&ex) ||
      dynamic_cast<const Unconverged*>(&ex))
    return 3;
  if (dynamic_cast<const Error*>(&ex)) return 2;
  return 3;
}

}  // namespace qrobust
