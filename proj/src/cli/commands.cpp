#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "qrobust/cli.hpp"

namespace qrobust {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read '" + path + "'");
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string one_line(const std::string& text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (c == '\n' || c == ' ' || c == '\t') {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

// Runs `body` with timing and maps escaping exceptions onto the report.
template <class F>
AnalysisReport run(const std::string& command, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  AnalysisReport r;
  r.command = command;
  try {
    body(r);
  } catch (const ValidationError& v) {
    r.diagnostics.insert(r.diagnostics.end(), v.diagnostics().begin(), v.diagnostics().end());
    r.exit_code = 2;
  } catch (const std::exception& ex) {
    r.diagnostics.push_back(ex.what());
    r.exit_code = exit_code_for(ex);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Elaborated load(AnalysisReport& r, const std::string& file, const ParamMap& params) {
  r.inputs.file = file;
  Elaborated e = elaborate(parse(read_file(file)), params);
  r.program = e.name;
  r.inputs.params = e.params;
  return e;
}

void echo_noise(AnalysisReport& r, const Program& p, AstPath path) {
  if (p.kind() == NodeKind::Unitary && p->resolved && p->resolved->probability > 0.0) {
    NoiseEcho n;
    n.path = path;
    n.statement = one_line(to_source(p));
    n.probability = p->resolved->probability;
    n.channel = p->noise_channel ? to_string(p->noise_channel) : "";
    r.inputs.noise.push_back(n);
  }
  for (std::size_t i = 0; i < p.children().size(); ++i) {
    path.push_back(i);
    echo_noise(r, p.children()[i], path);
    path.pop_back();
  }
}

void echo_tolerances(AnalysisReport& r, const LogicOptions& opts) {
  r.inputs.tolerances = {{"loop_tol", opts.denote.loop_tol}, {"hoare_tol", opts.hoare_tol},
                         {"a_tol", opts.a_tol},              {"leak_tol", opts.leak_tol},
                         {"reset_tol", opts.reset_tol},      {"sdp_gap_tol", opts.sdp.gap_tol}};
}

double total_residual(const DerivationTree& t) {
  double s = t.residual;
  for (const auto& p : t.premises) s += total_residual(p);
  return s;
}

void collect_loops(AnalysisReport& r, const DerivationTree& t) {
  if (t.rule == Rule::WhileBounded && t.certificate) {
    const auto& c = *t.certificate;
    r.loops.push_back({t.conclusion.path, true, c.a, c.n, c.off_support_leak, ""});
  } else if (t.rule == Rule::WhileUnbounded) {
    r.loops.push_back({t.conclusion.path, false, 1.0, 0, 0.0, "bounded by the unconditional rule"});
  }
  for (const auto& p : t.premises) collect_loops(r, p);
}

void find_loops(const Program& p, AstPath path, std::vector<std::pair<AstPath, Program>>& out) {
  if (p.kind() == NodeKind::While) out.emplace_back(path, p);
  for (std::size_t i = 0; i < p.children().size(); ++i) {
    path.push_back(i);
    find_loops(p.children()[i], path, out);
    path.pop_back();
  }
}

std::string decimal(double x) {
  std::ostringstream s;
  s << std::setprecision(15) << x;
  return s.str();
}

std::string bits_of(const std::string& s) {
  return !s.empty() && s.find_first_not_of("01") == std::string::npos ? s : "";
}

}  // namespace

Superoperator channel_from_spec(const std::string& spec, const Elaborated* ctx) {
  std::optional<Superoperator> acc;
  std::stringstream ss(spec);
  std::string piece;
  while (std::getline(ss, piece, ';')) {
    piece = trim(piece);
    if (piece.empty()) throw ValidationError({"channel spec '" + spec + "' has an empty factor"});
    Superoperator next = eval_channel(piece, ctx);
    if (acc && acc->d_in() != next.d_out())
      throw DimensionError("channel spec '" + spec + "': factor '" + piece + "' does not fit");
    acc = acc ? compose(*acc, next) : next;
  }
  if (!acc) throw ValidationError({"empty channel spec"});
  return *acc;
}

ComplexMatrix predicate_from_spec(const std::string& spec, const Elaborated* ctx) {
  const std::string s = trim(spec);
  if (s.rfind("proj", 0) == 0 && !bits_of(s.substr(4)).empty()) return projector(basis_ket(s.substr(4)));
  return eval_matrix(s, ctx);
}

ComplexMatrix state_from_spec(const std::string& spec, const Elaborated& e) {
  const std::size_t dim = std::size_t{1} << e.reg.size();
  const ComplexMatrix m = eval_matrix(spec, &e);
  ComplexMatrix rho;
  if (m.cols() == 1 && m.rows() == dim) rho = projector(m);
  else if (m.rows() == dim && m.cols() == dim) rho = m;
  else
    throw DimensionError("input state '" + spec + "' does not match the " + std::to_string(e.reg.size()) +
                         "-qubit register");
  return DensityOperator(rho).matrix();
}

AnalysisReport cmd_analyze(const AnalyzeRequest& req) {
  return run("analyze", [&](AnalysisReport& r) {
    r.inputs.seed = req.seed;
    r.inputs.options["semantic"] = req.semantic ? "true" : "false";
    const Elaborated e = load(r, req.file, req.params);
    echo_noise(r, e.body, {});

    Annotation ann;
    std::string annot_path;
    if (req.annotation) {
      annot_path = *req.annotation;
    } else if (req.discover_annotation) {
      const fs::path sibling = fs::path(req.file).replace_extension(".annot.json");
      if (fs::exists(sibling)) annot_path = sibling.string();
    }
    if (!annot_path.empty()) {
      ann = parse_annotation(read_file(annot_path), e);
      r.inputs.annotation = annot_path;
    }

    LogicOptions opts;
    echo_tolerances(r, opts);
    const DerivationTree tree = auto_derive(e, ann, opts);
    r.results.push_back({"derived_epsilon", tree.conclusion.epsilon, opts.sdp.gap_tol, total_residual(tree)});
    r.results.push_back({"derived_lambda", tree.conclusion.lambda, 0.0, 0.0});
    r.derivation = DerivationSummary{to_string(tree.rule), tree.conclusion.epsilon, tree.conclusion.lambda,
                                     tree.size(), tree.verified(), derivation_to_json(tree)};
    collect_loops(r, tree);
    r.matrices.push_back({"derived_precondition", tree.conclusion.q});

    if (req.semantic) {
      LogicOptions sem = opts;
      sem.sdp.dump_path = req.dump_sdp;
      const SemanticResult s = semantic_robustness(e, sem);
      r.results.push_back({"semantic_epsilon", s.value, s.gap, s.residual});
      r.results.push_back({"semantic_bound", s.bound(), s.gap, 0.0});
      if (tree.conclusion.lambda > 0.0) {
        const SemanticResult c = semantic_robustness(e, tree.conclusion.q, tree.conclusion.lambda, opts);
        r.results.push_back({"semantic_epsilon_at_conclusion", c.value, c.gap, c.residual});
      }
    }
    if (!tree.verified()) {
      r.diagnostics.push_back("derivation has unverified side conditions");
      r.exit_code = 3;
    }
  });
}

AnalysisReport cmd_diamond(const DiamondRequest& req) {
  return run("diamond", [&](AnalysisReport& r) {
    r.inputs.seed = req.seed;
    r.inputs.options = {{"a", req.spec_a}, {"b", req.spec_b}, {"Q", req.q.empty() ? "I" : req.q},
                        {"lambda", decimal(req.lambda)}, {"trials", std::to_string(req.trials)}};
    std::optional<Elaborated> ctx;
    if (!req.definitions.empty()) ctx = load(r, req.definitions, req.params);
    const Elaborated* c = ctx ? &*ctx : nullptr;
    const Superoperator a = channel_from_spec(req.spec_a, c);
    const Superoperator b = channel_from_spec(req.spec_b, c);
    if (a.d_in() != b.d_in() || a.d_out() != b.d_out())
      throw DimensionError("channels '" + req.spec_a + "' and '" + req.spec_b + "' have different shapes");
    const ComplexMatrix q = req.q.empty() ? ComplexMatrix::identity(a.d_in()) : predicate_from_spec(req.q, c);
    if (q.rows() != a.d_in() || q.cols() != a.d_in()) throw DimensionError("Q does not match the channel input");
    const Predicate pred(q);
    if (!(req.lambda >= 0.0 && req.lambda <= 1.0)) throw ValidationError({"lambda must lie in [0, 1]"});

    SdpOptions so;
    so.dump_path = req.dump_sdp;
    r.inputs.tolerances = {{"sdp_gap_tol", so.gap_tol}, {"sdp_feas_tol", so.feas_tol}};
    SdpInstance inst;
    inst.objective = choi_rect(a) - choi_rect(b);
    inst.d_out = a.d_out();
    inst.d_in = a.d_in();
    inst.q = q;
    inst.lambda = req.lambda;
    const SdpSolution sol = sdp_solve(inst, so);
    const double lower = sampled_lower_bound(a, b, pred, req.lambda, req.trials, req.seed);
    r.results.push_back({"diamond_norm", sol.value, so.gap_tol, 0.0});
    r.results.push_back({"duality_gap", sol.duality_gap, 0.0, 0.0});
    r.results.push_back({"sampled_lower_bound", lower, 0.0, 0.0});
    r.results.push_back({"iterations", static_cast<double>(sol.iterations), 0.0, 0.0});
    if (sol.face_reduced) r.notes.push_back("lambda equals the top of Q's spectrum; input restricted to that eigenspace");
    if (sol.constraint_dropped) r.notes.push_back("lambda is at or below the bottom of Q's spectrum; constraint dropped");
    r.matrices.push_back({"optimal_input", sol.rho});
  });
}

AnalysisReport cmd_bounded(const BoundedRequest& req) {
  return run("bounded", [&](AnalysisReport& r) {
    r.inputs.options["n_max"] = std::to_string(req.n_max);
    if (req.n_max < 1) throw ValidationError({"--n-max must be positive"});
    const Elaborated e = load(r, req.file, req.params);
    LogicOptions opts;
    echo_tolerances(r, opts);
    std::vector<std::pair<AstPath, Program>> loops;
    find_loops(e.body, {}, loops);
    if (loops.empty()) throw ValidationError({"program '" + e.name + "' contains no while loop"});
    for (const auto& [path, loop] : loops) {
      const BoundednessResult b = boundedness_search(loop, e.reg, req.n_max, opts);
      r.loops.push_back({path, b.bounded, b.certificate.a, b.certificate.n, b.certificate.off_support_leak,
                         b.diagnostic});
    }
  });
}

AnalysisReport cmd_simulate(const SimulateRequest& req) {
  return run("simulate", [&](AnalysisReport& r) {
    r.inputs.options = {{"input", req.input}, {"mode", req.mode}};
    if (req.mode != "op" && req.mode != "den") throw ValidationError({"--mode must be op or den"});
    const Elaborated e = load(r, req.file, req.params);
    echo_noise(r, e.body, {});
    const ComplexMatrix rho = state_from_spec(req.input, e);
    r.matrices.push_back({"input", rho});
    ComplexMatrix out;
    double residual = 0.0;
    if (req.mode == "op") {
      OperationalOptions oo;
      r.inputs.tolerances = {{"cutoff", oo.cutoff}, {"step_budget", static_cast<double>(oo.step_budget)}};
      oo.observer = [&](const Configuration& c) {
        r.trace.push_back({r.trace.size(), c.terminated() ? "" : one_line(to_source(c.program)),
                           trace(c.state).real(), c.state});
      };
      const OperationalResult res = run_operational(e.body, e.reg, rho, oo);
      out = res.state;
      residual = res.residual;
      r.results.push_back({"steps", static_cast<double>(res.steps), 0.0, 0.0});
    } else {
      DenoteOptions dopt;
      r.inputs.tolerances = {{"loop_tol", dopt.loop_tol}};
      const DenotedMap m = denote(e.body, e.reg, dopt);
      out = m.apply(rho);
      residual = m.residual;
    }
    r.results.push_back({"output_trace", trace(out).real(), 0.0, residual});
    r.matrices.push_back({"output", out});
  });
}

}  // namespace qrobust
