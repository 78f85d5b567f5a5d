// qrobust: robustness analysis of noisy quantum while-programs.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "qrobust/cli.hpp"

namespace fs = std::filesystem;
using namespace qrobust;

namespace {

constexpr std::uint64_t kDefaultSeed = 20241014;

std::uint64_t default_seed() {
  if (const char* s = std::getenv("QROBUST_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      std::cerr << "qrobust: ignoring malformed QROBUST_SEED '" << s << "'\n";
    }
  }
  return kDefaultSeed;
}

ParamMap parse_params(const std::vector<std::string>& items) {
  ParamMap out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError({"--param expects NAME=VALUE, got '" + item + "'"});
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() - eq - 1) throw ValidationError({"--param value is not a number: '" + item + "'"});
    out[item.substr(0, eq)] = v;
  }
  return out;
}

void write_json(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
}

int emit(const AnalysisReport& r, const std::string& json_path, bool tree) {
  std::cout << report_to_text(r, tree);
  for (const auto& d : r.diagnostics) std::cerr << "qrobust: " << r.inputs.file << ": " << d << "\n";
  write_json(json_path, report_to_json(r));
  return r.exit_code;
}

// Analyses every .qw file of a directory on a small worker pool; reports keep file order.
int analyze_all(const AnalyzeRequest& base, const std::string& dir, unsigned jobs, const std::string& json_path,
                bool tree) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".qw") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError({"no .qw files in '" + dir + "'"});

  std::vector<AnalysisReport> reports(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      AnalyzeRequest req = base;
      req.file = files[i];
      reports[i] = cmd_analyze(req);
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(files.size())));
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = 0;
  for (const auto& r : reports) {
    std::cout << report_to_text(r, tree);
    for (const auto& d : r.diagnostics) std::cerr << "qrobust: " << r.inputs.file << ": " << d << "\n";
    code = std::max(code, r.exit_code);
  }
  write_json(json_path, reports_to_json(reports));
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness analysis of noisy quantum while-programs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string json_path;
  std::vector<std::string> params;
  std::uint64_t seed = default_seed();
  auto common = [&](CLI::App* c) {
    c->add_option("--json", json_path, "Write the machine-readable report to this path");
    c->add_option("--param", params, "Parameter override NAME=VALUE (repeatable)");
  };

  auto* analyze = app.add_subcommand("analyze", "Derive a robustness bound for a program");
  std::string file, all_dir, annot, dump_sdp;
  bool semantic = false, no_annot = false, tree = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  analyze->add_option("file", file, "Program (.qw)");
  analyze->add_option("--all", all_dir, "Analyse every .qw file in a directory");
  analyze->add_option("--annot", annot, "Annotation document (JSON)");
  analyze->add_flag("--no-annot", no_annot, "Ignore <stem>.annot.json next to the program");
  analyze->add_flag("--semantic", semantic, "Also evaluate the definition-level robustness");
  analyze->add_flag("--tree", tree, "Print the derivation tree");
  analyze->add_option("--dump-sdp", dump_sdp, "Write the top-level semantic SDP in SDPA sparse format");
  analyze->add_option("--jobs", jobs, "Worker threads for --all");
  analyze->add_option("--seed", seed, "Seed for randomised bounds (default QROBUST_SEED)");
  common(analyze);

  auto* diamond = app.add_subcommand("diamond", "(Q, lambda)-diamond distance between two channels");
  DiamondRequest dreq;
  std::string q_spec;
  diamond->add_option("a", dreq.spec_a, "First channel, e.g. \"H;Z\"")->required();
  diamond->add_option("b", dreq.spec_b, "Second channel")->required();
  diamond->add_option("--Q", q_spec, "Input predicate (proj0, I, matrix expression)");
  diamond->add_option("--lambda", dreq.lambda, "Threshold on tr(Q rho)");
  diamond->add_option("--defs", dreq.definitions, "Program whose definitions the specs may name");
  diamond->add_option("--trials", dreq.trials, "Samples for the lower bound");
  diamond->add_option("--dump-sdp", dreq.dump_sdp, "Write the SDP in SDPA sparse format");
  diamond->add_option("--seed", seed, "Seed for the sampled lower bound (default QROBUST_SEED)");
  common(diamond);

  auto* bounded = app.add_subcommand("bounded", "Search (a, n)-boundedness certificates for every loop");
  BoundedRequest breq;
  bounded->add_option("file", breq.file, "Program (.qw)")->required();
  bounded->add_option("--n-max", breq.n_max, "Largest n tried");
  common(bounded);

  auto* simulate = app.add_subcommand("simulate", "Run a program on an input state");
  SimulateRequest sreq;
  simulate->add_option("file", sreq.file, "Program (.qw)")->required();
  simulate->add_option("--input", sreq.input, "Basis label such as \"|1>\" or a density-matrix literal")->required();
  simulate->add_option("--mode", sreq.mode, "op (configuration trace) or den (denotation)");
  common(simulate);

  auto* report = app.add_subcommand("report", "Re-emit a saved JSON report");
  std::string report_in;
  report->add_option("file", report_in, "Report written by --json")->required();
  report->add_flag("--tree", tree, "Print the derivation tree");
  report->add_option("--json", json_path, "Write the re-emitted report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const ParamMap pm = parse_params(params);
    if (analyze->parsed()) {
      AnalyzeRequest req;
      req.params = pm;
      req.semantic = semantic;
      req.discover_annotation = !no_annot;
      if (!annot.empty()) req.annotation = annot;
      req.dump_sdp = dump_sdp;
      req.seed = seed;
      if (!all_dir.empty()) return analyze_all(req, all_dir, jobs, json_path, tree);
      if (file.empty()) throw ValidationError({"analyze needs a program file or --all <dir>"});
      req.file = file;
      return emit(cmd_analyze(req), json_path, tree);
    }
    if (diamond->parsed()) {
      dreq.q = q_spec;
      dreq.params = pm;
      dreq.seed = seed;
      return emit(cmd_diamond(dreq), json_path, false);
    }
    if (bounded->parsed()) {
      breq.params = pm;
      return emit(cmd_bounded(breq), json_path, false);
    }
    if (simulate->parsed()) {
      sreq.params = pm;
      return emit(cmd_simulate(sreq), json_path, false);
    }
    if (report->parsed()) {
      std::ifstream f(report_in);
      if (!f) throw Error("cannot read '" + report_in + "'");
      const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      const auto reports = reports_from_json(text);
      int code = 0;
      for (const auto& r : reports) {
        std::cout << report_to_text(r, tree);
        code = std::max(code, r.exit_code);
      }
      write_json(json_path, reports.size() == 1 && text.find("\"reports\"") == std::string::npos
                                ? report_to_json(reports[0])
                                : reports_to_json(reports));
      return code;
    }
  } catch (const ValidationError& v) {
    for (const auto& d : v.diagnostics()) std::cerr << "qrobust: " << d << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "qrobust: " << ex.what() << "\n";
    return exit_code_for(ex);
  }
  return 0;
}
