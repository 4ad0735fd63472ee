// tcp_lab: command-line front end for the tensor complementarity toolkit.
//
// Exit codes: 0 success / property holds, 1 property fails or violation
// found, 2 error, inconclusive or vacuous.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcplab/builtin.hpp"
#include "tcplab/face_solver.hpp"
#include "tcplab/golden.hpp"
#include "tcplab/io.hpp"
#include "tcplab/lab.hpp"
#include "tcplab/properties.hpp"

using namespace tcplab;

namespace {

constexpr int kOk = 0;
constexpr int kFails = 1;
constexpr int kError = 2;

struct Options {
  std::string instance_path;
  std::string tensor_path;
  std::string example;
  std::string a_text;
  std::string out_path;
  std::string radii_text;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> tol;
  std::optional<double> box;
  double eps = 0.05;
  double delta = 0.5;
  int samples = 100;
  int m = 3;
  int n = 2;
};

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size() || !std::isfinite(v))
      throw LoadError(std::string(flag) + ": cannot parse '" + item + "' as a number");
    out.push_back(v);
  }
  if (out.empty()) throw LoadError(std::string(flag) + ": empty list");
  return out;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Tensor resolve_tensor(const Options& o) {
  if (!o.tensor_path.empty()) return load_tensor_file(o.tensor_path);
  if (!o.instance_path.empty()) return load_instance_file(o.instance_path).tensor();
  if (!o.example.empty()) return builtin_tensor(o.example, o.m, o.n);
  throw ArgumentError("a tensor is required: pass --tensor, --instance or --example");
}

TcpInstance resolve_instance(const Options& o) {
  if (!o.instance_path.empty()) {
    TcpInstance inst = load_instance_file(o.instance_path);
    if (o.a_text.empty()) return inst;
    return TcpInstance(inst.tensor(), to_vec(parse_list(o.a_text, "--a")));
  }
  Tensor t = resolve_tensor(o);
  if (o.a_text.empty()) throw ArgumentError("--a is required unless --instance is given");
  Vec a = to_vec(parse_list(o.a_text, "--a"));
  if (a.size() != t.dim()) throw ArgumentError("--a: expected " + std::to_string(t.dim()) + " entries");
  return TcpInstance(std::move(t), std::move(a));
}

LabConfig lab_config(const Options& o) {
  LabConfig cfg;
  cfg.seed = o.seed;
  cfg.check.solver.seed = o.seed;
  if (o.tol) cfg.check.solver.tol = *o.tol;
  if (o.box) cfg.check.solver.start_box_radius = *o.box;
  cfg.check.solver.validate();
  return cfg;
}

void emit(const Options& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.out_path, std::ios::binary);
  if (!out) throw LoadError(o.out_path + ": cannot open for writing");
  out << text;
}

bool wants_csv(const Options& o) {
  return o.out_path.size() >= 4 && o.out_path.compare(o.out_path.size() - 4, 4, ".csv") == 0;
}

void emit_report(const Options& o, const ExperimentReport& r) {
  if (wants_csv(o)) {
    emit(o, report_csv(r));
  } else {
    emit(o, dump_report(to_json(r)));
  }
}

int verdict_code(const PropertyReport& r) {
  switch (r.verdict) {
    case Verdict::HoldsNumerically: return kOk;
    case Verdict::Fails: return kFails;
    case Verdict::Inconclusive: return kError;
  }
  return kError;
}

bool flag(const Json& summary, const char* key) { return summary.contains(key) && summary[key].is_boolean() && summary[key].get<bool>(); }

int run_property(const Options& o, const std::string& which) {
  const LabConfig cfg = lab_config(o);
  const Tensor t = resolve_tensor(o);
  PropertyReport r;
  if (which == "check-r0") {
    r = check_r0(t, cfg.check);
  } else if (which == "check-copositive") {
    r = check_copositive(t, cfg.check);
  } else if (which == "check-monotone") {
    const Vec a = o.a_text.empty() ? Vec::Zero(t.dim()) : to_vec(parse_list(o.a_text, "--a"));
    r = check_monotone(t, a, cfg.check);
  } else {
    r = probe_gus(t, cfg.check);
  }
  emit(o, dump_report(to_json(r)));
  return verdict_code(r);
}

int run_golden(const Options& o) {
  std::ostringstream out;
  out << "table     a              expected                      computed                      result\n";
  bool all = true;
  for (const auto& r : golden_suite(lab_config(o).solver())) {
    char line[256];
    std::snprintf(line, sizeof line, "%-9s %-14s %-29s %-29s %s\n", r.c.table.c_str(), detail::fmt_vec(r.c.a).c_str(),
                  r.expected.c_str(), r.computed.c_str(), r.pass ? "PASS" : "FAIL");
    out << line;
    all = all && r.pass;
  }
  emit(o, out.str());
  return all ? kOk : kFails;
}

int dispatch(const std::string& cmd, const Options& o) {
  if (cmd == "solve") {
    const TcpInstance inst = resolve_instance(o);
    emit(o, dump_report(to_json(solve(inst, lab_config(o).solver()))));
    return kOk;
  }
  if (cmd == "check-r0" || cmd == "check-copositive" || cmd == "check-monotone" || cmd == "probe-gus")
    return run_property(o, cmd);
  if (cmd == "chi") {
    emit(o, std::to_string(chi_bound(o.m, o.n)) + "\n");
    return kOk;
  }
  if (cmd == "example") {
    if (o.example.empty()) throw ArgumentError("--example is required");
    const Tensor t = builtin_tensor(o.example, o.m, o.n);
    const Vec a = o.a_text.empty() ? Vec::Zero(t.dim()) : to_vec(parse_list(o.a_text, "--a"));
    if (a.size() != t.dim()) throw ArgumentError("--a: expected " + std::to_string(t.dim()) + " entries");
    emit(o, dump_exact(instance_to_json(TcpInstance(t, a))));
    return kOk;
  }
  if (cmd == "golden") return run_golden(o);

  const LabConfig cfg = lab_config(o);
  ExperimentReport r;
  int code = kOk;
  if (cmd == "boundedness") {
    const TcpInstance inst = resolve_instance(o);
    r = local_boundedness_probe(inst.tensor(), inst.offset(), o.eps, o.delta, o.samples, cfg);
    if (r.summary["unbounded_suspect"].get<std::size_t>() > 0) code = kFails;
    if (flag(r.summary, "vacuous")) code = kError;
  } else if (cmd == "openness") {
    const std::vector<double> radii = o.radii_text.empty() ? std::vector<double>{0.01, 0.1} : parse_list(o.radii_text, "--radii");
    r = r0_openness_probe(resolve_tensor(o), radii, o.samples, cfg);
    if (flag(r.summary, "vacuous")) code = kError;
  } else if (cmd == "genericity") {
    r = genericity_sample(o.m, o.n, o.samples, cfg);
  } else if (cmd == "usc") {
    r = usc_probe(resolve_instance(o), o.eps, o.samples, cfg);
    if (flag(r.summary, "usc_violation_witness")) code = kFails;
    if (flag(r.summary, "vacuous")) code = kError;
  } else if (cmd == "hoelder") {
    const std::vector<double> radii =
        o.radii_text.empty() ? std::vector<double>{0.2, 0.1, 0.05, 0.02, 0.01} : parse_list(o.radii_text, "--radii");
    const TcpInstance inst = resolve_instance(o);
    r = hoelder_fit(inst.tensor(), inst.offset(), radii, o.samples, cfg);
    if (flag(r.summary, "vacuous")) code = kError;
  } else if (cmd == "stability") {
    const TcpInstance inst = resolve_instance(o);
    r = stability_inclusion_check(inst.tensor(), inst.offset(), o.eps, o.samples, cfg);
    if (r.summary.contains("violations") && r.summary["violations"].get<std::size_t>() > 0) code = kFails;
    if (flag(r.summary, "vacuous") || flag(r.summary, "inconclusive")) code = kError;
  } else {
    throw ArgumentError("unknown command " + cmd);
  }
  emit_report(o, r);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor complementarity problems: solver, property checks and perturbation experiments"};
  app.require_subcommand(1);
  Options o;

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"solve", "Solve TCP(A, a) by pseudo-face enumeration"},
      {"check-r0", "Check whether Sol(A, 0) = {0}"},
      {"check-copositive", "Minimize A x^m over the unit simplex"},
      {"check-monotone", "Sample <F(y) - F(x), y - x> over pairs in the orthant"},
      {"probe-gus", "Count solutions over sampled offsets a"},
      {"chi", "Print the component bound d (2d - 1)^(5n)"},
      {"boundedness", "Local boundedness probe over joint perturbations"},
      {"openness", "Fraction of R0 tensors on spheres around A"},
      {"genericity", "Fraction of Gaussian tensors that are R0"},
      {"usc", "Excess of perturbed solution sets over Sol(A, a), shells eps/2^k"},
      {"hoelder", "Fit excess ~ gamma r^c over offset perturbations"},
      {"stability", "Inclusion check over copositive joint perturbations"},
      {"example", "Write a built-in instance as JSON"},
      {"golden", "Run the closed-form golden suite"},
  };
  for (const auto& s : commands) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--instance", o.instance_path, "Instance JSON file");
    sub->add_option("--tensor", o.tensor_path, "Tensor JSON file");
    sub->add_option("--example", o.example, "Built-in tensor: ex1, gus, monotone, zero");
    sub->add_option("--a", o.a_text, "Offset vector, comma separated");
    sub->add_option("--out", o.out_path, "Output path (.csv writes experiment rows as CSV)");
    sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    sub->add_option_function<double>("--tol", [&](double v) { o.tol = v; }, "Classification tolerance");
    sub->add_option_function<double>("--box", [&](double v) { o.box = v; }, "Newton start box radius (default 5)");
    sub->add_option("--eps", o.eps, "Tensor perturbation radius")->capture_default_str();
    sub->add_option("--delta", o.delta, "Offset perturbation radius")->capture_default_str();
    sub->add_option("--radii", o.radii_text, "Radii, comma separated");
    sub->add_option("--samples", o.samples, "Samples per radius / shell / run")->capture_default_str();
    sub->add_option("--m", o.m, "Tensor order")->capture_default_str();
    sub->add_option("--n", o.n, "Tensor dimension")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return dispatch(cmd, o);
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const ResourceError& e) {
    std::cerr << "error: resource guard: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kError;
}
