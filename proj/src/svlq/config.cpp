#include "svlq/config.hpp"

#include "svlq/csv.hpp"

#include <cmath>
#include <set>

namespace svlq {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
  throw ValidationError("config:" + field, "config field '" + field + "': " + msg);
}

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) bad(where.empty() ? k : where + "." + k, "unknown field");
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) bad(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(field, "must be finite");
  return x;
}

std::size_t count(const json& v, const std::string& field, std::size_t min) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) bad(field, "expected an integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < static_cast<std::int64_t>(min))
    bad(field, "must be at least " + std::to_string(min));
  return v.get<std::size_t>();
}

std::string text(const json& v, const std::string& field) {
  if (!v.is_string()) bad(field, "expected a string");
  return v.get<std::string>();
}

// Number -> 1x1, array of numbers -> column, array of rows -> matrix.
Mat matrix(const json& v, const std::string& field) {
  if (v.is_number()) return Mat::Constant(1, 1, number(v, field));
  if (!v.is_array() || v.empty()) bad(field, "expected a number or a non-empty array");
  if (!v.front().is_array()) {
    Mat m(static_cast<Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Index>(i), 0) = number(v[i], field);
    return m;
  }
  const std::size_t cols = v.front().size();
  Mat m(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) bad(field, "rows must be arrays of equal length");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = number(v[i][j], field);
  }
  return m;
}

Vec vector(const json& v, const std::string& field) {
  const Mat m = matrix(v, field);
  if (m.cols() != 1) bad(field, "expected a vector");
  return m.col(0);
}

// Curves: {"preset": "zero"} | {"preset": "constant", "value": v} |
// {"poly": [[c0, c1, ...], ...]} with one coefficient list per component.
Curve curve(const json& v, const std::string& field, Index dim) {
  if (!v.is_object()) bad(field, "expected a curve object");
  if (v.contains("poly")) {
    allow_keys(v, field, {"poly"});
    const json& p = v["poly"];
    if (!p.is_array() || p.empty()) bad(field + ".poly", "expected a non-empty array");
    if (p.front().is_number()) {
      if (dim != 1) bad(field + ".poly", "a flat coefficient list needs a scalar curve");
      Mat c(1, static_cast<Index>(p.size()));
      for (std::size_t k = 0; k < p.size(); ++k) c(0, static_cast<Index>(k)) = number(p[k], field + ".poly");
      return Curve(c);
    }
    const Mat c = matrix(p, field + ".poly");
    if (c.rows() != dim) bad(field + ".poly", "expected " + std::to_string(dim) + " coefficient lists");
    return Curve(c);
  }
  allow_keys(v, field, {"preset", "value"});
  const std::string preset = v.contains("preset") ? text(v["preset"], field + ".preset") : "";
  if (preset == "zero") return Curve::zero(dim);
  if (preset == "constant") {
    if (!v.contains("value")) bad(field + ".value", "constant preset needs a value");
    const Vec val = v["value"].is_number() ? Vec::Constant(dim, number(v["value"], field + ".value"))
                                           : vector(v["value"], field + ".value");
    if (val.size() != dim) bad(field + ".value", "expected dimension " + std::to_string(dim));
    return Curve::constant(val);
  }
  bad(field, "expected poly, or preset zero or constant");
}

ModelCoefficients model_preset(const std::string& name) {
  if (name == "intro") return brownian_regulator(1.0);
  bad("model.preset", "unknown preset '" + name + "' (expected intro or none)");
}

void parse_model(const json& m, RunConfig& cfg) {
  allow_keys(m, "model", {"preset", "B", "C", "D", "F", "Q", "N", "L", "beta", "gamma", "g0", "horizon"});
  cfg.model_preset = m.contains("preset") ? text(m["preset"], "model.preset") : "intro";
  ModelCoefficients md;
  if (cfg.model_preset != "none") {
    md = model_preset(cfg.model_preset);
  } else {
    for (const char* k : {"B", "C", "Q", "N"})
      if (!m.contains(k)) bad(std::string("model.") + k, "required without a preset");
  }
  if (m.contains("Q")) md.Q = matrix(m["Q"], "model.Q");
  if (m.contains("N")) md.N = matrix(m["N"], "model.N");
  if (m.contains("B")) md.B = matrix(m["B"], "model.B");
  if (m.contains("C")) md.C = matrix(m["C"], "model.C");
  const Index d = md.Q.rows();
  const Index dp = md.B.rows();
  const Index mm = md.N.rows();
  md.D = m.contains("D") ? matrix(m["D"], "model.D") : (md.D.size() ? md.D : Mat::Zero(dp, d));
  md.F = m.contains("F") ? matrix(m["F"], "model.F") : (md.F.size() ? md.F : Mat::Zero(dp, mm));
  md.L = m.contains("L") ? vector(m["L"], "model.L") : (md.L.size() ? md.L : Vec::Zero(d));
  md.beta = m.contains("beta") ? curve(m["beta"], "model.beta", dp) : (md.beta.dim() ? md.beta : Curve::zero(dp));
  md.gamma = m.contains("gamma") ? curve(m["gamma"], "model.gamma", dp) : (md.gamma.dim() ? md.gamma : Curve::zero(dp));
  md.g0 = m.contains("g0") ? curve(m["g0"], "model.g0", d) : (md.g0.dim() ? md.g0 : Curve::zero(d));
  if (m.contains("horizon")) md.horizon = number(m["horizon"], "model.horizon");
  cfg.model = std::move(md);
}

void parse_kernel(const json& k, RunConfig& cfg) {
  allow_keys(k, "kernel", {"type", "hurst", "damping", "atoms", "path"});
  KernelConfig& kc = cfg.kernel;
  kc.type = k.contains("type") ? text(k["type"], "kernel.type") : "atomic";
  if (kc.type == "fractional" || kc.type == "gamma") {
    if (!k.contains("hurst")) bad("kernel.hurst", "required for " + kc.type);
    kc.hurst = number(k["hurst"], "kernel.hurst");
    if (kc.type == "gamma") kc.damping = k.contains("damping") ? number(k["damping"], "kernel.damping") : 0.0;
  } else if (kc.type == "atomic") {
    if (!k.contains("atoms") || !k["atoms"].is_array()) bad("kernel.atoms", "expected an array of atoms");
    for (const auto& a : k["atoms"]) {
      allow_keys(a, "kernel.atoms[]", {"theta", "c"});
      if (!a.contains("theta") || !a.contains("c")) bad("kernel.atoms[]", "atoms need theta and c");
      kc.atoms.push_back({matrix(a["c"], "kernel.atoms[].c"), number(a["theta"], "kernel.atoms[].theta")});
    }
  } else if (kc.type == "atoms_csv") {
    if (!k.contains("path")) bad("kernel.path", "required for atoms_csv");
    kc.atoms_csv = text(k["path"], "kernel.path");
  } else {
    bad("kernel.type", "unknown kernel type '" + kc.type + "'");
  }
}

}  // namespace

Task parse_task(const std::string& name) {
  if (name == "riccati") return Task::Riccati;
  if (name == "value") return Task::Value;
  if (name == "simulate") return Task::Simulate;
  if (name == "verify") return Task::Verify;
  if (name == "converge") return Task::Converge;
  if (name == "demo-regulator") return Task::DemoRegulator;
  bad("task", "unknown task '" + name + "'");
}

std::string task_name(Task t) {
  switch (t) {
    case Task::Riccati: return "riccati";
    case Task::Value: return "value";
    case Task::Simulate: return "simulate";
    case Task::Verify: return "verify";
    case Task::Converge: return "converge";
    case Task::DemoRegulator: return "demo-regulator";
  }
  return "riccati";
}

RunConfig parse_config(const json& doc) {
  allow_keys(doc, "", {"task", "kernel", "model", "discretization", "solver", "simulation", "converge", "threads",
                       "output_dir"});
  RunConfig cfg;
  if (!doc.contains("task")) bad("task", "required");
  cfg.task = parse_task(text(doc["task"], "task"));
  parse_model(doc.contains("model") ? doc["model"] : json::object(), cfg);

  if (doc.contains("kernel")) {
    parse_kernel(doc["kernel"], cfg);
  } else if (cfg.task == Task::DemoRegulator) {
    cfg.kernel.type = "fractional";
    cfg.kernel.hurst = 0.25;
  } else {
    // K = I, the conventional (Markovian) problem.
    if (cfg.model.Q.rows() != cfg.model.B.rows())
      bad("kernel", "required when the state and noise dimensions differ");
    cfg.kernel.atoms = {Atom{Mat::Identity(cfg.model.Q.rows(), cfg.model.B.rows()), 0.0}};
  }

  if (doc.contains("discretization")) {
    const json& d = doc["discretization"];
    allow_keys(d, "discretization", {"n", "r", "partition"});
    if (d.contains("n")) cfg.discretization.n = static_cast<int>(count(d["n"], "discretization.n", 1));
    if (d.contains("r")) cfg.discretization.ratio = number(d["r"], "discretization.r");
    if (d.contains("partition")) {
      if (!d["partition"].is_array()) bad("discretization.partition", "expected an array");
      for (const auto& x : d["partition"]) cfg.discretization.partition.push_back(number(x, "discretization.partition"));
    }
  }
  if (!(cfg.discretization.ratio > 1.0)) bad("discretization.r", "must exceed 1");
  const auto& part = cfg.discretization.partition;
  for (std::size_t i = 0; i < part.size(); ++i)
    if (part[i] < 0.0 || (i > 0 && !(part[i] > part[i - 1])))
      bad("discretization.partition", "must be nonnegative and strictly increasing");
  if (part.size() == 1) bad("discretization.partition", "needs at least two boundaries");

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    allow_keys(s, "solver", {"steps", "scheme", "symmetry_tol", "psd_tol", "csv_stride"});
    if (s.contains("steps")) cfg.solver.steps = count(s["steps"], "solver.steps", 1);
    if (s.contains("scheme")) cfg.solver.scheme = parse_scheme(text(s["scheme"], "solver.scheme"));
    if (s.contains("symmetry_tol")) cfg.solver.symmetry_tol = number(s["symmetry_tol"], "solver.symmetry_tol");
    if (s.contains("psd_tol")) cfg.solver.psd_tol = number(s["psd_tol"], "solver.psd_tol");
    if (s.contains("csv_stride")) cfg.csv_stride = count(s["csv_stride"], "solver.csv_stride", 0);
  }
  if (cfg.csv_stride == 0) cfg.csv_stride = std::max<std::size_t>(1, cfg.solver.steps / 200);

  const Index m = cfg.model.N.rows();
  SimulationConfig& sc = cfg.simulation;
  sc.control_curve = Curve::zero(m);
  sc.perturbation = Curve::zero(m);
  if (doc.contains("simulation")) {
    const json& s = doc["simulation"];
    allow_keys(s, "simulation", {"paths", "steps", "seed", "record_paths", "control", "control_curve", "perturbation"});
    if (s.contains("paths")) sc.paths = count(s["paths"], "simulation.paths", 2);
    if (s.contains("steps")) sc.steps = count(s["steps"], "simulation.steps", 1);
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned() && !(s["seed"].is_number_integer() && s["seed"].get<std::int64_t>() >= 0))
        bad("simulation.seed", "expected a non-negative integer");
      sc.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("record_paths")) sc.record_paths = count(s["record_paths"], "simulation.record_paths", 0);
    if (s.contains("control")) sc.control = text(s["control"], "simulation.control");
    if (s.contains("control_curve")) sc.control_curve = curve(s["control_curve"], "simulation.control_curve", m);
    if (s.contains("perturbation")) sc.perturbation = curve(s["perturbation"], "simulation.perturbation", m);
  }
  if (sc.control != "feedback" && sc.control != "zero" && sc.control != "open_loop")
    bad("simulation.control", "expected feedback, zero or open_loop");

  if (doc.contains("converge")) {
    const json& c = doc["converge"];
    allow_keys(c, "converge", {"ns", "ratios", "g0_shift", "reference_value"});
    if (c.contains("ns")) {
      if (!c["ns"].is_array() || c["ns"].empty()) bad("converge.ns", "expected a non-empty array");
      cfg.converge.ns.clear();
      for (const auto& n : c["ns"]) cfg.converge.ns.push_back(static_cast<int>(count(n, "converge.ns", 1)));
    }
    if (c.contains("ratios")) {
      if (!c["ratios"].is_array()) bad("converge.ratios", "expected an array");
      for (const auto& r : c["ratios"]) cfg.converge.ratios.push_back(number(r, "converge.ratios"));
    }
    if (c.contains("g0_shift")) cfg.converge.g0_shift = text(c["g0_shift"], "converge.g0_shift");
    if (c.contains("reference_value") && !c["reference_value"].is_null())
      cfg.converge.reference_value = number(c["reference_value"], "converge.reference_value");
  }
  if (!cfg.converge.ratios.empty() && cfg.converge.ratios.size() != cfg.converge.ns.size())
    bad("converge.ratios", "must match converge.ns in length");
  if (cfg.converge.g0_shift != "none" && cfg.converge.g0_shift != "inverse_n")
    bad("converge.g0_shift", "expected none or inverse_n");

  if (doc.contains("threads")) cfg.threads = static_cast<unsigned>(count(doc["threads"], "threads", 1));
  if (doc.contains("output_dir")) cfg.output_dir = text(doc["output_dir"], "output_dir");

  // Every module precondition is checked here, before any computation.
  cfg.model.validate();
  (void)build_kernel(cfg);
  if (cfg.kernel.type == "fractional" || cfg.kernel.type == "gamma") {
    if (cfg.discretization.partition.empty())
      (void)fractional_atoms(cfg.kernel.hurst, cfg.discretization.n, cfg.discretization.ratio);
  }
  if (cfg.task == Task::DemoRegulator) {
    if (cfg.model.Q.size() != 1 || cfg.model.N.size() != 1)
      bad("model", "demo-regulator uses scalar Q and N");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  const std::string text = csv::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config:json", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

KernelSpec build_kernel(const RunConfig& cfg) {
  const KernelConfig& k = cfg.kernel;
  if (k.type == "fractional") return KernelSpec::fractional(k.hurst);
  if (k.type == "gamma") return KernelSpec::gamma(k.hurst, k.damping);
  if (k.type == "atoms_csv") {
    const Index rows = cfg.task == Task::DemoRegulator ? 1 : cfg.model.Q.rows();
    const Index cols = cfg.task == Task::DemoRegulator ? 1 : cfg.model.B.rows();
    return KernelSpec::atomic(read_atoms_csv(k.atoms_csv, rows, cols).atoms());
  }
  return KernelSpec::atomic(k.atoms);
}

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json curve_json(const Curve& c) { return json{{"poly", matrix_json(c.coeffs())}}; }

json resolved_json(const RunConfig& cfg) {
  json j;
  j["task"] = task_name(cfg.task);
  json k{{"type", cfg.kernel.type}};
  if (cfg.kernel.type == "fractional" || cfg.kernel.type == "gamma") k["hurst"] = cfg.kernel.hurst;
  if (cfg.kernel.type == "gamma") k["damping"] = cfg.kernel.damping;
  if (cfg.kernel.type == "atomic") {
    k["atoms"] = json::array();
    for (const auto& a : cfg.kernel.atoms) k["atoms"].push_back({{"theta", a.node}, {"c", matrix_json(a.weight)}});
  }
  if (cfg.kernel.type == "atoms_csv") k["path"] = cfg.kernel.atoms_csv;
  j["kernel"] = k;
  const ModelCoefficients& md = cfg.model;
  j["model"] = {{"preset", "none"},
                {"B", matrix_json(md.B)},
                {"C", matrix_json(md.C)},
                {"D", matrix_json(md.D)},
                {"F", matrix_json(md.F)},
                {"Q", matrix_json(md.Q)},
                {"N", matrix_json(md.N)},
                {"L", matrix_json(md.L)},
                {"beta", curve_json(md.beta)},
                {"gamma", curve_json(md.gamma)},
                {"g0", curve_json(md.g0)},
                {"horizon", md.horizon}};
  json disc{{"n", cfg.discretization.n}, {"r", cfg.discretization.ratio}};
  if (!cfg.discretization.partition.empty()) disc["partition"] = cfg.discretization.partition;
  j["discretization"] = disc;
  j["solver"] = {{"steps", cfg.solver.steps},
                 {"scheme", scheme_name(cfg.solver.scheme)},
                 {"symmetry_tol", cfg.solver.symmetry_tol},
                 {"psd_tol", cfg.solver.psd_tol},
                 {"csv_stride", cfg.csv_stride}};
  const SimulationConfig& s = cfg.simulation;
  j["simulation"] = {{"paths", s.paths},
                     {"steps", s.steps},
                     {"seed", s.seed},
                     {"record_paths", s.record_paths},
                     {"control", s.control},
                     {"control_curve", curve_json(s.control_curve)},
                     {"perturbation", curve_json(s.perturbation)}};
  json conv{{"ns", cfg.converge.ns}, {"ratios", cfg.converge.ratios}, {"g0_shift", cfg.converge.g0_shift}};
  conv["reference_value"] = cfg.converge.reference_value ? json(*cfg.converge.reference_value) : json(nullptr);
  j["converge"] = conv;
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace svlq
