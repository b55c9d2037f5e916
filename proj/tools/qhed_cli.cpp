// qhed: edge detection, k-space, benchmark and cutting demos from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qhed/benchmark.hpp"
#include "qhed/builders.hpp"
#include "qhed/cutting.hpp"
#include "qhed/error.hpp"
#include "qhed/imaging.hpp"
#include "qhed/pipeline.hpp"
#include "qhed/rng.hpp"
#include "qhed/state.hpp"
#include "qhed/transpile.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qhed;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Resource: return 3;
    case ErrorKind::Numerical:
    case ErrorKind::Normalization:
    case ErrorKind::Aggregation: return 4;
    default: return 2;
  }
}

// ---- flag values -----------------------------------------------------------

DecrementVariant parse_variant(const std::string& s) {
  if (s == "original") return DecrementVariant::Mcx;
  if (s == "modified") return DecrementVariant::Ancilla;
  throw ParseError("variant must be original or modified, got '" + s + "'");
}

std::vector<Axis> parse_axes(const std::string& s) {
  if (s == "row") return {Axis::Row};
  if (s == "col") return {Axis::Column};
  if (s == "depth") return {Axis::Depth};
  if (s == "all") return {};
  throw ParseError("axis must be row, col, depth or all, got '" + s + "'");
}

std::uint64_t parse_count(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || s.front() == '-') throw ParseError(flag + " expects a non-negative integer, got '" + s + "'");
  return v;
}

std::optional<std::uint64_t> parse_shots(const std::string& s) {
  if (s == "exact") return std::nullopt;
  return parse_count(s, "--shots");
}

std::optional<int> parse_width(const std::string& s) {
  if (s == "off") return std::nullopt;
  return static_cast<int>(parse_count(s, "--max-width"));
}

/// "off", inline "p1=..,p2=..,p_readout=.." or a key=value file.
std::optional<NoiseModel> parse_noise(const std::string& s) {
  if (s == "off") return std::nullopt;
  if (s == "default") return NoiseModel{};
  if (s.find('=') != std::string::npos && !fs::exists(s)) {
    std::string text = s;
    for (char& c : text)
      if (c == ',') c = '\n';
    return parse_noise_config(text);
  }
  return load_noise_config(s);
}

std::string noise_flag(const std::optional<NoiseModel>& n) {
  if (!n) return "off";
  std::ostringstream o;
  o.precision(17);
  o << "p1=" << n->p1 << ",p2=" << n->p2 << ",p_readout=" << n->p_readout;
  return o.str();
}

json noise_json(const std::optional<NoiseModel>& n) {
  if (!n) return nullptr;
  return {{"p1", n->p1}, {"p2", n->p2}, {"p_readout", n->p_readout}};
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// ---- files -----------------------------------------------------------------

ImageFormat format_for(const std::string& path) {
  const std::string ext = fs::path(path).extension().string();
  return ext == ".pgm" || ext == ".PGM" ? ImageFormat::Pgm : ImageFormat::RawVol;
}

std::string encode_for(const std::string& path, const ImageVolume& v) {
  if (format_for(path) == ImageFormat::Pgm) {
    if (v.depth != 1) throw ShapeError("PGM output is 2D only; use a .qvol path for volumes");
    return encode_pgm(v);
  }
  return encode_rawvol(v);
}

/// out = dir/name.ext -> dir/name.<suffix>
std::string sibling(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  return (p.parent_path() / (p.stem().string() + "." + suffix)).string();
}

void write_manifest(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::string variant_flag(DecrementVariant v) { return v == DecrementVariant::Mcx ? "original" : "modified"; }

json config_json(const RunConfig& c) {
  json axes = json::array();
  for (Axis a : c.axes) axes.push_back(to_string(a));
  return {{"n_encode", c.n_encode},
          {"variant", variant_flag(c.variant)},
          {"noise", noise_json(c.noise)},
          {"shots", opt_json(c.shots)},
          {"max_width", opt_json(c.max_width)},
          {"workers", c.workers},
          {"seed", c.seed},
          {"threshold", c.threshold},
          {"axes", axes}};
}

std::string num(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

std::vector<std::string> run_argv(const std::string& cmd, const std::string& input, const std::string& axis,
                                  const RunConfig& c, const std::string& out, bool with_noise) {
  std::vector<std::string> a{"qhed", cmd, "--input", input};
  if (!axis.empty()) a.insert(a.end(), {"--axis", axis});
  a.insert(a.end(), {"--qubits", std::to_string(c.n_encode), "--variant", variant_flag(c.variant)});
  if (with_noise) a.insert(a.end(), {"--noise", noise_flag(c.noise)});
  a.insert(a.end(), {"--shots", c.shots ? std::to_string(*c.shots) : "exact", "--max-width",
                     c.max_width ? std::to_string(*c.max_width) : "off", "--workers", std::to_string(c.workers),
                     "--seed", std::to_string(c.seed), "--threshold", num(c.threshold), "--out", out});
  return a;
}

json jobs_json(const JobAccounting& j) {
  return {{"windows", j.windows},
          {"terms_per_plan", j.terms_per_plan},
          {"fragments_per_term", j.fragments_per_term},
          {"logical_jobs", j.logical_jobs},
          {"executed_jobs", j.executed_jobs}};
}

// ---- shared run flags ------------------------------------------------------

struct RunFlags {
  std::string input, out, axis = "all", variant = "modified", noise = "off", shots = "4096", max_width = "off";
  int qubits = 5;
  int workers = 1;
  std::uint64_t seed = 0;
  double threshold = 0.5;

  void add(CLI::App* app, bool with_axis, bool with_noise) {
    app->add_option("--input", input, "input file")->required();
    app->add_option("--out", out, "output edge map (.pgm or .qvol)")->required();
    if (with_axis) app->add_option("--axis", axis, "row|col|depth|all")->capture_default_str();
    app->add_option("--qubits", qubits, "encoding qubits per window")->capture_default_str();
    app->add_option("--variant", variant, "original|modified")->capture_default_str();
    if (with_noise) app->add_option("--noise", noise, "off, a key=value file, or inline p1=..,p2=..,p_readout=..")->capture_default_str();
    app->add_option("--shots", shots, "shot count or exact")->capture_default_str();
    app->add_option("--max-width", max_width, "fragment width cap or off")->capture_default_str();
    app->add_option("--workers", workers, "worker threads")->capture_default_str();
    app->add_option("--seed", seed, "run seed")->capture_default_str();
    app->add_option("--threshold", threshold, "edge threshold in [0, 1]")->capture_default_str();
  }

  RunConfig config() const {
    RunConfig c;
    c.n_encode = qubits;
    c.variant = parse_variant(variant);
    c.noise = parse_noise(noise);
    c.shots = parse_shots(shots);
    c.max_width = parse_width(max_width);
    c.workers = workers;
    c.seed = seed;
    c.threshold = threshold;
    c.axes = parse_axes(axis);
    c.validate();
    return c;
  }
};

void write_metrics(const std::string& path, const MetricsRecord& m) { write_file(path, to_csv({m})); }

int cmd_edges(const RunFlags& f) {
  const RunConfig c = f.config();
  const ImageVolume img = load_image(f.input, format_for(f.input));
  const PipelineResult r = run_qhed_pipeline(img, c);
  const std::string mags = sibling(f.out, "magnitude" + fs::path(f.out).extension().string());
  const std::string metrics = sibling(f.out, "metrics.csv");
  write_file(f.out, encode_for(f.out, r.edges));
  write_file(mags, encode_for(mags, r.magnitudes));
  write_metrics(metrics, r.metrics);
  write_manifest(sibling(f.out, "manifest.json"),
                 {{"command", "edges"},
                  {"argv", run_argv("edges", f.input, f.axis, c, f.out, true)},
                  {"input", f.input},
                  {"config", config_json(c)},
                  {"jobs", jobs_json(r.jobs)},
                  {"outputs", {{"edges", f.out}, {"magnitudes", mags}, {"metrics", metrics}}}});
  std::cout << "edges: " << img.width << "x" << img.height << "x" << img.depth << ", " << r.jobs.windows
            << " windows, " << r.jobs.executed_jobs << " jobs -> " << f.out << "\n";
  return 0;
}

std::vector<std::vector<cplx>> load_kspace(const std::string& path) {
  if (fs::path(path).extension() == ".csv") return parse_complex_csv(read_file(path));
  const ImageVolume v = load_image(path, ImageFormat::RawVol);
  std::vector<std::vector<cplx>> rows;
  for (int z = 0; z < v.depth; ++z)
    for (int y = 0; y < v.height; ++y) {
      std::vector<cplx> row(v.width);
      for (int x = 0; x < v.width; ++x) row[x] = v.at(x, y, z);
      rows.push_back(std::move(row));
    }
  return rows;
}

int cmd_kspace(const RunFlags& f) {
  RunConfig c = f.config();
  c.noise.reset();
  const KspaceResult r = run_kspace_pipeline(load_kspace(f.input), c);
  c.axes = {Axis::Row};
  const std::string ext = fs::path(f.out).extension().string();
  const std::string image = sibling(f.out, "image" + ext), mags = sibling(f.out, "magnitude" + ext);
  const std::string metrics = sibling(f.out, "metrics.csv");
  // the recovered image keeps its own scale in .qvol; PGM output is normalized
  ImageVolume shown = r.image;
  if (format_for(image) == ImageFormat::Pgm) {
    double top = 0.0;
    for (double v : shown.values) top = std::max(top, v);
    if (top > 0)
      for (double& v : shown.values) v /= top;
  }
  write_file(f.out, encode_for(f.out, r.edges.edges));
  write_file(mags, encode_for(mags, r.edges.magnitudes));
  write_file(image, encode_for(image, shown));
  write_metrics(metrics, r.edges.metrics);
  write_manifest(sibling(f.out, "manifest.json"),
                 {{"command", "kspace"},
                  {"argv", run_argv("kspace", f.input, "", c, f.out, false)},
                  {"input", f.input},
                  {"config", config_json(c)},
                  {"jobs", jobs_json(r.edges.jobs)},
                  {"outputs", {{"edges", f.out}, {"magnitudes", mags}, {"image", image}, {"metrics", metrics}}}});
  std::cout << "kspace: " << r.image.height << " rows of " << r.image.width << " -> " << f.out << "\n";
  return 0;
}

struct BenchFlags {
  int min_q = 2, max_q = 8, seeds = 100, max_width = 5;
  std::vector<std::string> variants{"original", "modified"};
  std::string cut = "off", noise = "default", shots = "4096", out;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchFlags& f) {
  BenchmarkSweep s;
  s.min_n = f.min_q;
  s.max_n = f.max_q;
  s.seeds = f.seeds;
  s.variants.clear();
  for (const auto& v : f.variants) s.variants.push_back(parse_variant(v));
  if (f.cut != "on" && f.cut != "off") throw ParseError("--cut must be on or off");
  s.cut = f.cut == "on";
  s.max_width = f.max_width;
  const auto noise = parse_noise(f.noise);
  s.noise = noise ? *noise : NoiseModel::ideal();
  const auto shots = parse_shots(f.shots);
  if (!shots) throw ParseError("bench needs a shot count");
  s.shots = *shots;
  s.base_seed = f.seed;
  const auto rows = run_benchmark(s);
  write_file(f.out, to_csv(rows));
  std::vector<std::string> argv{"qhed", "bench", "--min-qubits", std::to_string(s.min_n), "--max-qubits",
                                std::to_string(s.max_n), "--seeds", std::to_string(s.seeds), "--variants"};
  for (const auto& v : f.variants) argv.push_back(v);
  argv.insert(argv.end(), {"--cut", f.cut, "--max-width", std::to_string(s.max_width), "--noise", noise_flag(s.noise),
                           "--shots", std::to_string(s.shots), "--seed", std::to_string(s.base_seed), "--out", f.out});
  write_manifest(sibling(f.out, "manifest.json"), {{"command", "bench"},
                                                   {"argv", argv},
                                                   {"sweep",
                                                    {{"min_n", s.min_n},
                                                     {"max_n", s.max_n},
                                                     {"seeds", s.seeds},
                                                     {"variants", f.variants},
                                                     {"cut", s.cut},
                                                     {"max_width", s.max_width},
                                                     {"noise", noise_json(s.noise)},
                                                     {"shots", s.shots},
                                                     {"base_seed", s.base_seed}}},
                                                   {"outputs", {{"metrics", f.out}}}});
  std::cout << "bench: " << rows.size() << " rows -> " << f.out << "\n";
  return 0;
}

struct CutDemoFlags {
  int qubits = 3;
  std::string variant = "modified", cuts, observable = "odd-projector", max_width = "5", out;
  std::uint64_t seed = 0;
};

int cmd_cut_demo(const CutDemoFlags& f) {
  if (f.observable != "odd-projector") throw ParseError("only the odd-projector observable is supported");
  if (f.qubits < 1 || f.qubits > 8) throw DomainError("--qubits must be in [1, 8]");
  const DecrementVariant variant = parse_variant(f.variant);
  const std::size_t W = std::size_t{1} << f.qubits;
  SplitMix64 g(f.seed);
  std::vector<double> window(W);
  for (double& v : window) v = std::floor(g.uniform() * 256.0);
  double norm = 0.0;
  for (double v : window) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) window[0] = norm = 1.0;
  std::vector<double> unit(W);
  for (std::size_t i = 0; i < W; ++i) unit[i] = window[i] / norm;

  const Circuit c = window_circuit(f.qubits, variant, &unit);
  const QhedCircuit q = build_qhed(f.qubits, variant);
  const auto reg = q.layout.register_wires();
  const auto width = parse_width(f.max_width);
  CutPlan plan = [&] {
    if (f.cuts.empty()) return plan_cuts(c, width.value_or(c.n_qubits()));
    auto cuts = parse_cut_manifest(read_file(f.cuts));
    return width ? plan_cuts(c, *width, cuts) : make_plan(c, cuts, c.n_qubits());
  }();

  ExactFragmentRunner runner(plan);
  const KnitResult dist = knit_z_distribution(plan, std::ref(runner), reg);
  const std::map<Wire, WireFactor> odd{{reg.front(), {0.0, 1.0}}};
  const KnitResult proj = knit_expectation(plan, [&](std::size_t t, std::size_t fr) -> std::optional<double> {
    return fragment_expectation(plan, term_at(plan, t), fr, *runner(t, fr), odd);
  });
  const auto uncut_p = marginalize(z_probabilities(run_circuit(prepare_basis_state(c.n_qubits(), 0), c)),
                                   c.n_qubits(), reg);
  double uncut_odd = 0.0;
  for (std::size_t i = 1; i < uncut_p.size(); i += 2) uncut_odd += uncut_p[i];

  std::ostringstream o;
  o.precision(12);
  o << "cuts " << plan.cuts.size() << ", fragments " << plan.fragments.size() << ", max fragment width "
    << plan.max_fragment_width() << ", terms " << plan.term_count() << ", one-norm " << plan.one_norm() << "\n";
  o << "quantity knitted uncut abs_diff\n";
  o << "odd_projector " << proj.value << " " << uncut_odd << " " << std::abs(proj.value - uncut_odd) << "\n";
  const auto kn = window_edges_from_probabilities(dist.distribution, norm);
  const auto un = window_edges_from_probabilities(uncut_p, norm);
  double worst = std::abs(proj.value - uncut_odd);
  for (std::size_t k = 0; k < kn.size(); ++k) {
    o << "edge_" << k << " " << kn[k] << " " << un[k] << " " << std::abs(kn[k] - un[k]) << "\n";
    worst = std::max(worst, std::abs(kn[k] - un[k]));
  }
  o << "max_abs_diff " << worst << "\n";
  std::cout << o.str();
  if (!f.out.empty()) {
    write_file(f.out, o.str());
    write_file(sibling(f.out, "cuts.txt"), write_cut_manifest(plan.cuts));
    std::vector<std::string> argv{"qhed", "cut-demo", "--qubits", std::to_string(f.qubits), "--variant", f.variant,
                                  "--max-width", f.max_width, "--observable", f.observable,
                                  "--seed", std::to_string(f.seed), "--out", f.out};
    if (!f.cuts.empty()) argv.insert(argv.end(), {"--cuts", f.cuts});
    write_manifest(sibling(f.out, "manifest.json"),
                   {{"command", "cut-demo"},
                    {"argv", argv},
                    {"cuts", write_cut_manifest(plan.cuts)},
                    {"outputs", {{"report", f.out}, {"cuts", sibling(f.out, "cuts.txt")}}}});
  }
  return 0;
}

struct DumpFlags {
  int qubits = 3;
  std::string variant = "modified", out;
  bool raw = false;
};

int cmd_dump(const DumpFlags& f) {
  const QhedCircuit q = build_qhed(f.qubits, parse_variant(f.variant));
  const std::string text = serialize(f.raw ? q.circuit : transpile(q.circuit));
  if (f.out.empty()) {
    std::cout << text;
    return 0;
  }
  write_file(f.out, text);
  std::vector<std::string> argv{"qhed", "dump-circuit", "--qubits", std::to_string(f.qubits), "--variant",
                                f.variant, "--out", f.out};
  if (f.raw) argv.push_back("--raw");
  write_manifest(sibling(f.out, "manifest.json"),
                 {{"command", "dump-circuit"}, {"argv", argv}, {"outputs", {{"circuit", f.out}}}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Hadamard edge detection simulator"};
  app.require_subcommand(1);

  RunFlags edges_f, kspace_f;
  auto* edges = app.add_subcommand("edges", "edge map of a PGM image or QVOL volume");
  edges_f.add(edges, true, true);

  auto* kspace = app.add_subcommand("kspace", "IQFT of k-space rows, then row-axis edges");
  kspace_f.axis = "row";
  kspace_f.add(kspace, false, false);

  BenchFlags bench_f;
  auto* bench = app.add_subcommand("bench", "metrics and fidelity sweep to CSV");
  bench->add_option("--min-qubits", bench_f.min_q)->capture_default_str();
  bench->add_option("--max-qubits", bench_f.max_q)->capture_default_str();
  bench->add_option("--seeds", bench_f.seeds)->capture_default_str();
  bench->add_option("--variants", bench_f.variants, "original and/or modified")->capture_default_str();
  bench->add_option("--cut", bench_f.cut, "on|off")->capture_default_str();
  bench->add_option("--max-width", bench_f.max_width, "fragment width cap when cutting")->capture_default_str();
  bench->add_option("--noise", bench_f.noise, "default, off, a file, or inline p1=..,p2=..,p_readout=..")
      ->capture_default_str();
  bench->add_option("--shots", bench_f.shots)->capture_default_str();
  bench->add_option("--seed", bench_f.seed, "first seed")->capture_default_str();
  bench->add_option("--out", bench_f.out, "CSV path")->required();

  CutDemoFlags cut_f;
  auto* cut = app.add_subcommand("cut-demo", "knitted vs uncut values for one encoded window");
  cut->add_option("--qubits", cut_f.qubits)->capture_default_str();
  cut->add_option("--variant", cut_f.variant)->capture_default_str();
  cut->add_option("--cuts", cut_f.cuts, "manifest of `CUT wire position` lines; planner when omitted");
  cut->add_option("--max-width", cut_f.max_width, "fragment width cap or off")->capture_default_str();
  cut->add_option("--observable", cut_f.observable)->capture_default_str();
  cut->add_option("--seed", cut_f.seed, "window contents")->capture_default_str();
  cut->add_option("--out", cut_f.out, "report path");

  DumpFlags dump_f;
  auto* dump = app.add_subcommand("dump-circuit", "print a QHED circuit in the text format");
  dump->add_option("--qubits", dump_f.qubits)->capture_default_str();
  dump->add_option("--variant", dump_f.variant)->capture_default_str();
  dump->add_flag("--raw", dump_f.raw, "skip lowering");
  dump->add_option("--out", dump_f.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*edges) return cmd_edges(edges_f);
    if (*kspace) return cmd_kspace(kspace_f);
    if (*bench) return cmd_bench(bench_f);
    if (*cut) return cmd_cut_demo(cut_f);
    if (*dump) return cmd_dump(dump_f);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "error (resource): out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
