#include "qhed/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qhed/cutting.hpp"
#include "qhed/error.hpp"
#include "qhed/executor.hpp"
#include "qhed/rng.hpp"
#include "qhed/state.hpp"

namespace qhed {

void RunConfig::validate() const {
  if (n_encode < 2 || n_encode > 12) throw DomainError("n_encode must be in [2, 12]");
  if (shots && *shots == 0) throw DomainError("shots must be positive");
  if (max_width && *max_width < 1) throw DomainError("max_width must be positive");
  if (workers < 1) throw DomainError("workers must be at least 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw DomainError("threshold must lie in [0, 1]");
  if (noise) noise->validate();
}

std::string to_string(const JobId& id) {
  return "job(" + std::to_string(id.subdomain) + "," + std::to_string(id.term) + "," + std::to_string(id.fragment) + ")";
}

std::uint64_t job_seed(std::uint64_t run_seed, const JobId& id) {
  return derive_seed(run_seed, id.subdomain, id.term, id.fragment);
}

namespace {

JobResult run_job(const Job& job) {
  const Circuit& c = *job.circuit;
  JobResult r;
  if (job.noise && !job.noise->is_ideal()) {
    const Statevector in = job.input.empty() ? prepare_basis_state(c.n_qubits(), 0) : Statevector(c.n_qubits(), job.input);
    r.probabilities = z_probabilities(run_noisy(c, *job.noise, in));
  } else {
    Statevector out = run_circuit(
        job.input.empty() ? prepare_basis_state(c.n_qubits(), 0) : Statevector(c.n_qubits(), job.input), c);
    r.probabilities = z_probabilities(out);
    if (job.keep_amplitudes) r.amplitudes = out.amplitudes();
  }
  if (job.shots) {
    const std::size_t dim = r.probabilities.size();
    r.probabilities = counts_to_distribution(sample_counts(r.probabilities, *job.shots, job.seed), dim);
  }
  return r;
}

std::vector<Axis> axes_for(const ImageVolume& image, const RunConfig& config) {
  if (!config.axes.empty()) return config.axes;
  std::vector<Axis> out;
  for (Axis a : {Axis::Row, Axis::Column, Axis::Depth})
    if (line_length(image, a) > 1) out.push_back(a);
  if (out.empty()) throw PlanningError("image has no line longer than one pixel");
  return out;
}

CircuitMetrics max_metrics(const CircuitMetrics& a, const CircuitMetrics& b) {
  return {std::max(a.depth, b.depth), std::max(a.cx_count, b.cx_count), std::max(a.gate_count, b.gate_count)};
}

/// Everything needed to turn one window's job results into its edge sequence.
struct WindowWork {
  double norm = 0.0;
  bool flat = false;
  std::size_t first_job = 0;  // index into the job list
  // cut windows only
  std::shared_ptr<CutPlan> plan;
  std::vector<std::size_t> experiment_of;  // [term * fragments + fragment] -> job offset
};

}  // namespace

std::map<JobId, JobResult> execute_jobs(const std::vector<Job>& jobs, int workers) {
  std::vector<JobResult> results(jobs.size());
  for (std::size_t i = 1; i < jobs.size(); ++i)
    if (jobs[i].id <= jobs[i - 1].id) {
      // ids need not arrive sorted, but must be unique
      std::vector<JobId> ids;
      for (const auto& j : jobs) ids.push_back(j.id);
      std::sort(ids.begin(), ids.end());
      if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw PreconditionError("duplicate job id");
      break;
    }
  parallel_for(
      jobs.size(), workers, [&](std::size_t i) { results[i] = run_job(jobs[i]); },
      [&](std::size_t i) { return to_string(jobs[i].id); });
  std::map<JobId, JobResult> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) out.emplace(jobs[i].id, std::move(results[i]));
  return out;
}

Circuit window_circuit(int n_encode, DecrementVariant variant, const std::vector<double>* window) {
  const QhedCircuit q = build_qhed(n_encode, variant);
  if (!window) return transpile(q.circuit);
  Circuit c(q.circuit.n_qubits());
  c.append(build_encoding_circuit(*window), q.layout.data_wires);
  c.append(q.circuit);
  c.metadata() = q.circuit.metadata();
  return transpile(c);
}

PipelineResult run_qhed_pipeline(const ImageVolume& image, const RunConfig& config) {
  config.validate();
  const int n = config.n_encode;
  const QhedCircuit q = build_qhed(n, config.variant);
  const std::vector<Wire> reg = q.layout.register_wires();
  const int width = q.circuit.n_qubits();
  const bool cut = config.max_width.has_value();
  const bool ideal = !config.noise || config.noise->is_ideal();
  const bool exact_amplitudes = ideal && !config.shots && !cut;
  if (!cut && !ideal && width > kMaxDensityQubits)
    throw ResourceError("noisy window circuit has " + std::to_string(width) +
                        " wires; enable cutting or lower n_encode");

  const auto axes = axes_for(image, config);
  std::vector<SubdomainPlan> plans;
  for (Axis a : axes) plans.push_back(plan_decomposition(image, a, n));

  auto shared = std::make_shared<const Circuit>(window_circuit(n, config.variant));
  PipelineResult result;
  result.metrics.variant = std::string(to_string(config.variant));
  result.metrics.n_encode = n;
  result.metrics.cut = cut;
  result.metrics.seed = config.seed;
  CircuitMetrics metrics = cut ? CircuitMetrics{} : compute_metrics(*shared);

  std::vector<Job> jobs;
  std::vector<WindowWork> work;
  std::size_t subdomain = 0;
  for (const auto& plan : plans) {
    for (std::size_t w = 0; w < plan.windows.size(); ++w, ++subdomain) {
      const Window& win = plan.windows[w];
      WindowWork ww;
      ww.norm = win.norm;
      ww.flat = win.flat;
      ww.first_job = jobs.size();
      const std::vector<double> unit = encode_window(plan, w);
      if (!cut) {
        Job job;
        job.id = {subdomain, 0, 0};
        job.circuit = shared;
        job.input.assign(std::size_t{1} << width, cplx{});
        for (std::size_t k = 0; k < unit.size(); ++k) job.input[2 * k] = unit[k];
        job.noise = config.noise;
        job.shots = config.shots;
        job.seed = job_seed(config.seed, job.id);
        job.keep_amplitudes = exact_amplitudes;
        jobs.push_back(std::move(job));
        ++result.jobs.logical_jobs;
      } else {
        ww.plan = std::make_shared<CutPlan>(plan_cuts(window_circuit(n, config.variant, &unit), *config.max_width));
        const CutPlan& cp = *ww.plan;
        const auto terms = enumerate_terms(cp);
        const std::size_t F = cp.fragments.size();
        ww.experiment_of.resize(terms.size() * F);
        for (std::size_t f = 0; f < F; ++f) {
          std::map<std::string, std::size_t> seen;
          for (const auto& t : terms) {
            const std::string key = experiment_key(cp, t, f);
            auto it = seen.find(key);
            if (it == seen.end()) {
              Job job;
              job.id = {subdomain, t.index, f};
              job.circuit = std::make_shared<const Circuit>(instantiate_fragment(cp, t, f));
              job.noise = config.noise;
              job.shots = config.shots;
              job.seed = job_seed(config.seed, job.id);
              it = seen.emplace(key, jobs.size() - ww.first_job).first;
              jobs.push_back(std::move(job));
            }
            ww.experiment_of[t.index * F + f] = it->second;
          }
          metrics = max_metrics(metrics, compute_metrics(instantiate_fragment(cp, terms.front(), f)));
        }
        result.jobs.logical_jobs += terms.size() * F;
        if (terms.size() * F >= result.jobs.terms_per_plan * result.jobs.fragments_per_term) {
          result.jobs.terms_per_plan = terms.size();
          result.jobs.fragments_per_term = F;
        }
      }
      work.push_back(std::move(ww));
    }
  }
  result.jobs.windows = work.size();
  result.jobs.executed_jobs = jobs.size();
  result.metrics.depth = metrics.depth;
  result.metrics.cx_count = metrics.cx_count;
  result.metrics.gate_count = metrics.gate_count;

  std::vector<JobResult> results(jobs.size());
  parallel_for(
      jobs.size(), config.workers, [&](std::size_t i) { results[i] = run_job(jobs[i]); },
      [&](std::size_t i) { return to_string(jobs[i].id); });

  // window edges, reassembly and combination in fixed order
  const std::size_t W = std::size_t{1} << n;
  std::vector<std::vector<double>> edges(work.size());
  parallel_for(
      work.size(), config.workers,
      [&](std::size_t i) {
        const WindowWork& ww = work[i];
        if (ww.flat) {
          edges[i].assign(W, 0.0);
        } else if (!ww.plan) {
          const JobResult& r = results[ww.first_job];
          if (exact_amplitudes) {
            // ancillas end in |0>, so the register occupies the low block
            const std::vector<cplx> low(r.amplitudes.begin(), r.amplitudes.begin() + 2 * W);
            edges[i] = window_edges_from_amplitudes(low, ww.norm);
          } else {
            edges[i] = window_edges_from_probabilities(marginalize(r.probabilities, width, reg), ww.norm);
          }
        } else {
          const std::size_t F = ww.plan->fragments.size();
          const auto knit = knit_z_distribution(
              *ww.plan,
              [&](std::size_t t, std::size_t f) {
                return &results[ww.first_job + ww.experiment_of[t * F + f]].probabilities;
              },
              reg);
          edges[i] = window_edges_from_probabilities(knit.distribution, ww.norm);
        }
      },
      [&](std::size_t i) { return "window " + std::to_string(i); });

  std::vector<EdgeMap> maps;
  std::size_t offset = 0;
  for (const auto& plan : plans) {
    std::vector<std::vector<double>> mine(edges.begin() + offset, edges.begin() + offset + plan.windows.size());
    offset += plan.windows.size();
    maps.push_back(reassemble(plan, mine));
  }
  result.magnitudes = combine_axes(maps);
  result.edges = threshold(result.magnitudes, config.threshold);
  return result;
}

std::vector<double> iqft_magnitudes(const std::vector<cplx>& row) {
  const std::size_t len = row.size();
  if (len < 2 || (len & (len - 1)) != 0) throw ShapeError("k-space rows need a power-of-two length >= 2");
  double norm = 0.0;
  for (const cplx& v : row) norm += std::norm(v);
  norm = std::sqrt(norm);
  std::vector<double> out(len, 0.0);
  if (norm == 0.0) return out;
  std::vector<cplx> amps(len);
  for (std::size_t i = 0; i < len; ++i) amps[i] = row[i] / norm;
  const int m = std::countr_zero(len);
  const Statevector s = run_circuit(Statevector(m, std::move(amps)), build_qft(m, true));
  for (std::size_t i = 0; i < len; ++i) out[i] = std::abs(s[i]) * norm;
  return out;
}

KspaceResult run_kspace_pipeline(const std::vector<std::vector<cplx>>& rows, RunConfig config) {
  if (rows.empty()) throw ShapeError("no k-space rows");
  const std::size_t len = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != len) throw ShapeError("k-space rows differ in length");
  std::vector<double> values;
  values.reserve(rows.size() * len);
  for (const auto& r : rows) {
    const auto mags = iqft_magnitudes(r);
    values.insert(values.end(), mags.begin(), mags.end());
  }
  KspaceResult out;
  out.image = make_volume(static_cast<int>(len), static_cast<int>(rows.size()), 1, std::move(values));
  config.axes = {Axis::Row};
  out.edges = run_qhed_pipeline(out.image, config);
  return out;
}

std::vector<std::vector<cplx>> parse_complex_csv(const std::string& text) {
  std::vector<std::vector<cplx>> rows;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<cplx> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      const auto colon = cell.find(':');
      try {
        if (colon == std::string::npos) throw std::invalid_argument("no colon");
        std::size_t a = 0, b = 0;
        const std::string re = cell.substr(0, colon), im = cell.substr(colon + 1);
        const double r = std::stod(re, &a), i = std::stod(im, &b);
        if (re.find_first_not_of(" \t", a) != std::string::npos || im.find_first_not_of(" \t", b) != std::string::npos)
          throw std::invalid_argument("junk");
        row.emplace_back(r, i);
      } catch (const std::exception&) {
        throw ParseError("complex CSV line " + std::to_string(line_no) + ": bad entry '" + cell + "' (want re:im)");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("complex CSV has no rows");
  return rows;
}

}  // namespace qhed
