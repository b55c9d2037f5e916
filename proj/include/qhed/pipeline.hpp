#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qhed/builders.hpp"
#include "qhed/circuit.hpp"
#include "qhed/imaging.hpp"
#include "qhed/linalg.hpp"
#include "qhed/noise.hpp"
#include "qhed/transpile.hpp"

namespace qhed {

struct RunConfig {
  int n_encode = 5;
  DecrementVariant variant = DecrementVariant::Ancilla;
  std::optional<NoiseModel> noise;              // none: ideal simulation
  std::optional<std::uint64_t> shots = 4096;    // none: exact probabilities
  std::optional<int> max_width = 5;             // none: run windows uncut
  int workers = 1;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  std::vector<Axis> axes;                       // empty: every axis longer than one pixel

  /// Throws DomainError on out-of-range fields.
  void validate() const;
};

/// (subdomain, cut term, fragment). Uncut jobs use term 0 and fragment 0; cut
/// jobs use the first term index that needs the experiment.
struct JobId {
  std::size_t subdomain = 0;
  std::size_t term = 0;
  std::size_t fragment = 0;
  friend auto operator<=>(const JobId&, const JobId&) = default;
};
std::string to_string(const JobId& id);

struct Job {
  JobId id;
  std::shared_ptr<const Circuit> circuit;
  std::vector<cplx> input;  // empty: |0...0>
  std::optional<NoiseModel> noise;
  std::optional<std::uint64_t> shots;
  std::uint64_t seed = 0;
  bool keep_amplitudes = false;  // ideal runs only
};

struct JobResult {
  std::vector<double> probabilities;  // Z distribution over all wires
  std::vector<cplx> amplitudes;
};

/// Seed of a job: a hash of the run seed and the id.
std::uint64_t job_seed(std::uint64_t run_seed, const JobId& id);

/// Runs every job once on a pool of `workers` threads. The result map does not
/// depend on the worker count. A failing job aborts the run with its id.
std::map<JobId, JobResult> execute_jobs(const std::vector<Job>& jobs, int workers);

/// P x Q bookkeeping of one run.
struct JobAccounting {
  std::size_t windows = 0;            // P, summed over axes
  std::size_t terms_per_plan = 1;     // Q = terms x fragments (largest plan)
  std::size_t fragments_per_term = 1;
  std::size_t logical_jobs = 0;       // sum over windows of terms x fragments
  std::size_t executed_jobs = 0;      // distinct circuits actually run
};

struct PipelineResult {
  EdgeMap magnitudes;  // combined, normalized to [0, 1]
  EdgeMap edges;       // thresholded
  MetricsRecord metrics;
  JobAccounting jobs;
};

/// The QHED circuit of one window, lowered. With `window` the amplitude
/// encoding is prepended on the data wires (used when the circuit is cut).
Circuit window_circuit(int n_encode, DecrementVariant variant, const std::vector<double>* window = nullptr);

PipelineResult run_qhed_pipeline(const ImageVolume& image, const RunConfig& config);

/// |IQFT(K / |K|)| * |K| for a k-space row of length 2^m, by statevector
/// simulation of the inverse QFT circuit.
std::vector<double> iqft_magnitudes(const std::vector<cplx>& row);

struct KspaceResult {
  ImageVolume image;  // recovered magnitudes, one image row per k-space row
  PipelineResult edges;
};

/// Rows must share one power-of-two length; throws ShapeError otherwise.
/// Noise in `config` is ignored: this stage runs on an ideal simulator.
KspaceResult run_kspace_pipeline(const std::vector<std::vector<cplx>>& rows, RunConfig config);

/// One row per line, entries `re:im` separated by commas.
std::vector<std::vector<cplx>> parse_complex_csv(const std::string& text);

}  // namespace qhed
