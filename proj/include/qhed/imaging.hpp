#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace qhed {

enum class Axis { Row, Column, Depth };
std::string to_string(Axis a);

/// Nonnegative intensities on a width x height x depth grid; index
/// x + width * (y + height * z).
struct ImageVolume {
  int width = 0;
  int height = 0;
  int depth = 1;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::size_t index(int x, int y, int z = 0) const {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(width) * (y + static_cast<std::size_t>(height) * z);
  }
  double& at(int x, int y, int z = 0) { return values[index(x, y, z)]; }
  double at(int x, int y, int z = 0) const { return values[index(x, y, z)]; }
  friend bool operator==(const ImageVolume&, const ImageVolume&) = default;
};

/// Throws ShapeError on a size mismatch and DomainError on negative or
/// non-finite values.
ImageVolume make_volume(int width, int height, int depth, std::vector<double> values);

/// Edge magnitudes with the source image's shape.
using EdgeMap = ImageVolume;

enum class ImageFormat { Pgm, RawVol };

/// PGM (P2 or P5, 8 or 16 bit) or QVOL. Throws ParseError with the byte offset
/// of the problem.
ImageVolume load_image(const std::string& path, ImageFormat format);
ImageVolume parse_pgm(const std::string& bytes);
ImageVolume parse_rawvol(const std::string& bytes);

/// P5 with maxval 255; values are clamped to [0, 1] and scaled. 2D only.
std::string encode_pgm(const ImageVolume& image);
/// "QVOL", three little-endian uint32 dims, then little-endian float64 values.
std::string encode_rawvol(const ImageVolume& volume);
void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

std::size_t line_count(const ImageVolume& v, Axis axis);
int line_length(const ImageVolume& v, Axis axis);
/// Grid index of element i of line `line` along `axis`.
std::size_t line_index(const ImageVolume& v, Axis axis, std::size_t line, int i);
std::vector<double> extract_line(const ImageVolume& v, Axis axis, std::size_t line);

/// Window start offsets on the padded line: stride window - 2, last window
/// right-aligned. The padded line is the line with one replicated pixel at
/// each end, extended with copies of the last pixel up to one window.
std::vector<std::size_t> window_offsets(int line_length, int n_encode);

struct Window {
  std::size_t line = 0;
  std::size_t slot = 0;  // index into SubdomainPlan::offsets
  std::vector<double> pixels;
  double norm = 0.0;
  bool flat = false;  // uniform window (all zero included): edges forced to 0
};

struct SubdomainPlan {
  Axis axis = Axis::Row;
  int n_encode = 0;
  int window_size = 0;
  int line_length = 0;
  int width = 0, height = 0, depth = 1;
  std::vector<std::size_t> offsets;
  /// Per slot: (pair index k within the window, line boundary it measures)
  /// for every kept difference. Boundary b is the pair (b, b + 1).
  std::vector<std::vector<std::pair<int, int>>> kept;
  std::vector<Window> windows;  // line-major, then slot
};

/// Throws PlanningError for lines of length 1 and DomainError for n_encode < 2.
SubdomainPlan plan_decomposition(const ImageVolume& image, Axis axis, int n_encode);

/// Unit-norm amplitudes of a window (uniform for a flat window).
std::vector<double> encode_window(const SubdomainPlan& plan, std::size_t window_id);

/// 2 * norm * sqrt(p[2k + 1]) for k = 0..2^n - 1.
std::vector<double> window_edges_from_probabilities(const std::vector<double>& probabilities, double norm);
/// Signed 2 * norm * Re(amp[2k + 1]).
std::vector<double> window_edges_from_amplitudes(const std::vector<std::complex<double>>& amplitudes, double norm);

/// Places every kept difference (as a magnitude) at its boundary pixel; the
/// last pixel of each line is 0. Throws AggregationError for a missing or
/// misshapen window.
EdgeMap reassemble(const SubdomainPlan& plan, const std::vector<std::vector<double>>& window_edges);

/// Pointwise max of |value| across axes, scaled so the largest value is 1.
EdgeMap combine_axes(const std::vector<EdgeMap>& maps);

/// 1 where value >= t, else 0.
EdgeMap threshold(const EdgeMap& map, double t);

}  // namespace qhed
