#include "qhed/imaging.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "qhed/error.hpp"

namespace qhed {
namespace {

ParseError parse_error(const std::string& what, std::size_t offset) {
  return ParseError(what + " at byte " + std::to_string(offset));
}

/// Whitespace/comment-separated header tokens of a PGM file.
class PgmTokens {
 public:
  explicit PgmTokens(const std::string& b) : b_(b) {}

  long long number(const char* what) {
    skip();
    const std::size_t start = pos_;
    long long v = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + (b_[pos_++] - '0');
      if (v > (1LL << 40)) throw parse_error(std::string("oversized ") + what, start);
    }
    if (pos_ == start) throw parse_error(std::string("expected ") + what, start);
    return v;
  }
  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  void skip() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(b_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }
  const std::string& b_;
  std::size_t pos_ = 2;
};

std::uint64_t read_le(const std::string& b, std::size_t at, int n_bytes) {
  std::uint64_t v = 0;
  for (int i = n_bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + i]);
  return v;
}

void write_le(std::string& out, std::uint64_t v, int n_bytes) {
  for (int i = 0; i < n_bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

std::string to_string(Axis a) {
  switch (a) {
    case Axis::Row: return "row";
    case Axis::Column: return "column";
    case Axis::Depth: return "depth";
  }
  return "?";
}

ImageVolume make_volume(int width, int height, int depth, std::vector<double> values) {
  if (width < 1 || height < 1 || depth < 1) throw ShapeError("image dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(width) * height * depth;
  if (values.size() != n)
    throw ShapeError("image has " + std::to_string(values.size()) + " values, shape needs " + std::to_string(n));
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("image values must be finite and nonnegative");
  return {width, height, depth, std::move(values)};
}

ImageVolume parse_pgm(const std::string& b) {
  if (b.size() < 2 || b[0] != 'P' || (b[1] != '2' && b[1] != '5')) throw parse_error("not a P2/P5 PGM", 0);
  const bool binary = b[1] == '5';
  PgmTokens tok(b);
  const long long w = tok.number("width"), h = tok.number("height");
  const std::size_t max_at = tok.pos();
  const long long maxval = tok.number("maxval");
  if (w < 1 || h < 1) throw parse_error("zero image dimension", max_at);
  if (maxval < 1 || maxval > 65535) throw parse_error("maxval out of range", max_at);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<double> values(n);
  if (binary) {
    if (tok.pos() >= b.size() || !std::isspace(static_cast<unsigned char>(b[tok.pos()])))
      throw parse_error("missing separator before raster", tok.pos());
    tok.advance(1);
    const int bytes = maxval < 256 ? 1 : 2;
    const std::size_t start = tok.pos();
    if (b.size() < start + n * bytes) throw parse_error("truncated raster", b.size());
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t v = static_cast<unsigned char>(b[start + i * bytes]);
      if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(b[start + i * bytes + 1]);  // big-endian
      if (static_cast<long long>(v) > maxval) throw parse_error("sample exceeds maxval", start + i * bytes);
      values[i] = static_cast<double>(v);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = tok.pos();
      if (at >= b.size()) throw parse_error("truncated raster", b.size());
      const long long v = tok.number("sample");
      if (v > maxval) throw parse_error("sample exceeds maxval", at);
      values[i] = static_cast<double>(v);
    }
  }
  return make_volume(static_cast<int>(w), static_cast<int>(h), 1, std::move(values));
}

ImageVolume parse_rawvol(const std::string& b) {
  if (b.size() < 16) throw parse_error("truncated header", b.size());
  if (b.compare(0, 4, "QVOL") != 0) throw parse_error("bad magic", 0);
  const auto w = read_le(b, 4, 4), h = read_le(b, 8, 4), d = read_le(b, 12, 4);
  if (w == 0 || h == 0 || d == 0) throw parse_error("zero volume dimension", 4);
  const std::uint64_t n = w * h * d;
  if (n > (std::uint64_t{1} << 32)) throw parse_error("volume too large", 4);
  if (b.size() < 16 + 8 * n) throw parse_error("truncated voxel data", b.size());
  if (b.size() > 16 + 8 * n) throw parse_error("trailing bytes", 16 + 8 * n);
  std::vector<double> values(n);
  for (std::uint64_t i = 0; i < n; ++i) values[i] = std::bit_cast<double>(read_le(b, 16 + 8 * i, 8));
  return make_volume(static_cast<int>(w), static_cast<int>(h), static_cast<int>(d), std::move(values));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ParseError("write failed for " + path);
}

ImageVolume load_image(const std::string& path, ImageFormat format) {
  const std::string bytes = read_file(path);
  return format == ImageFormat::Pgm ? parse_pgm(bytes) : parse_rawvol(bytes);
}

std::string encode_pgm(const ImageVolume& image) {
  if (image.depth != 1) throw ShapeError("PGM output needs a 2D image");
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  for (double v : image.values) out.push_back(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  return out;
}

std::string encode_rawvol(const ImageVolume& v) {
  std::string out = "QVOL";
  write_le(out, static_cast<std::uint64_t>(v.width), 4);
  write_le(out, static_cast<std::uint64_t>(v.height), 4);
  write_le(out, static_cast<std::uint64_t>(v.depth), 4);
  for (double x : v.values) write_le(out, std::bit_cast<std::uint64_t>(x), 8);
  return out;
}

std::size_t line_count(const ImageVolume& v, Axis axis) {
  switch (axis) {
    case Axis::Row: return static_cast<std::size_t>(v.height) * v.depth;
    case Axis::Column: return static_cast<std::size_t>(v.width) * v.depth;
    case Axis::Depth: return static_cast<std::size_t>(v.width) * v.height;
  }
  return 0;
}

int line_length(const ImageVolume& v, Axis axis) {
  return axis == Axis::Row ? v.width : axis == Axis::Column ? v.height : v.depth;
}

std::size_t line_index(const ImageVolume& v, Axis axis, std::size_t line, int i) {
  switch (axis) {
    case Axis::Row: return v.index(i, static_cast<int>(line % v.height), static_cast<int>(line / v.height));
    case Axis::Column: return v.index(static_cast<int>(line % v.width), i, static_cast<int>(line / v.width));
    case Axis::Depth: return v.index(static_cast<int>(line % v.width), static_cast<int>(line / v.width), i);
  }
  return 0;
}

std::vector<double> extract_line(const ImageVolume& v, Axis axis, std::size_t line) {
  const int n = line_length(v, axis);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = v.values[line_index(v, axis, line, i)];
  return out;
}

std::vector<std::size_t> window_offsets(int line_length, int n_encode) {
  if (n_encode < 2) throw DomainError("n_encode must be at least 2");
  if (line_length < 2) throw PlanningError("cannot decompose a line of length " + std::to_string(line_length));
  const std::size_t w = std::size_t{1} << n_encode, stride = w - 2;
  const std::size_t padded = std::max<std::size_t>(line_length + 2, w);
  std::vector<std::size_t> offs;
  for (std::size_t s = 0; s + w < padded; s += stride) offs.push_back(s);
  offs.push_back(padded - w);
  if (offs.size() >= 2 && offs[offs.size() - 2] == offs.back()) offs.pop_back();
  return offs;
}

SubdomainPlan plan_decomposition(const ImageVolume& image, Axis axis, int n_encode) {
  SubdomainPlan plan;
  plan.axis = axis;
  plan.n_encode = n_encode;
  plan.window_size = 1 << n_encode;
  plan.line_length = line_length(image, axis);
  plan.width = image.width;
  plan.height = image.height;
  plan.depth = image.depth;
  plan.offsets = window_offsets(plan.line_length, n_encode);
  const int L = plan.line_length, W = plan.window_size;

  // window pair k measures padded pair (s+k, s+k+1) = line boundary s+k-1
  std::vector<bool> taken(L - 1, false);
  plan.kept.resize(plan.offsets.size());
  for (std::size_t slot = 0; slot < plan.offsets.size(); ++slot) {
    for (int k = 0; k + 1 < W; ++k) {
      const int b = static_cast<int>(plan.offsets[slot]) + k - 1;
      if (b < 0 || b > L - 2 || taken[b]) continue;
      taken[b] = true;
      plan.kept[slot].emplace_back(k, b);
    }
  }

  const std::size_t lines = line_count(image, axis);
  plan.windows.reserve(lines * plan.offsets.size());
  std::vector<double> padded;
  for (std::size_t line = 0; line < lines; ++line) {
    const auto values = extract_line(image, axis, line);
    padded.assign(1, values.front());
    padded.insert(padded.end(), values.begin(), values.end());
    padded.resize(std::max<std::size_t>(L + 2, W), values.back());
    for (std::size_t slot = 0; slot < plan.offsets.size(); ++slot) {
      Window win;
      win.line = line;
      win.slot = slot;
      win.pixels.assign(padded.begin() + plan.offsets[slot], padded.begin() + plan.offsets[slot] + W);
      double s = 0.0;
      for (double x : win.pixels) s += x * x;
      win.norm = std::sqrt(s);
      // uniform windows have no differences to measure; their jobs still run
      win.flat = std::all_of(win.pixels.begin(), win.pixels.end(), [&](double x) { return x == win.pixels.front(); });
      plan.windows.push_back(std::move(win));
    }
  }
  return plan;
}

std::vector<double> encode_window(const SubdomainPlan& plan, std::size_t window_id) {
  if (window_id >= plan.windows.size()) throw DomainError("window id out of range");
  const Window& w = plan.windows[window_id];
  std::vector<double> out(w.pixels.size());
  if (w.flat) {
    std::fill(out.begin(), out.end(), 1.0 / std::sqrt(static_cast<double>(out.size())));
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w.pixels[i] / w.norm;
  return out;
}

namespace {
// differences below this fraction of the window norm are simulator roundoff
constexpr double kEdgeFloor = 1e-12;
double floored(double e, double norm) { return std::abs(e) <= kEdgeFloor * norm ? 0.0 : e; }
}  // namespace

std::vector<double> window_edges_from_probabilities(const std::vector<double>& p, double norm) {
  std::vector<double> out(p.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = floored(2.0 * norm * std::sqrt(std::max(p[2 * k + 1], 0.0)), norm);
  return out;
}

std::vector<double> window_edges_from_amplitudes(const std::vector<std::complex<double>>& a, double norm) {
  std::vector<double> out(a.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = floored(2.0 * norm * a[2 * k + 1].real(), norm);
  return out;
}

EdgeMap reassemble(const SubdomainPlan& plan, const std::vector<std::vector<double>>& edges) {
  if (edges.size() != plan.windows.size())
    throw AggregationError("expected " + std::to_string(plan.windows.size()) + " windows, got " +
                           std::to_string(edges.size()));
  EdgeMap out{plan.width, plan.height, plan.depth,
              std::vector<double>(static_cast<std::size_t>(plan.width) * plan.height * plan.depth, 0.0)};
  for (std::size_t id = 0; id < plan.windows.size(); ++id) {
    const Window& w = plan.windows[id];
    if (edges[id].size() != static_cast<std::size_t>(plan.window_size))
      throw AggregationError("window " + std::to_string(id) + " is missing or has the wrong length");
    for (const auto& [k, b] : plan.kept[w.slot])
      out.values[line_index(out, plan.axis, w.line, b)] = w.flat ? 0.0 : std::abs(edges[id][k]);
  }
  return out;
}

EdgeMap combine_axes(const std::vector<EdgeMap>& maps) {
  if (maps.empty()) throw ShapeError("no edge maps to combine");
  EdgeMap out = maps.front();
  for (double& v : out.values) v = std::abs(v);
  for (std::size_t m = 1; m < maps.size(); ++m) {
    const auto& e = maps[m];
    if (e.width != out.width || e.height != out.height || e.depth != out.depth)
      throw ShapeError("edge maps differ in shape");
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = std::max(out.values[i], std::abs(e.values[i]));
  }
  const double top = out.values.empty() ? 0.0 : *std::max_element(out.values.begin(), out.values.end());
  if (top > 0.0)
    for (double& v : out.values) v /= top;
  return out;
}

EdgeMap threshold(const EdgeMap& map, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("threshold must lie in [0, 1]");
  EdgeMap out = map;
  for (double& v : out.values) v = v >= t ? 1.0 : 0.0;
  return out;
}

}  // namespace qhed
