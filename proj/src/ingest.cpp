#include "cmon/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cmon/hash.hpp"

namespace cmon {
namespace fs = std::filesystem;

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

double parse_number(std::string_view tok, std::size_t line) {
  std::string_view body = tok;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (ec != std::errc{} || ptr != body.data() + body.size() || body.empty() || !std::isfinite(v)) {
    throw ParseError(line, "cannot parse '" + std::string(tok) + "' as a finite decimal number");
  }
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Window parse_ims_file(std::string_view text, std::size_t expected_channels) {
  require(expected_channels >= 1, "expected_channels must be at least 1");
  Window w;
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<double> row;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    row.clear();
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_blank(line[i])) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !is_blank(line[j])) ++j;
      row.push_back(parse_number(line.substr(i, j - i), line_no));
      i = j;
    }
    if (row.empty()) continue;
    if (row.size() != expected_channels) {
      fail(ErrorKind::format, "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected_channels) + " columns, found " +
                                  std::to_string(row.size()));
    }
    data.insert(data.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) fail(ErrorKind::format, "file contains no samples");
  w.samples = Matrix(rows, expected_channels, std::move(data));
  return w;
}

Window read_ims_file(const fs::path& path, std::size_t expected_channels) {
  const std::string text = read_file(path);
  Window w;
  try {
    w = parse_ims_file(text, expected_channels);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.filename().string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), path.filename().string() + ": " + e.what());
  }
  w.timestamp = parse_ims_timestamp(path.filename().string());
  w.source_id = path.filename().string();
  return w;
}

std::string format_ims(const Window& window) {
  std::string out;
  out.reserve(window.rows() * window.channels() * 12);
  for (std::size_t r = 0; r < window.rows(); ++r) {
    auto row = window.samples.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back('\t');
      out += format_double(row[c]);
    }
    out.push_back('\n');
  }
  return out;
}

Timestamp parse_ims_timestamp(std::string_view filename) {
  // year.month.day.hour.minute.second, all-digit fields of width 4.2.2.2.2.2
  static constexpr int widths[] = {4, 2, 2, 2, 2, 2};
  int fields[6] = {};
  std::size_t pos = 0;
  auto bad = [&] { fail(ErrorKind::format, "filename '" + std::string(filename) +
                                               "' does not match YYYY.MM.DD.hh.mm.ss"); };
  for (int f = 0; f < 6; ++f) {
    if (f > 0) {
      if (pos >= filename.size() || filename[pos] != '.') bad();
      ++pos;
    }
    if (pos + widths[f] > filename.size()) bad();
    auto [ptr, ec] = std::from_chars(filename.data() + pos, filename.data() + pos + widths[f], fields[f]);
    if (ec != std::errc{} || ptr != filename.data() + pos + widths[f]) bad();
    for (int k = 0; k < widths[f]; ++k) {
      if (filename[pos + k] < '0' || filename[pos + k] > '9') bad();
    }
    pos += widths[f];
  }
  if (pos != filename.size()) bad();

  using namespace std::chrono;
  const year_month_day ymd{year{fields[0]}, month{static_cast<unsigned>(fields[1])},
                           day{static_cast<unsigned>(fields[2])}};
  if (!ymd.ok() || fields[3] > 23 || fields[4] > 59 || fields[5] > 59) bad();
  return sys_days{ymd} + hours{fields[3]} + minutes{fields[4]} + seconds{fields[5]};
}

namespace {
struct CivilTime {
  int year;
  unsigned month, day;
  long hour, minute, second;
};
CivilTime civil(Timestamp t) {
  using namespace std::chrono;
  const auto d = floor<days>(t);
  const year_month_day ymd{d};
  const hh_mm_ss hms{t - d};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
          static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
          static_cast<long>(hms.seconds().count())};
}
}  // namespace

std::string format_ims_timestamp(Timestamp t) {
  const CivilTime c = civil(t);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d.%02u.%02u.%02ld.%02ld.%02ld", c.year, c.month, c.day, c.hour, c.minute,
                c.second);
  return buf;
}

std::string format_iso8601(Timestamp t) {
  const CivilTime c = civil(t);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", c.year, c.month, c.day, c.hour, c.minute,
                c.second);
  return buf;
}

std::vector<fs::path> list_ims_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    try {
      (void)parse_ims_timestamp(name);
    } catch (const Error&) {
      continue;
    }
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

std::uint64_t NormParams::fingerprint() const {
  Fnv1a h;
  h.update("normparams/v1");
  for (double v : min) h.update(v);
  for (double v : max) h.update(v);
  return h.digest();
}

NormParams fit_normalizer(std::span<const Window> windows) {
  require(!windows.empty(), "fit_normalizer needs at least one window");
  const std::size_t channels = windows.front().channels();
  NormParams p;
  p.min.assign(channels, std::numeric_limits<double>::infinity());
  p.max.assign(channels, -std::numeric_limits<double>::infinity());
  for (const Window& w : windows) {
    require(w.channels() == channels, "inconsistent channel count across windows");
    for (std::size_t r = 0; r < w.rows(); ++r) {
      auto row = w.samples.row(r);
      for (std::size_t c = 0; c < channels; ++c) {
        p.min[c] = std::min(p.min[c], row[c]);
        p.max[c] = std::max(p.max[c], row[c]);
      }
    }
  }
  return p;
}

namespace {
inline void normalize_into(const NormParams& p, std::span<const double> in, std::span<double> out) {
  for (std::size_t c = 0; c < in.size(); ++c) {
    const double span = p.max[c] - p.min[c];
    out[c] = span > 0.0 ? (in[c] - p.min[c]) / span : 0.5;
  }
}
}  // namespace

std::vector<double> normalize(const NormParams& params, std::span<const double> sample) {
  require(sample.size() == params.channels(), "sample length does not match normalizer channel count");
  std::vector<double> out(sample.size());
  normalize_into(params, sample, out);
  return out;
}

NormalizedWindow normalize_window(const NormParams& params, const Window& window) {
  require(window.channels() == params.channels(), "window channel count does not match normalizer");
  NormalizedWindow nw;
  nw.timestamp = window.timestamp;
  nw.norm_fingerprint = params.fingerprint();
  nw.values = Matrix(window.rows(), window.channels());
  for (std::size_t r = 0; r < window.rows(); ++r) normalize_into(params, window.samples.row(r), nw.values.row(r));
  return nw;
}

std::vector<std::string> feature_names(std::size_t channels) {
  static constexpr const char* kinds[kFeaturesPerChannel] = {"mean_abs", "rms", "kurtosis", "crest", "peak"};
  std::vector<std::string> names;
  names.reserve(channels * kFeaturesPerChannel);
  for (std::size_t c = 0; c < channels; ++c) {
    for (const char* k : kinds) names.push_back("ch" + std::to_string(c) + "." + k);
  }
  return names;
}

FeatureVector extract_features(const Window& window) {
  const std::size_t n = window.rows();
  require(n >= 4, "feature extraction needs at least 4 samples per window");
  FeatureVector fv;
  fv.window_timestamp = window.timestamp;
  fv.names = feature_names(window.channels());
  fv.values.reserve(fv.names.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < window.channels(); ++c) {
    double sum = 0.0, sum_abs = 0.0, sum_sq = 0.0, peak = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double x = window.samples(r, c);
      sum += x;
      sum_abs += std::abs(x);
      sum_sq += x * x;
      peak = std::max(peak, std::abs(x));
    }
    const double mean = sum * inv_n;
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = window.samples(r, c) - mean;
      const double d2 = d * d;
      m2 += d2;
      m4 += d2 * d2;
    }
    m2 *= inv_n;
    m4 *= inv_n;
    const double rms = std::sqrt(sum_sq * inv_n);
    const std::string prefix = "ch" + std::to_string(c) + ".";

    double kurtosis = 0.0;
    if (m2 > 0.0) {
      kurtosis = m4 / (m2 * m2);
    } else {
      fv.degenerate.push_back(prefix + "kurtosis");
    }
    double crest = 0.0;
    if (rms > 0.0) {
      crest = peak / rms;
    } else {
      fv.degenerate.push_back(prefix + "crest");
    }
    fv.values.insert(fv.values.end(), {sum_abs * inv_n, rms, kurtosis, crest, peak});
  }
  return fv;
}

void validate(const SynthSpec& s) {
  require(s.channels >= 1, "synthetic spec: channels must be >= 1");
  require(s.windows >= 1, "synthetic spec: windows must be >= 1");
  require(s.samples_per_window >= 4, "synthetic spec: samples_per_window must be >= 4");
  require(s.fault_channel < s.channels, "synthetic spec: fault_channel out of range");
  require(s.onset_window <= s.windows, "synthetic spec: onset_window out of range");
  require(s.noise_sigma > 0.0 && std::isfinite(s.noise_sigma), "synthetic spec: noise_sigma must be > 0");
  require(s.fault_amplitude_growth >= 0.0 && std::isfinite(s.fault_amplitude_growth),
          "synthetic spec: fault_amplitude_growth must be finite and >= 0");
  require(s.impulse_period >= 1 && s.impulse_width >= 1 && s.impulse_width <= s.impulse_period,
          "synthetic spec: need 1 <= impulse_width <= impulse_period");
  require(s.sample_rate_hz > 0.0, "synthetic spec: sample_rate_hz must be > 0");
}

SyntheticDataset generate_synthetic(const SynthSpec& spec) {
  validate(spec);
  using namespace std::chrono;
  // Same start time and 10-minute cadence as the IMS test rig recordings.
  const Timestamp start = sys_days{year{2004} / 2 / 12} + hours{10} + minutes{32} + seconds{39};

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);

  // Burst shape: half-sine over impulse_width samples, silent for the rest of the period.
  std::vector<double> burst(spec.impulse_period, 0.0);
  for (std::size_t k = 0; k < spec.impulse_width; ++k) {
    burst[k] = std::sin(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(spec.impulse_width));
  }

  SyntheticDataset out;
  out.windows.reserve(spec.windows);
  out.truth.reserve(spec.windows);
  for (std::size_t w = 0; w < spec.windows; ++w) {
    Window win;
    win.timestamp = start + minutes{10} * static_cast<long>(w);
    win.sample_rate_hz = spec.sample_rate_hz;
    win.source_id = "synthetic";
    win.samples = Matrix(spec.samples_per_window, spec.channels);
    for (double& v : win.samples.data()) v = noise(rng);

    const double amplitude =
        w >= spec.onset_window ? spec.fault_amplitude_growth * static_cast<double>(w - spec.onset_window + 1) : 0.0;
    WindowTruth truth;
    if (amplitude > 0.0) {
      for (std::size_t r = 0; r < spec.samples_per_window; ++r) {
        win.samples(r, spec.fault_channel) += amplitude * burst[r % spec.impulse_period];
      }
      truth.anomalous = true;
      truth.fault_channel = spec.fault_channel;
    }
    out.windows.push_back(std::move(win));
    out.truth.push_back(truth);
  }
  return out;
}

void write_truth_csv(std::span<const WindowTruth> truth, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << "window_index,label,fault_channel\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << i << ',' << (truth[i].anomalous ? "anomalous" : "normal") << ',';
    if (truth[i].fault_channel) out << *truth[i].fault_channel;
    out << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

std::vector<WindowTruth> read_truth_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("window_index,label,fault_channel", 0) != 0) {
    fail(ErrorKind::format, path.string() + ": missing truth header");
  }
  std::vector<WindowTruth> truth;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string idx, label, channel;
    std::getline(ss, idx, ',');
    std::getline(ss, label, ',');
    std::getline(ss, channel, ',');
    if (idx != std::to_string(truth.size())) throw ParseError(line_no, "truth rows must be in window order");
    WindowTruth t;
    if (label == "anomalous") {
      t.anomalous = true;
    } else if (label != "normal") {
      throw ParseError(line_no, "unknown truth label '" + label + "'");
    }
    if (!channel.empty()) {
      std::size_t ch = 0;
      auto [ptr, ec] = std::from_chars(channel.data(), channel.data() + channel.size(), ch);
      if (ec != std::errc{} || ptr != channel.data() + channel.size()) {
        throw ParseError(line_no, "bad fault channel '" + channel + "'");
      }
      t.fault_channel = ch;
    }
    truth.push_back(t);
  }
  return truth;
}

void write_synthetic(const SyntheticDataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  for (const Window& w : data.windows) {
    const fs::path p = dir / format_ims_timestamp(w.timestamp);
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write " + p.string());
    out << format_ims(w);
    if (!out) fail(ErrorKind::io, "write failed: " + p.string());
  }
  write_truth_csv(data.truth, dir / "truth.csv");
}

SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  require(n >= 2, "split needs at least 2 items");
  require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

}  // namespace cmon

namespace cmon {

Timestamp parse_iso8601(std::string_view text) {
  // Reuse the dotted parser: YYYY-MM-DDThh:mm:ssZ has the same field widths.
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':' || text[19] != 'Z') {
    fail(ErrorKind::format, "'" + std::string(text) + "' is not a YYYY-MM-DDThh:mm:ssZ timestamp");
  }
  std::string dotted(text.substr(0, 19));
  for (std::size_t i : {4u, 7u, 10u, 13u, 16u}) dotted[i] = '.';
  return parse_ims_timestamp(dotted);
}

}  // namespace cmon
