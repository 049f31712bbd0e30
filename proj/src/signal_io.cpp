#include "qrsadapt/signal_io.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>
#include <system_error>

#include "qrsadapt/error.hpp"

namespace qrsadapt {

namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<long> parse_long(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Whole file as (1-based line number, text) pairs.
struct Lines {
  std::vector<std::string> text;
  std::size_t count() const { return text.size(); }
};

Lines read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  Lines lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.text.push_back(std::move(line));
  }
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
  return lines;
}

bool all_blank(const Lines& lines) {
  for (const auto& l : lines.text) {
    if (!trim(l).empty()) return false;
  }
  return true;
}

// "key=value" tokens after the leading '#'.
std::vector<std::pair<std::string, std::string>> header_fields(std::string_view line) {
  std::vector<std::pair<std::string, std::string>> out;
  line = trim(line);
  line.remove_prefix(1);
  std::istringstream tokens{std::string(line)};
  std::string tok;
  while (tokens >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      out.emplace_back(tok, "");
    } else {
      out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
  }
  return out;
}

std::optional<std::string> field(const std::vector<std::pair<std::string, std::string>>& fields,
                                 std::string_view key) {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return std::nullopt;
}

bool is_header(std::string_view line) {
  line = trim(line);
  return !line.empty() && line.front() == '#';
}

}  // namespace

std::string format_exact(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_file_atomically(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + tmp.string());
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorCode::IoFailure, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

EcgSignal read_signal_csv(const fs::path& path) {
  const Lines lines = read_lines(path);
  if (lines.count() == 0 || all_blank(lines)) {
    throw Error(ErrorCode::EmptyFile, path.string() + " is empty");
  }
  if (!is_header(lines.text[0])) {
    throw Error(ErrorCode::MissingHeader, "expected '# fs=<Hz> record=<id>'", 1);
  }
  const auto fields = header_fields(lines.text[0]);
  const auto fs_text = field(fields, "fs");
  const std::optional<double> fs_value = fs_text ? parse_double(*fs_text) : std::nullopt;
  if (!fs_value || !(*fs_value > 0.0) || !std::isfinite(*fs_value)) {
    throw Error(ErrorCode::MissingHeader, "header lacks a positive fs=<Hz>", 1);
  }
  std::string record = field(fields, "record").value_or("");

  std::vector<double> samples;
  samples.reserve(lines.count());
  for (std::size_t i = 1; i < lines.count(); ++i) {
    const std::string_view text = trim(lines.text[i]);
    if (text.empty()) continue;
    const auto v = parse_double(text);
    if (!v || !std::isfinite(*v)) {
      throw Error(ErrorCode::BadSample, "not a finite number: '" + std::string(text) + "'", i + 1);
    }
    samples.push_back(*v);
  }
  if (samples.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " has no samples");
  return EcgSignal(std::move(samples), *fs_value, std::move(record));
}

void write_signal_csv(const EcgSignal& signal, const fs::path& path) {
  std::string out = "# fs=" + format_exact(signal.fs()) + " record=" + signal.record_id() + "\n";
  for (double v : signal.samples()) {
    out += format_exact(v);
    out += '\n';
  }
  write_file_atomically(path, out);
}

AnnotationSet read_annotations_csv(const fs::path& path) {
  const Lines lines = read_lines(path);
  if (lines.count() == 0 || !is_header(lines.text[0])) {
    throw Error(ErrorCode::MissingHeader, "expected '# record=<id>'", 1);
  }
  AnnotationSet set;
  set.record_id = field(header_fields(lines.text[0]), "record").value_or("");
  for (std::size_t i = 1; i < lines.count(); ++i) {
    const std::string_view text = trim(lines.text[i]);
    if (text.empty()) continue;
    const auto idx = parse_index(text);
    if (!idx) {
      throw Error(ErrorCode::BadIndex, "not a sample index: '" + std::string(text) + "'", i + 1);
    }
    if (!set.r_samples.empty() && *idx <= set.r_samples.back()) {
      throw Error(ErrorCode::NotIncreasing,
                  std::to_string(*idx) + " does not exceed " + std::to_string(set.r_samples.back()),
                  i + 1);
    }
    set.r_samples.push_back(*idx);
  }
  return set;
}

void write_annotations_csv(const AnnotationSet& annotations, const fs::path& path) {
  std::string out = "# record=" + annotations.record_id + "\n";
  for (std::size_t s : annotations.r_samples) out += std::to_string(s) + "\n";
  write_file_atomically(path, out);
}

void write_peaks_csv(const DetectionResult& result, const fs::path& path) {
  std::string out = "# record=" + result.record_id + " wavelet=" + result.wavelet_name + "\n";
  char time_buf[64];
  for (const RPeak& p : result.peaks) {
    std::snprintf(time_buf, sizeof(time_buf), "%.6f", p.time_s);
    out += std::to_string(p.sample) + "," + time_buf + "," + format_exact(p.scale) + "," +
           format_exact(p.magnitude) + "," + (p.polarity < 0 ? "-1" : "1") + "\n";
  }
  write_file_atomically(path, out);
}

PeaksFile read_peaks_csv(const fs::path& path) {
  const Lines lines = read_lines(path);
  if (lines.count() == 0 || !is_header(lines.text[0])) {
    throw Error(ErrorCode::MissingHeader, "expected '# record=<id> wavelet=<name>'", 1);
  }
  PeaksFile file;
  const auto fields = header_fields(lines.text[0]);
  file.record_id = field(fields, "record").value_or("");
  file.wavelet_name = field(fields, "wavelet").value_or("");
  for (std::size_t i = 1; i < lines.count(); ++i) {
    const std::string_view text = trim(lines.text[i]);
    if (text.empty()) continue;
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      cols.push_back(text.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols.size() != 5) {
      throw Error(ErrorCode::BadFormat, "expected 5 comma-separated fields", i + 1);
    }
    const auto sample = parse_index(cols[0]);
    const auto time = parse_double(cols[1]);
    const auto scale = parse_double(cols[2]);
    const auto magnitude = parse_double(cols[3]);
    const auto polarity = parse_long(cols[4]);
    if (!sample) throw Error(ErrorCode::BadIndex, "bad sample index", i + 1);
    if (!time || !scale || !magnitude || !polarity || (*polarity != 1 && *polarity != -1)) {
      throw Error(ErrorCode::BadFormat, "malformed peak line", i + 1);
    }
    if (!file.peaks.empty() && *sample <= file.peaks.back().sample) {
      throw Error(ErrorCode::NotIncreasing, "peak samples must increase", i + 1);
    }
    file.peaks.push_back({*sample, *time, *scale, *magnitude, static_cast<int>(*polarity)});
  }
  return file;
}

Pattern read_pattern_file(const fs::path& path) {
  const Lines lines = read_lines(path);
  if (lines.count() == 0 || all_blank(lines)) {
    throw Error(ErrorCode::EmptyFile, path.string() + " is empty");
  }
  const std::string_view head = trim(lines.text[0]);
  constexpr std::string_view kTag = "# pattern";
  if (head.substr(0, kTag.size()) != kTag) {
    throw Error(ErrorCode::MissingHeader, "expected '# pattern <name>'", 1);
  }
  std::string name(trim(head.substr(kTag.size())));
  std::vector<double> samples;
  for (std::size_t i = 1; i < lines.count(); ++i) {
    const std::string_view text = trim(lines.text[i]);
    if (text.empty()) continue;
    const auto v = parse_double(text);
    if (!v || !std::isfinite(*v)) {
      throw Error(ErrorCode::BadSample, "not a finite number: '" + std::string(text) + "'", i + 1);
    }
    samples.push_back(*v);
  }
  return Pattern(std::move(name), std::move(samples));
}

void write_pattern_file(const Pattern& pattern, const fs::path& path) {
  std::string out = "# pattern " + pattern.name() + "\n";
  for (double v : pattern.samples()) out += format_exact(v) + "\n";
  write_file_atomically(path, out);
}

AdaptedWavelet read_wavelet_file(const fs::path& path) {
  const Lines lines = read_lines(path);
  if (lines.count() == 0 || all_blank(lines)) {
    throw Error(ErrorCode::EmptyFile, path.string() + " is empty");
  }
  const std::string_view head = trim(lines.text[0]);
  constexpr std::string_view kTag = "# wavelet ";
  const auto degree_pos = head.find(" degree=");
  if (head.substr(0, kTag.size()) != kTag || degree_pos == std::string_view::npos ||
      degree_pos < kTag.size()) {
    throw Error(ErrorCode::MissingHeader, "expected '# wavelet <name> degree=<d> M=<M> t_peak=<v>'",
                1);
  }
  std::string name(trim(head.substr(kTag.size(), degree_pos - kTag.size())));
  const auto fields = header_fields("#" + std::string(head.substr(degree_pos)));
  const auto degree = parse_index(field(fields, "degree").value_or(""));
  const auto m = parse_index(field(fields, "M").value_or(""));
  if (!degree || !m || *m < 2) {
    throw Error(ErrorCode::MissingHeader, "header needs degree=<d> and M=<M >= 2>", 1);
  }

  std::vector<double> values;
  std::vector<std::size_t> line_of;
  for (std::size_t i = 1; i < lines.count(); ++i) {
    const std::string_view text = trim(lines.text[i]);
    if (text.empty()) continue;
    const auto v = parse_double(text);
    if (!v || !std::isfinite(*v)) {
      throw Error(ErrorCode::BadSample, "not a finite number: '" + std::string(text) + "'", i + 1);
    }
    values.push_back(*v);
    line_of.push_back(i + 1);
  }
  if (values.size() != *degree + *m) {
    throw Error(ErrorCode::BadFormat, "expected " + std::to_string(*degree + *m) +
                                          " value lines, found " + std::to_string(values.size()));
  }
  std::vector<double> coeffs(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(*degree));
  std::vector<double> sampled(values.begin() + static_cast<std::ptrdiff_t>(*degree), values.end());
  return AdaptedWavelet(std::move(name), std::move(coeffs), std::move(sampled));
}

void write_wavelet_file(const AdaptedWavelet& wavelet, const fs::path& path) {
  std::string out = "# wavelet " + wavelet.name() + " degree=" + std::to_string(wavelet.degree()) +
                    " M=" + std::to_string(wavelet.resolution()) +
                    " t_peak=" + format_exact(wavelet.t_peak()) + "\n";
  for (double c : wavelet.basis_coeffs()) out += format_exact(c) + "\n";
  for (double v : wavelet.sampled()) out += format_exact(v) + "\n";
  write_file_atomically(path, out);
}

void write_cwt_csv(const CwtMatrix& matrix, const fs::path& path) {
  std::string out = "# scales=";
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (r > 0) out += ',';
    out += format_exact(matrix.scales()[r]);
  }
  out += " fs=" + format_exact(matrix.fs()) + "\n";
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto row = matrix.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += format_exact(row[c]);
    }
    out += '\n';
  }
  write_file_atomically(path, out);
}

}  // namespace qrsadapt
