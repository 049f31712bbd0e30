#pragma once

// Text file formats.
//
//   signal CSV:      "# fs=<Hz> record=<id>", then one value (mV) per line
//   annotation CSV:  "# record=<id>", then one strictly increasing sample index per line
//   peaks CSV:       "# record=<id> wavelet=<name>", then
//                    "sample,time_s,scale_s,magnitude,polarity" lines
//   pattern file:    "# pattern <name>", then one amplitude per line
//   wavelet file:    "# wavelet <name> degree=<d> M=<M> t_peak=<v>", then d
//                    coefficient lines, then M sample lines (17 significant digits)
//   CWT dump:        "# scales=<a1,a2,...> fs=<Hz>", then one comma-separated row per scale
//
// Readers throw Error with the 1-based line number of the first bad line.
// Writers go through a temporary file that is renamed into place on success.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "qrsadapt/cwt.hpp"
#include "qrsadapt/detector.hpp"
#include "qrsadapt/wavelet_design.hpp"

namespace qrsadapt {

struct AnnotationSet {
  std::string record_id;
  std::vector<std::size_t> r_samples;  // strictly increasing
};

EcgSignal read_signal_csv(const std::filesystem::path& path);
void write_signal_csv(const EcgSignal& signal, const std::filesystem::path& path);

AnnotationSet read_annotations_csv(const std::filesystem::path& path);
void write_annotations_csv(const AnnotationSet& annotations, const std::filesystem::path& path);

void write_peaks_csv(const DetectionResult& result, const std::filesystem::path& path);

struct PeaksFile {
  std::string record_id;
  std::string wavelet_name;
  std::vector<RPeak> peaks;
};
PeaksFile read_peaks_csv(const std::filesystem::path& path);

Pattern read_pattern_file(const std::filesystem::path& path);
void write_pattern_file(const Pattern& pattern, const std::filesystem::path& path);

AdaptedWavelet read_wavelet_file(const std::filesystem::path& path);
void write_wavelet_file(const AdaptedWavelet& wavelet, const std::filesystem::path& path);

void write_cwt_csv(const CwtMatrix& matrix, const std::filesystem::path& path);

// Writes `contents` to a sibling temporary file and renames it over `path`.
// Throws IoFailure.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

// Shortest round-trip decimal form ("%.17g").
std::string format_exact(double value);

}  // namespace qrsadapt
