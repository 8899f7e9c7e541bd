#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nstload/features.hpp"
#include "nstload/signal.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("nstload-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// The worked example: rest NST 1.5, four task readings one per 2-min window.
inline nstload::SessionRecording worked_recording() {
  nstload::SessionRecording rec;
  rec.subject_id = "S01";
  rec.task_id = "T1";
  rec.rest_interval = {0.0, 180.0};
  rec.task_interval = {180.0, 660.0};
  for (double t : {0.0, 60.0, 120.0}) rec.samples.push_back({t, 33.0, 34.5});
  const double forehead[] = {32.2, 32.1, 32.3, 32.1};
  const double nasal[] = {34.9, 34.7, 34.8, 34.7};
  for (int k = 0; k < 4; ++k) rec.samples.push_back({180.0 + 120.0 * k, forehead[k], nasal[k]});
  return rec;
}

inline nstload::TaskRecord worked_task(double minutes = 8.0) {
  nstload::TaskRecord t;
  t.subject_id = "S01";
  t.task_id = "T1";
  t.difficulty = nstload::Difficulty::easy;
  t.task_time_min = minutes;
  t.samples_csv = "samples/S01_T1.csv";
  t.recording = worked_recording();
  t.tlx = {40.0, 55.0, 35.0, 60.0};
  return t;
}

/// Writes records' samples under `dir` and a manifest next to them.
inline std::filesystem::path write_study_files(const std::filesystem::path& dir,
                                               const std::vector<nstload::TaskRecord>& records) {
  for (const auto& r : records) {
    std::ostringstream csv;
    nstload::write_samples_csv(csv, r.recording.samples);
    write_text(dir / r.samples_csv, csv.str());
  }
  std::ostringstream m;
  nstload::write_manifest(m, records);
  write_text(dir / "manifest.json", m.str());
  return dir / "manifest.json";
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p) {
  std::normal_distribution<double> d;
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = d(rng);
  return m;
}

}  // namespace testing
