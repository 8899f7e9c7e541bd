#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nstload/signal.hpp"
#include "support.hpp"

using namespace nstload;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an nstload::Error");
  return ErrorCode::validation;
}

}  // namespace

TEST_CASE("nst is nasal minus forehead") {
  CHECK(nst(32.2, 34.9) == doctest::Approx(2.7).epsilon(1e-12));
  CHECK(nst(32.1, 34.7) == doctest::Approx(2.6).epsilon(1e-12));
  CHECK(nst(30.0, 30.0) == 0.0);
  CHECK(nst(35.0, 34.0) == doctest::Approx(-1.0));
  CHECK(code_of([] { nst(std::nan(""), 34.0); }) == ErrorCode::invalid_sample);
  CHECK(code_of([] { nst(34.0, std::numeric_limits<double>::infinity()); }) == ErrorCode::invalid_sample);
}

TEST_CASE("window_nst reproduces the worked example") {
  const auto rec = testing::worked_recording();
  const auto s = window_nst(rec, rec.task_interval, 120.0);
  REQUIRE(s.values.size() == 4);
  const double want[] = {2.7, 2.6, 2.5, 2.6};
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(s.values[k].nst_c - want[k]) < 1e-9);
    CHECK(s.values[k].window_end_s == 180.0 + 120.0 * (k + 1));
    CHECK(s.values[k].sample_count == 1);
  }
}

TEST_CASE("window_nst single sample") {
  std::vector<TemperatureSample> v{{10.0, 33.0, 35.5}};
  const auto s = window_nst(v, {0.0, 120.0}, 120.0);
  REQUIRE(s.values.size() == 1);
  CHECK(s.values[0].nst_c == nst(33.0, 35.5));
}

TEST_CASE("window_nst averages samples within each window") {
  // 8 samples at 60 s spacing, hand-computed pair means.
  const double nasal[] = {35.0, 35.2, 34.9, 34.7, 35.1, 35.5, 34.0, 34.4};
  std::vector<TemperatureSample> v;
  for (int i = 0; i < 8; ++i) v.push_back({60.0 * i, 33.0, nasal[i]});
  const auto s = window_nst(v, {0.0, 480.0}, 120.0);
  REQUIRE(s.values.size() == 4);
  const double want[] = {2.1, 1.8, 2.3, 1.2};
  for (int k = 0; k < 4; ++k) {
    CHECK(s.values[k].nst_c == doctest::Approx(want[k]).epsilon(1e-12));
    CHECK(s.values[k].sample_count == 2);
  }
}

TEST_CASE("window_nst interval edges are half-open") {
  std::vector<TemperatureSample> v{{0.0, 33.0, 34.0}, {120.0, 33.0, 35.0}, {240.0, 33.0, 36.0}};
  const auto s = window_nst(v, {0.0, 240.0}, 120.0);
  REQUIRE(s.values.size() == 2);
  CHECK(s.values[0].nst_c == 1.0);
  CHECK(s.values[1].nst_c == 2.0);
}

TEST_CASE("window_nst trailing partial window") {
  std::vector<TemperatureSample> v{{0.0, 33.0, 34.0}, {130.0, 33.0, 35.0}, {250.0, 33.0, 36.0}};
  SUBCASE("kept when it has a sample") {
    const auto s = window_nst(v, {0.0, 300.0}, 120.0);
    REQUIRE(s.values.size() == 3);
    CHECK(s.values[2].window_end_s == 300.0);
    CHECK(s.values[2].nst_c == 3.0);
  }
  SUBCASE("dropped when empty") {
    v.pop_back();
    const auto s = window_nst(v, {0.0, 300.0}, 120.0);
    CHECK(s.values.size() == 2);
  }
}

TEST_CASE("window_nst errors") {
  std::vector<TemperatureSample> v{{0.0, 33.0, 34.0}, {250.0, 33.0, 35.0}};
  CHECK(code_of([&] { window_nst(v, {0.0, 360.0}, 120.0); }) == ErrorCode::gap);
  CHECK(code_of([&] { window_nst(v, {300.0, 400.0}, 120.0); }) == ErrorCode::empty_interval);
  CHECK(code_of([&] { window_nst(v, {0.0, 360.0}, 0.0); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { window_nst(v, {10.0, 10.0}, 120.0); }) == ErrorCode::empty_interval);
  try {
    window_nst(v, {0.0, 360.0}, 120.0);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("window 1") != std::string::npos);
  }
}

TEST_CASE("window_nst over the whole interval equals the interval mean") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(30.0, 36.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TemperatureSample> v;
    double sum = 0.0;
    const int n = 1 + trial % 37;
    for (int i = 0; i < n; ++i) {
      v.push_back({10.0 * i, u(rng), u(rng)});
      sum += v.back().nasal_c - v.back().forehead_c;
    }
    const double len = 10.0 * n;
    const auto s = window_nst(v, {0.0, len}, len);
    REQUIRE(s.values.size() == 1);
    CHECK(s.values[0].nst_c == doctest::Approx(sum / n).epsilon(1e-12));
  }
}

TEST_CASE("window counts weighted by window means reproduce the interval mean") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(30.0, 36.0);
  std::uniform_real_distribution<double> step(1.0, 40.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TemperatureSample> v;
    double t = 0.0, sum = 0.0;
    while (t < 600.0) {
      v.push_back({t, u(rng), u(rng)});
      sum += nst(v.back());
      t += step(rng);
    }
    // Window spacing below the maximum step guarantees no interior gaps.
    const auto s = window_nst(v, {0.0, 600.0}, 45.0);
    double weighted = 0.0;
    std::size_t count = 0;
    for (const auto& p : s.values) {
      weighted += p.nst_c * static_cast<double>(p.sample_count);
      count += p.sample_count;
    }
    CHECK(count == v.size());
    CHECK(weighted / static_cast<double>(count) == doctest::Approx(sum / static_cast<double>(v.size())).epsilon(1e-12));
  }
}

TEST_CASE("rest_baseline") {
  SessionRecording rec = testing::worked_recording();
  for (auto& s : rec.samples) {
    if (s.time_s < 180.0) s = {s.time_s, 33.0, 34.5};
  }
  CHECK(rest_baseline(rec) == doctest::Approx(1.5).epsilon(1e-12));

  rec.samples = {{0.0, 33.0, 34.0}, {90.0, 33.0, 35.0}, {180.0, 33.0, 36.0}};
  rec.task_interval = {180.0, 300.0};
  CHECK(rest_baseline(rec) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(rest_baseline(rec, RestAggregation::last) == doctest::Approx(2.0).epsilon(1e-12));

  rec.rest_interval = {200.0, 250.0};
  CHECK(code_of([&] { rest_baseline(rec); }) == ErrorCode::empty_interval);
}

TEST_CASE("rest_baseline over 18 samples matches a brute-force mean") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.2);
  SessionRecording rec;
  rec.rest_interval = {0.0, 180.0};
  rec.task_interval = {180.0, 300.0};
  long double sum = 0;
  for (int i = 0; i < 30; ++i) {
    const double t = 10.0 * i;
    rec.samples.push_back({t, 34.0 + noise(rng), 35.5 + std::sin(t / 30.0) + noise(rng)});
    if (t < 180.0) sum += static_cast<long double>(rec.samples.back().nasal_c) - rec.samples.back().forehead_c;
  }
  CHECK(rest_baseline(rec) == doctest::Approx(static_cast<double>(sum / 18)).epsilon(1e-12));
}

TEST_CASE("offset of either stream shifts NST and rest baseline by the offset") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(30.0, 36.0), c(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    SessionRecording rec;
    rec.rest_interval = {0.0, 180.0};
    rec.task_interval = {180.0, 600.0};
    for (int i = 0; i < 60; ++i) rec.samples.push_back({10.0 * i, u(rng), u(rng)});
    const double offset = c(rng);
    SessionRecording nasal_up = rec, forehead_up = rec;
    for (auto& s : nasal_up.samples) s.nasal_c += offset;
    for (auto& s : forehead_up.samples) s.forehead_c += offset;

    const auto base = window_nst(rec, rec.task_interval, 120.0);
    const auto a = window_nst(nasal_up, rec.task_interval, 120.0);
    const auto b = window_nst(forehead_up, rec.task_interval, 120.0);
    REQUIRE(a.values.size() == base.values.size());
    for (std::size_t k = 0; k < base.values.size(); ++k) {
      CHECK(std::abs(a.values[k].nst_c - (base.values[k].nst_c + offset)) < 1e-12);
      CHECK(std::abs(b.values[k].nst_c - (base.values[k].nst_c - offset)) < 1e-12);
    }
    CHECK(std::abs(rest_baseline(nasal_up) - (rest_baseline(rec) + offset)) < 1e-12);
    CHECK(std::abs(rest_baseline(forehead_up) - (rest_baseline(rec) - offset)) < 1e-12);
  }
}

TEST_CASE("recording validation lists every violation") {
  SessionRecording rec = testing::worked_recording();
  CHECK(rec.violations().empty());
  CHECK_NOTHROW(rec.validate());

  rec.samples[1].nasal_c = 80.0;
  rec.samples[2].time_s = rec.samples[1].time_s;
  rec.task_interval = {100.0, 660.0};
  const auto v = rec.violations();
  CHECK(v.size() == 3);
  CHECK(code_of([&] { rec.validate(); }) == ErrorCode::validation);

  SessionRecording empty_task = testing::worked_recording();
  empty_task.task_interval = {700.0, 800.0};
  REQUIRE(empty_task.violations().size() == 1);
  CHECK(empty_task.violations()[0].find("no samples") != std::string::npos);

  SessionRecording reversed = testing::worked_recording();
  reversed.rest_interval = {700.0, 600.0};
  CHECK_FALSE(reversed.violations().empty());

  TemperatureBand wide{0.0, 100.0};
  SessionRecording hot = testing::worked_recording();
  hot.samples[0].nasal_c = 50.0;
  CHECK_FALSE(hot.violations().empty());
  CHECK(hot.violations(wide).empty());
}

TEST_CASE("sample CSV round trip and errors") {
  const auto rec = testing::worked_recording();
  std::ostringstream os;
  write_samples_csv(os, rec.samples);
  std::istringstream is(os.str());
  const auto back = parse_samples_csv(is, "mem");
  REQUIRE(back.size() == rec.samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].time_s == rec.samples[i].time_s);
    CHECK(back[i].forehead_c == rec.samples[i].forehead_c);
    CHECK(back[i].nasal_c == rec.samples[i].nasal_c);
  }

  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_samples_csv(in, "f.csv");
  };
  CHECK(parse("\xEF\xBB\xBFtime_s,forehead_c,nasal_c\r\n0,33,34\r\n\n").size() == 1);
  CHECK(parse("time_s, forehead_c, nasal_c\n0, +33.5 ,34\n")[0].forehead_c == 33.5);

  auto message = [&](const std::string& text) {
    try {
      parse(text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("").find("f.csv:1: missing header") == 0);
  CHECK(message("a,b,c\n").find("expected header") != std::string::npos);
  CHECK(message("time_s,forehead_c,nasal_c\n0,33,34\n5,33\n").find("f.csv:3: expected 3 fields") == 0);
  CHECK(message("time_s,forehead_c,nasal_c\n0,33,abc\n").find("f.csv:2: field nasal_c") == 0);
  CHECK(message("time_s,forehead_c,nasal_c\n0,33,nan\n").find("not a finite number") != std::string::npos);
  CHECK(message("time_s,forehead_c,nasal_c\n0,3.3,34\n").find("forehead_c") != std::string::npos);
  CHECK(message("time_s,forehead_c,nasal_c\n5,33,34\n5,33,34\n").find("f.csv:3: time_s not strictly") == 0);

  CHECK(code_of([] { read_samples_csv("/nonexistent/x.csv"); }) == ErrorCode::io);
}
