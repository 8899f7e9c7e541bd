#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "nstload/report.hpp"
#include "nstload/synth.hpp"
#include "support.hpp"

using namespace nstload;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string synth_into(const testing::TempDir& dir, std::vector<std::string> extra = {}) {
  std::vector<std::string> args{"synth", "--out", dir.path().string()};
  args.insert(args.end(), extra.begin(), extra.end());
  const auto r = invoke(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return (dir / "manifest.json").string();
}

}  // namespace

TEST_CASE("help and usage errors") {
  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("Exit codes") != std::string::npos);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"fit"}).code == 1);
  CHECK(invoke({"fit", "m.json", "--selection", "sideways"}).code == 1);
  CHECK(invoke({"fit", "m.json", "--window-secs", "abc"}).code == 1);
}

TEST_CASE("config validation") {
  cli::Config c;
  CHECK_NOTHROW(c.validate());
  c.window_len_s = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = cli::Config{};
  c.tolerance_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = cli::Config{};
  c.band = {40.0, 30.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c = cli::Config{};
  c.min_improvement = -0.1;
  CHECK_THROWS_AS(c.validate(), Error);

  testing::TempDir dir;
  const auto manifest = synth_into(dir);
  const auto r = invoke({"metrics", manifest, "--window-secs", "-5"});
  CHECK(r.code == 1);
  CHECK(r.err.find("--window-secs") != std::string::npos);
  CHECK(invoke({"metrics", manifest, "--temp-band", "45,20"}).code == 1);
}

TEST_CASE("validate") {
  testing::TempDir dir;
  const auto manifest = synth_into(dir);
  const auto ok = invoke({"validate", manifest});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("OK: 14 sessions valid") != std::string::npos);

  SUBCASE("overlapping intervals") {
    auto doc = json::parse(testing::read_text(manifest));
    doc["sessions"][4]["task_interval_s"] = {100, 700};
    testing::write_text(manifest, doc.dump());
    const auto r = invoke({"validate", manifest});
    CHECK(r.code == 1);
    CHECK(r.out.find("S03/T1") != std::string::npos);
    const auto j = invoke({"validate", manifest, "--output-format", "json"});
    CHECK(j.code == 1);
    CHECK(json::parse(j.out).at("diagnostics").size() == 1);
  }
  SUBCASE("missing sample file") {
    std::filesystem::remove(dir / "samples/S05_T2.csv");
    CHECK(invoke({"validate", manifest}).code == 2);
  }
  SUBCASE("missing manifest") { CHECK(invoke({"validate", (dir / "none.json").string()}).code == 2); }
  SUBCASE("band flag") {
    CHECK(invoke({"validate", manifest, "--temp-band", "35,45"}).code == 1);
  }
}

TEST_CASE("metrics for the worked example") {
  testing::TempDir dir;
  const auto manifest = testing::write_study_files(dir.path(), {testing::worked_task()}).string();
  const auto text = invoke({"metrics", manifest});
  REQUIRE(text.code == 0);
  CHECK(text.out.find("S01      T1    1.2000  1.1000  4.4000        4    1.5000") != std::string::npos);

  const auto csv = invoke({"metrics", manifest, "--output-format", "csv"});
  REQUIRE(csv.code == 0);
  std::istringstream is(csv.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(header == "subject_id,task_id,wmax,wave,wsum,n_windows,rest_nst_c");
  auto cells = std::vector<std::string>{};
  std::stringstream rs(row);
  for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
  REQUIRE(cells.size() == 7);
  CHECK(std::abs(std::stod(cells[2]) - 1.2) < 1e-9);
  CHECK(std::abs(std::stod(cells[3]) - 1.1) < 1e-9);
  CHECK(std::abs(std::stod(cells[4]) - 4.4) < 1e-9);
  CHECK(cells[5] == "4");
  CHECK(std::abs(std::stod(cells[6]) - 1.5) < 1e-9);

  const auto last = invoke({"metrics", manifest, "--rest-agg", "last", "--output-format", "json"});
  REQUIRE(last.code == 0);
  CHECK(json::parse(last.out)["metrics"][0]["rest_nst_c"].get<double>() == doctest::Approx(1.5));
}

TEST_CASE("metrics for a zero-load session") {
  auto p = LoadProfile{};
  p.phases = {{PhaseKind::planning, 300.0, 0.0}, {PhaseKind::typing, 300.0, 0.0}};
  p.rest_load_level = 0.0;
  p.noise_sd_c = 0.0;
  auto task = testing::worked_task(10.0);
  task.recording = generate_session(p, 10.0, 3).recording;
  testing::TempDir dir;
  const auto manifest = testing::write_study_files(dir.path(), {task}).string();
  const auto r = invoke({"metrics", manifest, "--output-format", "json"});
  REQUIRE(r.code == 0);
  const auto m = json::parse(r.out)["metrics"][0];
  CHECK(m["wmax"] == 0.0);
  CHECK(m["wave"] == 0.0);
  CHECK(m["wsum"] == 0.0);
}

TEST_CASE("metrics for a synthetic study match the library") {
  testing::TempDir dir;
  const auto manifest = synth_into(dir, {"--seed", "9"});
  const auto r = invoke({"metrics", manifest, "--output-format", "json"});
  REQUIRE(r.code == 0);
  const auto rows = json::parse(r.out)["metrics"];
  const auto table = build_features(load_manifest(manifest));
  REQUIRE(rows.size() == 14);
  for (std::size_t i = 0; i < 14; ++i) {
    CHECK(rows[i]["subject_id"] == table.rows[i].subject_id);
    CHECK(rows[i]["wmax"].get<double>() == table.rows[i].wmax);
    CHECK(rows[i]["wave"].get<double>() == table.rows[i].wave);
    CHECK(rows[i]["wsum"].get<double>() == table.rows[i].wsum);
    CHECK(rows[i]["n_windows"].get<std::size_t>() == table.rows[i].n_windows);
  }
}

TEST_CASE("features writes the table") {
  testing::TempDir dir;
  const auto manifest = synth_into(dir);
  const auto out = (dir / "features.csv").string();
  const auto r = invoke({"features", manifest, "--out", out});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto text = testing::read_text(out);
  CHECK(text.rfind("subject_id,task_id,wmax,wave,wsum,log_time,mental_demand,own_performance,effort,frustration\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 15);
  CHECK(invoke({"features", manifest, "--output-format", "text"}).code == 0);
  CHECK(json::parse(invoke({"features", manifest, "--output-format", "json"}).out)["rows"].size() == 14);
  CHECK(invoke({"features", manifest, "--out", (dir / "no/such/dir/f.csv").string()}).code == 2);
}

TEST_CASE("fit recovers a planted model") {
  testing::TempDir dir;
  TruthRelations truth = default_truth();
  truth[0] = TruthRelation{};
  truth[0][Feature::wmax] = 0.5;
  truth[0][Feature::log_time] = -0.8;
  truth[0].noise_rel_sd = 0.05;
  testing::write_text(dir / "truth.json", truth_to_json(truth));
  const auto manifest = synth_into(dir, {"--truth", (dir / "truth.json").string(), "--seed", "1"});
  const auto r = invoke({"fit", manifest, "--output-format", "json"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = report_from_json(r.out);
  const auto* cell = report.find(Subscale::mental_demand, CandidateMode::biometric_full);
  REQUIRE(cell);
  REQUIRE(cell->model);
  CHECK(cell->model->includes("wmax"));
  CHECK(cell->model->includes("log_time"));
  CHECK(cell->model->selected.size() == 2);
  for (const auto& c : report.cells) {
    if (c.mode == CandidateMode::time_only && c.model) {
      CHECK(c.model->selected.size() <= 1);
      if (!c.model->selected.empty()) CHECK(c.model->selected[0] == "log_time");
    }
  }
}

TEST_CASE("fit output formats agree and report re-renders") {
  testing::TempDir dir;
  const auto manifest = synth_into(dir);
  const auto saved = (dir / "report.json").string();
  const auto text = invoke({"fit", manifest, "--report-json", saved});
  REQUIRE(text.code == 0);
  CHECK(text.out.find("Adjusted R^2 of each model (n = 14)") != std::string::npos);
  const auto json_out = invoke({"fit", manifest, "--output-format", "json"});
  CHECK(json_out.out == testing::read_text(saved));
  CHECK(render_text(report_from_json(json_out.out)) == text.out);

  const auto again = invoke({"report", saved});
  CHECK(again.code == 0);
  CHECK(again.out == text.out);
  CHECK(invoke({"report", saved, "--output-format", "json"}).out == json_out.out);
  CHECK(invoke({"report", (dir / "absent.json").string()}).code == 2);
  testing::write_text(dir / "broken.json", "{}");
  CHECK(invoke({"report", (dir / "broken.json").string()}).code == 1);
  CHECK(invoke({"fit", manifest, "--output-format", "csv"}).code == 1);
}

TEST_CASE("fit flags reach the report") {
  testing::TempDir dir;
  const auto manifest = synth_into(dir);
  const auto r = invoke({"fit", manifest, "--output-format", "json", "--tolerance-threshold", "0.25",
                         "--selection", "forward_backward", "--min-improvement", "0.01"});
  REQUIRE(r.code == 0);
  const auto cfg = json::parse(r.out)["config"];
  CHECK(cfg["tolerance_threshold"] == 0.25);
  CHECK(cfg["selection"] == "forward_backward");
  CHECK(cfg["min_improvement"] == 0.01);
  const auto literal = invoke({"fit", manifest, "--paper-literal-tolerance"});
  REQUIRE(literal.code == 0);
  CHECK(literal.out.find("applied literally") != std::string::npos);
}

TEST_CASE("fit needs three rows") {
  testing::TempDir dir;
  const auto manifest = synth_into(dir, {"--subjects", "1", "--tasks", "2"});
  const auto r = invoke({"fit", manifest});
  CHECK(r.code == 1);
  CHECK(r.err.find("n >= 3") != std::string::npos);
}

TEST_CASE("synth shape and determinism") {
  testing::TempDir a, b;
  synth_into(a, {"--subjects", "3", "--tasks", "4"});
  const auto doc = json::parse(testing::read_text(a / "manifest.json"));
  CHECK(doc["sessions"].size() == 12);

  testing::TempDir d1, d2;
  const auto m1 = synth_into(d1);
  const auto m2 = synth_into(d2);
  CHECK(json::parse(testing::read_text(m1))["sessions"].size() == 14);
  for (const auto& entry : std::filesystem::recursive_directory_iterator(d1.path())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), d1.path());
    CHECK(testing::read_text(entry.path()) == testing::read_text(d2.path() / rel));
  }
  CHECK(invoke({"fit", m1, "--output-format", "json"}).out == invoke({"fit", m2, "--output-format", "json"}).out);

  CHECK(invoke({"synth", "--out", (d1 / "manifest.json/x").string()}).code == 2);
  CHECK(invoke({"synth", "--subjects", "0", "--out", (d1 / "zero").string()}).code == 1);
  testing::write_text(d1 / "truth_bad.json", "{\"effort\": {\"bogus\": 1}}");
  CHECK(invoke({"synth", "--truth", (d1 / "truth_bad.json").string(), "--out", (d1 / "t").string()}).code == 1);
}
