#include "nstload/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "detail/text.hpp"

namespace nstload {

using nlohmann::json;

const ReportCell* ModelReport::find(Subscale target, CandidateMode mode) const {
  for (const auto& c : cells) {
    if (c.target == target && c.mode == mode) return &c;
  }
  return nullptr;
}

ModelReport build_report(const FeatureTable& table, const StepwiseConfig& config) {
  ModelReport report;
  report.config = config;
  report.n_rows = table.rows.size();
  report.manifest_path = table.manifest_path;
  report.config_digest = table.config_digest;
  for (auto mode : kReportModes) {
    for (auto target : kSubscales) {
      ReportCell cell{target, mode, std::nullopt, {}};
      try {
        cell.model = stepwise_fit(table, target, mode, config);
      } catch (const Error& e) {
        cell.error = std::string(to_string(e.code())) + ": " + e.what();
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::string format_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

namespace {

const char* subscale_label(Subscale s) {
  switch (s) {
    case Subscale::mental_demand: return "Mental demand";
    case Subscale::own_performance: return "Own performance";
    case Subscale::effort: return "Effort";
    case Subscale::frustration: return "Frustration level";
  }
  return "";
}

const char* mode_label(CandidateMode m) {
  return m == CandidateMode::time_only ? "Time" : "Time, WMAX, WAVE, and WSUM";
}

const char* feature_label(Feature f) {
  switch (f) {
    case Feature::wmax: return "WMAX";
    case Feature::wave: return "WAVE";
    case Feature::wsum: return "WSUM";
    case Feature::log_time: return "Time";
  }
  return "";
}

class Grid {
 public:
  explicit Grid(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void render(std::ostream& os) const {
    std::vector<std::size_t> width(rows_.front().size(), 0);
    for (const auto& r : rows_) {
      for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
    }
    for (const auto& r : rows_) {
      std::string line;
      for (std::size_t j = 0; j < r.size(); ++j) {
        const auto pad = std::string(width[j] - r[j].size(), ' ');
        if (j == 0) line += r[j] + pad;  // labels left-aligned
        else line += "  " + pad + r[j];
      }
      os << line << '\n';
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

std::vector<std::string> header_row(const char* first) {
  std::vector<std::string> h{first};
  for (auto s : kSubscales) h.emplace_back(subscale_label(s));
  return h;
}

}  // namespace

std::string render_text(const ModelReport& report) {
  std::ostringstream os;
  os << "Adjusted R^2 of each model (n = " << report.n_rows << ")\n";
  Grid adj(header_row("Candidates"));
  for (auto mode : kReportModes) {
    std::vector<std::string> row{mode_label(mode)};
    for (auto t : kSubscales) {
      const auto* cell = report.find(t, mode);
      row.push_back(cell && cell->model ? format_cell(cell->model->adj_r2) : "n/a");
    }
    adj.add(std::move(row));
  }
  adj.render(os);

  for (auto mode : {CandidateMode::biometric_full, CandidateMode::time_only}) {
    os << "\nStandardized partial regression coefficients (candidates: " << mode_label(mode) << ")\n";
    Grid coef(header_row("Variable"));
    for (auto f : kAllFeatures) {
      std::vector<std::string> row{feature_label(f)};
      for (auto t : kSubscales) {
        const auto* cell = report.find(t, mode);
        if (!cell || !cell->model) {
          row.emplace_back("n/a");
          continue;
        }
        auto k = cell->model->index_of(to_string(f));
        row.push_back(k ? format_cell(cell->model->std_coefficients(static_cast<Eigen::Index>(*k))) : "-");
      }
      coef.add(std::move(row));
    }
    coef.render(os);
  }

  os << "\n\"-\": variable not included in the model. Time is log-transformed task time.\n";
  if (report.config.paper_literal_tolerance) {
    os << "Tolerance rule applied literally (threshold 1 - 1e-9): any candidate correlated with an\n"
          "already selected variable is rejected, so multi-variable models are rare.\n";
  } else {
    os << "Candidates with tolerance below " << detail::format_double(report.config.tolerance_threshold)
       << " were not added (multicollinearity screen).\n";
  }
  os << "Selection: " << to_string(report.config.selection) << " on adjusted R^2";
  if (report.config.min_improvement > 0.0) {
    os << ", minimum improvement " << detail::format_double(report.config.min_improvement);
  }
  os << ".\n";
  for (const auto& c : report.cells) {
    if (!c.model) {
      os << "Failed: " << to_string(c.target) << " / " << to_string(c.mode) << ": " << c.error << '\n';
    }
  }
  return os.str();
}

namespace {

json named_values(const FittedModel& m, const Eigen::VectorXd& v) {
  json out = json::object();
  for (std::size_t k = 0; k < m.selected.size(); ++k) out[m.selected[k]] = v(static_cast<Eigen::Index>(k));
  return out;
}

Eigen::VectorXd read_named(const json& obj, const std::vector<std::string>& names, const char* field) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (!obj.contains(names[k])) {
      throw Error(ErrorCode::validation, std::string("report JSON: ") + field + " missing '" + names[k] + "'");
    }
    v(static_cast<Eigen::Index>(k)) = obj.at(names[k]).get<double>();
  }
  return v;
}

}  // namespace

std::string to_json(const ModelReport& report) {
  json models = json::array();
  for (const auto& c : report.cells) {
    json entry = {{"target", std::string(to_string(c.target))}, {"mode", std::string(to_string(c.mode))}};
    if (!c.model) {
      entry["error"] = c.error;
    } else {
      const auto& m = *c.model;
      entry["selected"] = m.selected;
      entry["intercept"] = m.intercept;
      entry["coefficients"] = named_values(m, m.coefficients);
      entry["std_coefficients"] = named_values(m, m.std_coefficients);
      entry["r2"] = m.r2;
      entry["adj_r2"] = m.adj_r2;
      entry["n"] = m.n;
      entry["tolerances"] = named_values(m, m.tolerances);
    }
    models.push_back(std::move(entry));
  }
  json config = {
      {"tolerance_threshold", report.config.tolerance_threshold},
      {"paper_literal_tolerance", report.config.paper_literal_tolerance},
      {"effective_tolerance_threshold", report.config.effective_threshold()},
      {"selection", std::string(to_string(report.config.selection))},
      {"min_improvement", report.config.min_improvement},
      {"n_rows", report.n_rows},
      {"manifest", report.manifest_path},
      {"config_digest", report.config_digest},
  };
  json doc = {{"models", models}, {"config", config}};
  return doc.dump(2) + "\n";
}

ModelReport report_from_json(const std::string& text) {
  ModelReport report;
  try {
    const json doc = json::parse(text);
    const auto& cfg = doc.at("config");
    report.config.tolerance_threshold = cfg.at("tolerance_threshold").get<double>();
    report.config.paper_literal_tolerance = cfg.at("paper_literal_tolerance").get<bool>();
    auto sel = parse_selection(cfg.at("selection").get<std::string>());
    if (!sel) throw Error(ErrorCode::validation, "report JSON: unknown selection");
    report.config.selection = *sel;
    report.config.min_improvement = cfg.at("min_improvement").get<double>();
    report.n_rows = cfg.value("n_rows", std::size_t{0});
    report.manifest_path = cfg.value("manifest", std::string{});
    report.config_digest = cfg.value("config_digest", std::string{});

    for (const auto& entry : doc.at("models")) {
      ReportCell cell;
      auto target = parse_subscale(entry.at("target").get<std::string>());
      auto mode = parse_candidate_mode(entry.at("mode").get<std::string>());
      if (!target || !mode) throw Error(ErrorCode::validation, "report JSON: unknown target or mode");
      cell.target = *target;
      cell.mode = *mode;
      if (entry.contains("error")) {
        cell.error = entry.at("error").get<std::string>();
      } else {
        FittedModel m;
        m.target = std::string(to_string(*target));
        m.mode = *mode;
        m.selected = entry.at("selected").get<std::vector<std::string>>();
        m.intercept = entry.at("intercept").get<double>();
        m.coefficients = read_named(entry.at("coefficients"), m.selected, "coefficients");
        m.std_coefficients = read_named(entry.at("std_coefficients"), m.selected, "std_coefficients");
        m.tolerances = read_named(entry.at("tolerances"), m.selected, "tolerances");
        m.r2 = entry.at("r2").get<double>();
        m.adj_r2 = entry.at("adj_r2").get<double>();
        m.n = entry.at("n").get<std::size_t>();
        cell.model = std::move(m);
      }
      report.cells.push_back(std::move(cell));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, std::string("report JSON: ") + e.what());
  }
  return report;
}

}  // namespace nstload
