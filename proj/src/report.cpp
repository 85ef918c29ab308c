#include "flowforest/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace flowforest::report {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double_or_throw(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad number in report file: '" + s + "'");
  }
  return v;
}

std::optional<double> parse_metric(const std::string& s) {
  if (s == "NA") return std::nullopt;
  return parse_double_or_throw(s);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report file: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read report file: " + path.string());
  return in;
}

nlohmann::json metrics_json(const MetricsReport& m) {
  nlohmann::json j;
  j["precision"] = m.precision ? nlohmann::json(*m.precision) : nlohmann::json();
  j["recall"] = m.recall ? nlohmann::json(*m.recall) : nlohmann::json();
  j["f1"] = m.f1 ? nlohmann::json(*m.f1) : nlohmann::json();
  return j;
}

nlohmann::json boxplot_json(const BoxplotStats& b) {
  return nlohmann::json{{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3},
                        {"max", b.max}};
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_metric(const std::optional<double>& value) {
  return value ? format_double(*value) : "NA";
}

std::span<const std::string> step_order() {
  static const std::vector<std::string> order = {"I", "II", "III", "IV", "V",
                                                 "VI", "VII", "VIII", "IX"};
  return order;
}

GridAggregates aggregate_grid(std::span<const eval::GridCell> cells) {
  struct Acc {
    double sum = 0.0;
    size_t n = 0;
    void add(double v) {
      sum += v;
      ++n;
    }
    double mean() const { return sum / static_cast<double>(n); }
  };

  std::map<std::string, std::map<std::string, Acc>> fam, grp, stp;
  std::map<std::string, std::map<std::string, std::map<std::string, Acc>>> grp_stp;

  for (const auto& cell : cells) {
    fam[cell.detector][cell.family].add(cell.detection_rate);
    grp[cell.detector][cell.group].add(cell.detection_rate);
    stp[cell.detector][cell.step].add(cell.detection_rate);
    grp_stp[cell.detector][cell.group][cell.step].add(cell.detection_rate);
  }

  GridAggregates agg;
  for (const auto& [det, keys] : fam) {
    for (const auto& [key, acc] : keys) agg.by_family[det][key] = acc.mean();
  }
  for (const auto& [det, keys] : grp) {
    for (const auto& [key, acc] : keys) agg.by_group[det][key] = acc.mean();
  }
  for (const auto& [det, keys] : stp) {
    for (const auto& [key, acc] : keys) agg.by_step[det][key] = acc.mean();
  }
  for (const auto& [det, groups] : grp_stp) {
    for (const auto& [group, steps] : groups) {
      for (const auto& [step, acc] : steps) agg.by_group_step[det][group][step] = acc.mean();
    }
  }

  for (const auto& [det, steps] : agg.by_step) {
    double lo = 1.0, hi = 0.0;
    for (const auto& [step, dr] : steps) {
      lo = std::min(lo, dr);
      hi = std::max(hi, dr);
    }
    agg.step_dispersion[det] = hi - lo;
  }

  for (const auto& [det, groups] : agg.by_group_step) {
    for (const auto& [group, steps] : groups) {
      std::vector<double> values;
      for (const auto& step : step_order()) {
        const auto it = steps.find(step);
        if (it != steps.end()) values.push_back(it->second);
      }
      agg.group_boxplots[det][group] = boxplot_stats(values);
    }
  }

  // Per-family boxplots come from the raw cells (one DR per step).
  std::map<std::string, std::map<std::string, std::map<std::string, std::map<std::string, double>>>>
      raw;
  for (const auto& cell : cells) {
    raw[cell.detector][cell.family][cell.group][cell.step] = cell.detection_rate;
  }
  for (const auto& [det, families] : raw) {
    for (const auto& [family, groups] : families) {
      for (const auto& [group, steps] : groups) {
        std::vector<double> values;
        for (const auto& step : step_order()) {
          const auto it = steps.find(step);
          if (it != steps.end()) values.push_back(it->second);
        }
        agg.family_group_boxplots[det][family][group] = boxplot_stats(values);
      }
    }
  }
  return agg;
}

std::map<std::string, double> grid_mean_by_detector(std::span<const eval::GridCell> cells) {
  std::map<std::string, std::pair<double, size_t>> acc;
  for (const auto& cell : cells) {
    acc[cell.detector].first += cell.detection_rate;
    ++acc[cell.detector].second;
  }
  std::map<std::string, double> out;
  for (const auto& [det, pair] : acc) out[det] = pair.first / static_cast<double>(pair.second);
  return out;
}

std::vector<eval::NormalRow> with_average_rows(std::vector<eval::NormalRow> rows) {
  struct Acc {
    double p = 0, r = 0, f = 0;
    size_t np = 0, nr = 0, nf = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& row : rows) {
    auto& a = acc[row.detector];
    if (row.metrics.precision) {
      a.p += *row.metrics.precision;
      ++a.np;
    }
    if (row.metrics.recall) {
      a.r += *row.metrics.recall;
      ++a.nr;
    }
    if (row.metrics.f1) {
      a.f += *row.metrics.f1;
      ++a.nf;
    }
  }
  for (const auto& [det, a] : acc) {
    eval::NormalRow avg;
    avg.family = "Average";
    avg.detector = det;
    if (a.np) avg.metrics.precision = a.p / static_cast<double>(a.np);
    if (a.nr) avg.metrics.recall = a.r / static_cast<double>(a.nr);
    if (a.nf) avg.metrics.f1 = a.f / static_cast<double>(a.nf);
    rows.push_back(std::move(avg));
  }
  return rows;
}

void write_normal_csv(const std::filesystem::path& path, std::span<const eval::NormalRow> rows) {
  auto out = open_out(path);
  out << "family,detector,f1,precision,recall\n";
  for (const auto& row : rows) {
    out << row.family << ',' << row.detector << ',' << format_metric(row.metrics.f1) << ','
        << format_metric(row.metrics.precision) << ',' << format_metric(row.metrics.recall)
        << '\n';
  }
}

std::vector<eval::NormalRow> read_normal_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty report: " + path.string());
  std::vector<eval::NormalRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5) throw std::runtime_error("bad normal-report row: " + line);
    eval::NormalRow row;
    row.family = fields[0];
    row.detector = fields[1];
    row.metrics.f1 = parse_metric(fields[2]);
    row.metrics.precision = parse_metric(fields[3]);
    row.metrics.recall = parse_metric(fields[4]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_timings_csv(const std::filesystem::path& path, std::span<const TimingRow> rows) {
  auto out = open_out(path);
  out << "family,detector,seconds\n";
  for (const auto& row : rows) {
    out << row.family << ',' << row.detector << ',' << format_double(row.seconds) << '\n';
  }
}

void write_grid_csv(const std::filesystem::path& path, std::span<const eval::GridCell> cells) {
  auto out = open_out(path);
  out << "family,group,step,detector,n_samples,tp,fn,detection_rate\n";
  for (const auto& cell : cells) {
    out << cell.family << ',' << cell.group << ',' << cell.step << ',' << cell.detector << ','
        << cell.n_samples << ',' << cell.tp << ',' << cell.fn << ','
        << format_double(cell.detection_rate) << '\n';
  }
}

std::vector<eval::GridCell> read_grid_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty grid report: " + path.string());
  std::vector<eval::GridCell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 8) throw std::runtime_error("bad grid row: " + line);
    eval::GridCell cell;
    cell.family = fields[0];
    cell.group = fields[1];
    cell.step = fields[2];
    cell.detector = fields[3];
    cell.n_samples = static_cast<size_t>(parse_double_or_throw(fields[4]));
    cell.tp = static_cast<uint64_t>(parse_double_or_throw(fields[5]));
    cell.fn = static_cast<uint64_t>(parse_double_or_throw(fields[6]));
    cell.detection_rate = parse_double_or_throw(fields[7]);
    cells.push_back(std::move(cell));
  }
  return cells;
}

void write_grid_aggregates_csv(const std::filesystem::path& path, const GridAggregates& agg) {
  auto out = open_out(path);
  out << "aggregate,detector,key,mean_detection_rate\n";
  for (const auto& [det, keys] : agg.by_family) {
    for (const auto& [key, dr] : keys) {
      out << "family," << det << ',' << key << ',' << format_double(dr) << '\n';
    }
  }
  for (const auto& [det, keys] : agg.by_group) {
    for (const auto& [key, dr] : keys) {
      out << "group," << det << ',' << key << ',' << format_double(dr) << '\n';
    }
  }
  for (const auto& [det, keys] : agg.by_step) {
    for (const auto& step : step_order()) {
      const auto it = keys.find(step);
      if (it != keys.end()) {
        out << "step," << det << ',' << step << ',' << format_double(it->second) << '\n';
      }
    }
  }
  for (const auto& [det, dispersion] : agg.step_dispersion) {
    out << "step_dispersion," << det << ",max_minus_min," << format_double(dispersion) << '\n';
  }
  for (const auto& [det, groups] : agg.by_group_step) {
    for (const auto& [group, steps] : groups) {
      for (const auto& step : step_order()) {
        const auto it = steps.find(step);
        if (it != steps.end()) {
          out << "group_step," << det << ',' << group << ':' << step << ','
              << format_double(it->second) << '\n';
        }
      }
    }
  }
}

void write_boxplots_csv(const std::filesystem::path& path, const GridAggregates& agg) {
  auto out = open_out(path);
  out << "scope,detector,family,group,min,q1,median,q3,max\n";
  auto emit = [&](const char* scope, const std::string& det, const std::string& family,
                  const std::string& group, const BoxplotStats& b) {
    out << scope << ',' << det << ',' << family << ',' << group << ',' << format_double(b.min)
        << ',' << format_double(b.q1) << ',' << format_double(b.median) << ','
        << format_double(b.q3) << ',' << format_double(b.max) << '\n';
  };
  for (const auto& [det, groups] : agg.group_boxplots) {
    for (const auto& [group, stats] : groups) emit("overall", det, "all", group, stats);
  }
  for (const auto& [det, families] : agg.family_group_boxplots) {
    for (const auto& [family, groups] : families) {
      for (const auto& [group, stats] : groups) emit("family", det, family, group, stats);
    }
  }
}

void write_retraining_csv(const std::filesystem::path& path,
                          std::span<const RetrainingRow> rows) {
  auto out = open_out(path);
  out << "detector_type,recall_normal,recall_adversarial\n";
  for (const auto& row : rows) {
    out << row.detector_type << ',' << format_double(row.recall_normal) << ','
        << format_double(row.recall_adversarial) << '\n';
  }
}

void write_removal_csv(const std::filesystem::path& path, std::span<const RemovalRow> rows) {
  auto out = open_out(path);
  out << "detector_type,f1,precision,recall\n";
  for (const auto& row : rows) {
    out << row.detector_type << ',' << format_metric(row.metrics.f1) << ','
        << format_metric(row.metrics.precision) << ',' << format_metric(row.metrics.recall)
        << '\n';
  }
}

void write_summary_json(const std::filesystem::path& path,
                        std::span<const eval::NormalRow> normal_rows,
                        const GridAggregates* grid_aggregates,
                        std::span<const RetrainingRow> retraining_rows,
                        std::span<const RemovalRow> removal_rows) {
  nlohmann::json j;

  j["normal"] = nlohmann::json::array();
  for (const auto& row : normal_rows) {
    nlohmann::json r = metrics_json(row.metrics);
    r["family"] = row.family;
    r["detector"] = row.detector;
    j["normal"].push_back(std::move(r));
  }

  if (grid_aggregates != nullptr) {
    const auto& agg = *grid_aggregates;
    nlohmann::json g;
    g["by_family"] = agg.by_family;
    g["by_group"] = agg.by_group;
    g["by_step"] = agg.by_step;
    g["step_dispersion"] = agg.step_dispersion;
    for (const auto& [det, groups] : agg.group_boxplots) {
      for (const auto& [group, stats] : groups) {
        g["group_boxplots"][det][group] = boxplot_json(stats);
      }
    }
    j["adversarial_grid"] = std::move(g);
  }

  j["retraining"] = nlohmann::json::array();
  for (const auto& row : retraining_rows) {
    j["retraining"].push_back({{"detector_type", row.detector_type},
                               {"recall_normal", row.recall_normal},
                               {"recall_adversarial", row.recall_adversarial}});
  }

  j["feature_removal"] = nlohmann::json::array();
  for (const auto& row : removal_rows) {
    nlohmann::json r = metrics_json(row.metrics);
    r["detector_type"] = row.detector_type;
    j["feature_removal"].push_back(std::move(r));
  }

  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace flowforest::report
