#include "casc/experiment/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace casc {

RunMetrics metrics_from(const Confusion& c) {
  RunMetrics m;
  m.confusion = c;
  m.precision = c.tp + c.fp > 0
                    ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                    : 0.0;
  m.recall = c.tp + c.fn > 0
                 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                 : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

namespace {
std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  bool all_equal = true;
  double ss = 0.0;
  for (double x : xs) {
    all_equal &= x == xs.front();
    ss += (x - mean) * (x - mean);
  }
  if (all_equal) return {xs.front(), 0.0};  // deterministic runs: exactly 0
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}
}  // namespace

EvalReport aggregate_runs(const std::vector<RunMetrics>& runs, bool partial) {
  EvalReport rep;
  rep.runs = runs;
  rep.partial = partial;
  std::vector<double> p, r, f;
  for (const auto& m : runs) {
    p.push_back(m.precision);
    r.push_back(m.recall);
    f.push_back(m.f1);
  }
  std::tie(rep.mean_precision, rep.std_precision) = mean_std(p);
  std::tie(rep.mean_recall, rep.std_recall) = mean_std(r);
  std::tie(rep.mean_f1, rep.std_f1) = mean_std(f);
  return rep;
}

void write_eval_csv(const std::string& path, const std::string& dataset_name,
                    const std::vector<ModelReportRow>& rows) {
  std::ofstream os(path);
  require(os.good(), "write_eval_csv: cannot open " + path);
  os << "model,dataset,metric,mean,std\n";
  char buf[128];
  for (const auto& row : rows) {
    const auto& r = row.report;
    const struct { const char* name; double mean, sd; } metrics[] = {
        {"precision", r.mean_precision, r.std_precision},
        {"recall", r.mean_recall, r.std_recall},
        {"f1", r.mean_f1, r.std_f1},
    };
    for (const auto& m : metrics) {
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f", m.mean, m.sd);
      os << row.model << ',' << dataset_name << ',' << m.name << ',' << buf << '\n';
    }
  }
  require(os.good(), "write_eval_csv: write failed for " + path);
}

void write_eval_markdown(const std::string& path,
                         const std::string& dataset_name,
                         const std::vector<ModelReportRow>& rows) {
  std::ofstream os(path);
  require(os.good(), "write_eval_markdown: cannot open " + path);
  os << "## Test-set results: " << dataset_name << "\n\n";
  os << "| Model | P | F1 | R |\n";
  os << "|-------|---|----|---|\n";
  char buf[64];
  auto cell = [&](double mean, double sd) {
    std::string s;
    std::snprintf(buf, sizeof(buf), "%.2f", mean);
    s = buf;
    // matching the published convention, deviations under 0.01 are omitted
    if (sd >= 0.005) {
      std::snprintf(buf, sizeof(buf), " ± %.2f", sd);
      s += buf;
    }
    return s;
  };
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << "| " << row.model << " | " << cell(r.mean_precision, r.std_precision)
       << " | " << cell(r.mean_f1, r.std_f1) << " | "
       << cell(r.mean_recall, r.std_recall) << " |";
    if (r.partial) os << " (partial)";
    os << '\n';
  }
  require(os.good(), "write_eval_markdown: write failed for " + path);
}

std::vector<ModelReportRow> load_eval_csv(const std::string& path,
                                          std::string* dataset_name) {
  std::ifstream is(path);
  require(is.good(), "load_eval_csv: cannot open " + path);
  std::string line;
  std::getline(is, line);  // header
  std::vector<std::string> order;
  std::map<std::string, EvalReport> by_model;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string model, dataset, metric, mean_s, std_s;
    std::getline(ss, model, ',');
    std::getline(ss, dataset, ',');
    std::getline(ss, metric, ',');
    std::getline(ss, mean_s, ',');
    std::getline(ss, std_s, ',');
    if (dataset_name) *dataset_name = dataset;
    if (!by_model.count(model)) order.push_back(model);
    auto& rep = by_model[model];
    const double mean = std::stod(mean_s);
    const double sd = std::stod(std_s);
    if (metric == "precision") {
      rep.mean_precision = mean;
      rep.std_precision = sd;
    } else if (metric == "recall") {
      rep.mean_recall = mean;
      rep.std_recall = sd;
    } else if (metric == "f1") {
      rep.mean_f1 = mean;
      rep.std_f1 = sd;
    }
  }
  std::vector<ModelReportRow> rows;
  for (const auto& m : order) rows.push_back({m, by_model[m]});
  return rows;
}

}  // namespace casc
