#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "casc/common.hpp"
#include "casc/slicing.hpp"

namespace casc {

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
};

// Micro-averaged positive-class metrics; conventions: P (R) is 0 when its
// denominator is 0, F1 is 0 when P + R = 0.
struct RunMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
};

RunMetrics metrics_from(const Confusion& c);

// Prediction quality over the supervision pairs in `range`; every
// (slice, user) cell counts exactly once. `predict` maps the binary input
// window to a binary prediction of the next reaction window.
template <typename PredictFn>
RunMetrics evaluate(PredictFn&& predict, const SliceDataset& ds,
                    const PairRange& range) {
  require(range.begin < range.end, "evaluate: empty test range");
  require(range.end < ds.n_slices(), "evaluate: range beyond last pair");
  Confusion c;
  for (Index p = range.begin; p < range.end; ++p) {
    const BinVec tau = ds.inputs.row(p).transpose();
    const BinVec pred = predict(tau);
    require(pred.size() == ds.n_users(), "evaluate: prediction size mismatch");
    for (Index u = 0; u < ds.n_users(); ++u) {
      const bool truth = ds.targets(p + 1, u) != 0;
      const bool hat = pred[u] != 0;
      if (hat && truth) ++c.tp;
      else if (hat && !truth) ++c.fp;
      else if (!hat && truth) ++c.fn;
      else ++c.tn;
    }
  }
  return metrics_from(c);
}

// Mean and sample standard deviation (n-1) across repeated runs.
struct EvalReport {
  std::vector<RunMetrics> runs;
  double mean_precision = 0.0, std_precision = 0.0;
  double mean_recall = 0.0, std_recall = 0.0;
  double mean_f1 = 0.0, std_f1 = 0.0;
  bool partial = false;  // set when some runs aborted
};

EvalReport aggregate_runs(const std::vector<RunMetrics>& runs, bool partial = false);

struct ModelReportRow {
  std::string model;
  EvalReport report;
};

// CSV rows (model, dataset, metric, mean, std) and a Markdown table with
// one row per model and P / F1 / R columns.
void write_eval_csv(const std::string& path, const std::string& dataset_name,
                    const std::vector<ModelReportRow>& rows);
void write_eval_markdown(const std::string& path,
                         const std::string& dataset_name,
                         const std::vector<ModelReportRow>& rows);
std::vector<ModelReportRow> load_eval_csv(const std::string& path,
                                          std::string* dataset_name = nullptr);

}  // namespace casc
