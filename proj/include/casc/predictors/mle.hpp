#pragma once

#include <array>
#include <string>
#include <vector>

#include "casc/common.hpp"
#include "casc/slicing.hpp"

namespace casc {

// Per-user conditional probability table: p[u][b] estimates
// Pr[reacts next window | was active this window = b], fitted by counting.
class MlePredictor {
 public:
  MlePredictor() = default;
  explicit MlePredictor(Index n_users);

  Index n_users() const { return static_cast<Index>(prob_.size()); }

  // counts[u][b][a]: occurrences of input bit b followed by target bit a.
  std::int64_t count(Index u, int b, int a) const { return counts_[u][b][a]; }
  double prob(Index u, int b) const { return prob_[u][b]; }

  void accumulate(const BinVec& input, const BinVec& target);
  void finalize();  // derive probabilities; unseen condition -> 0

  // 1 iff p[u][tau_u] >= 0.5 (ties round up).
  BinVec predict(const BinVec& tau) const;

  void save_csv(const std::string& path,
                const std::vector<std::string>& users) const;
  static MlePredictor load_csv(const std::string& path,
                               std::vector<std::string>* users = nullptr);

 private:
  std::vector<std::array<std::array<std::int64_t, 2>, 2>> counts_;
  std::vector<std::array<double, 2>> prob_;
};

// Counts over the supervision pairs in `range`.
MlePredictor mle_fit(const SliceDataset& ds, const PairRange& range);

}  // namespace casc
