#include "casc/predictors/mle.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace casc {

MlePredictor::MlePredictor(Index n_users)
    : counts_(static_cast<std::size_t>(n_users), {{{0, 0}, {0, 0}}}),
      prob_(static_cast<std::size_t>(n_users), {0.0, 0.0}) {}

void MlePredictor::accumulate(const BinVec& input, const BinVec& target) {
  require(input.size() == n_users() && target.size() == n_users(),
          "MlePredictor::accumulate: size mismatch");
  for (Index u = 0; u < input.size(); ++u)
    counts_[static_cast<std::size_t>(u)][input[u] ? 1 : 0][target[u] ? 1 : 0]++;
}

void MlePredictor::finalize() {
  for (std::size_t u = 0; u < counts_.size(); ++u) {
    for (int b = 0; b < 2; ++b) {
      const std::int64_t denom = counts_[u][b][0] + counts_[u][b][1];
      prob_[u][b] = denom > 0 ? static_cast<double>(counts_[u][b][1]) /
                                    static_cast<double>(denom)
                              : 0.0;
    }
  }
}

BinVec MlePredictor::predict(const BinVec& tau) const {
  require(tau.size() == n_users(), "MlePredictor::predict: size mismatch");
  BinVec out(tau.size());
  for (Index u = 0; u < tau.size(); ++u)
    out[u] = prob_[static_cast<std::size_t>(u)][tau[u] ? 1 : 0] >= 0.5 ? 1 : 0;
  return out;
}

void MlePredictor::save_csv(const std::string& path,
                            const std::vector<std::string>& users) const {
  require(static_cast<Index>(users.size()) == n_users(),
          "MlePredictor::save_csv: user list mismatch");
  std::ofstream os(path);
  require(os.good(), "MlePredictor::save_csv: cannot open " + path);
  os << "user,b,count0,count1,p\n";
  char buf[64];
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (int b = 0; b < 2; ++b) {
      std::snprintf(buf, sizeof(buf), "%.17g", prob_[u][b]);
      os << users[u] << ',' << b << ',' << counts_[u][b][0] << ','
         << counts_[u][b][1] << ',' << buf << '\n';
    }
  }
  require(os.good(), "MlePredictor::save_csv: write failed for " + path);
}

MlePredictor MlePredictor::load_csv(const std::string& path,
                                    std::vector<std::string>* users) {
  std::ifstream is(path);
  require(is.good(), "MlePredictor::load_csv: cannot open " + path);
  std::string line;
  std::getline(is, line);  // header
  std::vector<std::string> ids;
  std::vector<std::array<std::array<std::int64_t, 2>, 2>> counts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, b_s, c0_s, c1_s, p_s;
    std::getline(ss, id, ',');
    std::getline(ss, b_s, ',');
    std::getline(ss, c0_s, ',');
    std::getline(ss, c1_s, ',');
    std::getline(ss, p_s, ',');
    const int b = std::stoi(b_s);
    require(b == 0 || b == 1, "MlePredictor::load_csv: bad condition bit");
    if (ids.empty() || ids.back() != id) {
      ids.push_back(id);
      counts.push_back({{{0, 0}, {0, 0}}});
    }
    counts.back()[static_cast<std::size_t>(b)][0] = std::stoll(c0_s);
    counts.back()[static_cast<std::size_t>(b)][1] = std::stoll(c1_s);
  }
  MlePredictor m(static_cast<Index>(ids.size()));
  m.counts_ = std::move(counts);
  m.finalize();
  if (users) *users = std::move(ids);
  return m;
}

MlePredictor mle_fit(const SliceDataset& ds, const PairRange& range) {
  require(range.begin < range.end, "mle_fit: empty pair range");
  require(range.end < ds.n_slices(), "mle_fit: range beyond last pair");
  MlePredictor m(ds.n_users());
  for (Index p = range.begin; p < range.end; ++p)
    m.accumulate(ds.inputs.row(p).transpose(), ds.targets.row(p + 1).transpose());
  m.finalize();
  return m;
}

}  // namespace casc
