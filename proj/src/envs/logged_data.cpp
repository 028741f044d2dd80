#include "pfnts/logged_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pfnts/classification.hpp"
#include "pfnts/errors.hpp"

namespace pfnts::envs {

EngagementDgp EngagementDgp::sample(Rng& rng, std::size_t arms, std::size_t covariates) {
  EngagementDgp dgp;
  dgp.arms = arms;
  dgp.covariates = covariates;
  for (std::size_t a = 0; a < arms; ++a) {
    dgp.intercept.push_back(rng.normal(-0.5, 0.5));
    Vector s(covariates);
    for (Eigen::Index j = 0; j < s.size(); ++j) s(j) = rng.normal();
    dgp.slope.push_back(std::move(s));
    dgp.day_effect.push_back(rng.normal(0.0, 0.5));
  }
  return dgp;
}

double EngagementDgp::mean(const Vector& c, double day_fraction, double user_effect, std::size_t arm) const {
  const double z = intercept[arm] + slope[arm].dot(c) + day_effect[arm] * day_fraction + user_effect;
  return 1.0 / (1.0 + std::exp(-z));
}

LoggedDataset generate_logged_data(const EngagementDgp& dgp, std::span<const double> propensities,
                                   std::size_t n_users, std::size_t days, Rng& rng, bool user_onehot) {
  if (propensities.size() != dgp.arms) throw ParamError("one propensity per arm required");
  double total = 0.0;
  for (double p : propensities) {
    if (!(p >= 0.0)) throw ParamError("propensities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParamError("propensities must sum to 1");

  std::vector<Vector> covs(n_users, Vector(dgp.covariates));
  std::vector<double> effects(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    for (Eigen::Index j = 0; j < covs[u].size(); ++j) covs[u](j) = rng.uniform();
    effects[u] = rng.normal(0.0, dgp.user_sd);
  }

  const auto p = static_cast<Eigen::Index>(dgp.covariates + 1 + (user_onehot ? n_users : 0));
  LoggedDataset out;
  out.num_arms = dgp.arms;
  out.decisions.reserve(n_users * days);
  out.true_means.reserve(n_users * days);
  for (std::size_t d = 1; d <= days; ++d) {
    const double frac = static_cast<double>(d) / static_cast<double>(days);
    for (std::size_t u = 0; u < n_users; ++u) {
      LoggedDecision dec;
      dec.context = Vector::Zero(p);
      dec.context.head(covs[u].size()) = covs[u];
      dec.context(covs[u].size()) = frac;
      if (user_onehot) dec.context(covs[u].size() + 1 + static_cast<Eigen::Index>(u)) = 1.0;
      dec.action = rng.categorical(propensities);
      dec.propensity.assign(propensities.begin(), propensities.end());
      std::vector<double> means(dgp.arms);
      for (std::size_t a = 0; a < dgp.arms; ++a) means[a] = dgp.mean(covs[u], frac, effects[u], a);
      dec.reward = rng.bernoulli(means[dec.action]) ? 1.0 : 0.0;
      dec.cluster = static_cast<std::int64_t>(u);
      out.decisions.push_back(std::move(dec));
      out.true_means.push_back(std::move(means));
    }
  }
  return out;
}

void write_logged_csv(const std::filesystem::path& path, std::span<const LoggedDecision> log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  const std::size_t p = log.empty() ? 0 : static_cast<std::size_t>(log.front().context.size());
  const std::size_t k = log.empty() ? 0 : log.front().propensity.size();
  out << "cluster_id,t";
  for (std::size_t j = 0; j < p; ++j) out << ",x" << j;
  out << ",action";
  for (std::size_t a = 0; a < k; ++a) out << ",propensity_" << a;
  out << ",reward\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& d = log[i];
    out << d.cluster << ',' << (i + 1);
    for (Eigen::Index j = 0; j < d.context.size(); ++j) out << ',' << d.context(j);
    out << ',' << d.action;
    for (double q : d.propensity) out << ',' << q;
    out << ',' << d.reward << '\n';
  }
}

namespace {

double number(const std::string& cell, std::size_t row, const std::string& col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(row, col, "non-numeric value '" + cell + "'");
  }
  return v;
}

}  // namespace

std::vector<LoggedDecision> read_logged_csv(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const std::size_t cluster = table.column("cluster_id");
  const std::size_t t_col = table.column("t");
  const std::size_t action = table.column("action");
  const std::size_t reward = table.column("reward");
  if (cluster != 0 || t_col != 1 || action < t_col) throw SchemaError("unexpected logged-data column order");
  std::vector<std::size_t> prop_cols;
  for (std::size_t a = 0;; ++a) {
    const auto name = "propensity_" + std::to_string(a);
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) break;
    prop_cols.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  if (prop_cols.empty()) throw SchemaError("missing column 'propensity_0'");
  const std::size_t k = prop_cols.size();

  std::vector<LoggedDecision> log;
  log.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    LoggedDecision d;
    d.cluster = static_cast<std::int64_t>(number(row[cluster], r + 1, "cluster_id"));
    d.context = Vector(static_cast<Eigen::Index>(action - t_col - 1));
    for (std::size_t j = t_col + 1; j < action; ++j) {
      d.context(static_cast<Eigen::Index>(j - t_col - 1)) = number(row[j], r + 1, table.header[j]);
    }
    const double a = number(row[action], r + 1, "action");
    if (a < 0 || a >= static_cast<double>(k) || a != std::floor(a)) {
      throw ParseError(r + 1, "action", "action outside 0..K-1");
    }
    d.action = static_cast<std::size_t>(a);
    for (std::size_t c : prop_cols) d.propensity.push_back(number(row[c], r + 1, table.header[c]));
    d.reward = number(row[reward], r + 1, "reward");
    log.push_back(std::move(d));
  }
  return log;
}

}  // namespace pfnts::envs
