#include "pfnts/coverage.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "pfnts/conjugate_linear.hpp"
#include "pfnts/errors.hpp"
#include "pfnts/normal.hpp"

namespace pfnts {

IntervalRule subclt_interval_rule(double base, double level, double v_floor) {
  return [=](PredictiveModel& model, std::size_t n, const Vector& q) {
    return interval(subclt_estimate(model, n, q, base), level, v_floor);
  };
}

IntervalRule exact_posterior_rule(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ParamError("interval level must lie in (0, 1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  return [=](PredictiveModel& model, std::size_t n, const Vector& q) {
    auto* conj = dynamic_cast<ConjugateLinearModel*>(&model);
    if (conj == nullptr) throw ParamError("exact posterior intervals need a ConjugateLinearModel");
    const double m = conj->predict_mean(q, n);
    const double half = z * std::sqrt(conj->posterior_var(q, n));
    return Interval{m - half, m + half};
  };
}

CoverageResult coverage_diagnostic(const ProblemFactory& problems, const ModelFactory& models,
                                   const IntervalRule& rule, const CoverageConfig& config,
                                   const SeedSpec& seed) {
  CoverageResult result;
  for (std::size_t n : config.sizes) {
    CoverageSummary summary;
    summary.n = n;
    std::size_t count = 0;
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
      const SeedSpec cell = seed.child("size", n).child("rep", rep);
      const RegressionProblem problem = problems(cell.child("problem", 0));
      Rng rng(cell.child("data", 0));

      auto model = models(problem.dim);
      std::vector<Sample> train;
      train.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        Vector x = problem.sample_x(rng);
        const double y = problem.latent_mean(x) + problem.noise_sd * rng.normal();
        train.push_back({std::move(x), y});
      }
      model->fit_append(train);

      for (std::size_t q = 0; q < config.queries; ++q) {
        const Vector x = problem.sample_x(rng);
        const Interval iv = rule(*model, n, x);
        CoverageRow row{config.dgp_name, n, rep, q, iv.contains(problem.latent_mean(x)), iv.length()};
        summary.coverage += row.covered ? 1.0 : 0.0;
        summary.mean_length += row.length;
        ++count;
        result.rows.push_back(std::move(row));
      }
    }
    if (count > 0) {
      summary.coverage /= static_cast<double>(count);
      summary.mean_length /= static_cast<double>(count);
    }
    result.summary.push_back(summary);
  }
  return result;
}

void write_coverage_csv(std::ostream& out, const std::vector<CoverageRow>& rows) {
  out << "dgp,n,rep,query_id,covered,length\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.dgp << ',' << r.n << ',' << r.rep << ',' << r.query_id << ',' << (r.covered ? 1 : 0) << ','
        << r.length << '\n';
  }
}

}  // namespace pfnts
