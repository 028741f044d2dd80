#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pfnts/predictive_model.hpp"
#include "pfnts/random.hpp"
#include "pfnts/subclt.hpp"

namespace pfnts {

// An offline regression problem with a known latent mean f0.
struct RegressionProblem {
  std::size_t dim = 0;
  std::function<Vector(Rng&)> sample_x;
  std::function<double(const Vector&)> latent_mean;
  double noise_sd = 0.0;
};

// Builds a fresh problem (fresh parameters) for one (size, replication) cell.
using ProblemFactory = std::function<RegressionProblem(const SeedSpec&)>;

// Interval for f0(query) from a model holding n observations.
using IntervalRule = std::function<Interval(PredictiveModel& model, std::size_t n, const Vector& query)>;

IntervalRule subclt_interval_rule(double base, double level, double v_floor);
// Exact Gaussian posterior of q'beta; the model must be a ConjugateLinearModel.
IntervalRule exact_posterior_rule(double level);

struct CoverageConfig {
  std::string dgp_name;
  std::vector<std::size_t> sizes{16, 64, 256, 1024};
  std::size_t reps = 10;
  std::size_t queries = 50;
};

struct CoverageRow {
  std::string dgp;
  std::size_t n = 0;
  std::size_t rep = 0;
  std::size_t query_id = 0;
  bool covered = false;
  double length = 0.0;
};

struct CoverageSummary {
  std::size_t n = 0;
  double coverage = 0.0;
  double mean_length = 0.0;
};

struct CoverageResult {
  std::vector<CoverageRow> rows;
  std::vector<CoverageSummary> summary;  // one entry per size, in config order
};

// For every size and replication: draw a fresh problem, a training set of
// that size and held-out queries, fit a fresh model, and score whether each
// interval covers f0(query).
CoverageResult coverage_diagnostic(const ProblemFactory& problems, const ModelFactory& models,
                                   const IntervalRule& rule, const CoverageConfig& config,
                                   const SeedSpec& seed);

// Header: dgp,n,rep,query_id,covered,length
void write_coverage_csv(std::ostream& out, const std::vector<CoverageRow>& rows);

}  // namespace pfnts
