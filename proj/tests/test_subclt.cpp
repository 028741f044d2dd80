#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "pfnts/conjugate_linear.hpp"
#include "pfnts/coverage.hpp"
#include "pfnts/errors.hpp"
#include "pfnts/subclt.hpp"
#include "support/oracles.hpp"
#include "support/stub_model.hpp"

using namespace pfnts;

namespace {

// Grid by the stated iteration, written out independently.
std::vector<std::size_t> iterate_grid(std::size_t n, double b) {
  std::vector<std::size_t> pts;
  for (std::size_t t = 2; t <= n;) {
    pts.push_back(t);
    t = std::max(t + 1, static_cast<std::size_t>(std::floor(b * static_cast<double>(t))));
  }
  return pts;
}

}  // namespace

TEST_CASE("geometric_grid examples") {
  CHECK(geometric_grid(10, 2).points == std::vector<std::size_t>{2, 4, 8});
  CHECK(geometric_grid(100, 3).points == std::vector<std::size_t>{2, 6, 18, 54});
  CHECK(geometric_grid(20, 1.5).points == std::vector<std::size_t>{2, 3, 4, 6, 9, 13, 19});
  CHECK(geometric_grid(4, 2).points == std::vector<std::size_t>{2, 4});
  CHECK(geometric_grid(3, 1.5).points == std::vector<std::size_t>{2, 3});
  CHECK_THROWS_AS(geometric_grid(3, 2), GridTooShort);
  CHECK_THROWS_AS(geometric_grid(1, 1.5), GridTooShort);
  CHECK_THROWS_AS(geometric_grid(100, 1.0), ParamError);
  CHECK(min_grid_history(2.0) == 4);
  CHECK(min_grid_history(1.5) == 3);
  CHECK(is_grid_point(8, 2.0));
  CHECK_FALSE(is_grid_point(6, 2.0));
  CHECK(next_grid_point(9, 1.5) == 13);
}

TEST_CASE("geometric_grid is exact for every n up to 10^4") {
  for (double b : {1.5, 2.0, 3.0}) {
    for (std::size_t n = 4; n <= 10000; ++n) {
      const auto want = iterate_grid(n, b);
      if (want.size() < 2) {
        // b = 3 with n in {4, 5}: only t0 = 2 fits
        REQUIRE_THROWS_AS(geometric_grid(n, b), GridTooShort);
        continue;
      }
      const auto g = geometric_grid(n, b);
      REQUIRE(g.points == want);
      REQUIRE(g.points.front() == 2);
      REQUIRE(g.last() <= n);
      REQUIRE(std::max(g.last() + 1, static_cast<std::size_t>(std::floor(b * static_cast<double>(g.last())))) > n);
    }
  }
}

TEST_CASE("block_weights") {
  CHECK(block_weights(geometric_grid(10, 2)) == std::vector<double>{4, 8});
  GeometricGrid g{2.0, {2, 3}};
  CHECK(block_weights(g) == std::vector<double>{6});
  GeometricGrid consecutive{1.5, {7, 8}};
  CHECK(block_weights(consecutive) == std::vector<double>{56});
  for (std::size_t n : {50u, 999u, 4096u}) {
    const auto grid = geometric_grid(n, 1.5);
    const auto w = block_weights(grid);
    REQUIRE(w.size() == grid.blocks());
    for (std::size_t j = 1; j < grid.points.size(); ++j) {
      const double a = static_cast<double>(grid.points[j - 1]), b = static_cast<double>(grid.points[j]);
      CHECK(w[j - 1] == b * a / (b - a));
    }
  }
}

TEST_CASE("subclt_estimate on a scripted model") {
  std::map<std::size_t, double> m{{2, 1.0}, {4, 0.8}, {8, 0.7}};
  StubModel model([&](std::size_t i, const Vector&) { return m.count(i) ? m[i] : 99.0; });
  model.fill(8);
  const auto est = subclt_estimate(model, 8, Vector(), 2.0);
  CHECK(est.vhat == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(est.mean == 0.7);
  CHECK(est.refresh == 8);
  CHECK(est.grid.points == std::vector<std::size_t>{2, 4, 8});
  CHECK(model.has_snapshot(2));
  CHECK(model.has_snapshot(4));
  CHECK(model.has_snapshot(8));

  // second call reuses every snapshot
  const auto builds = model.builds();
  subclt_estimate(model, 8, Vector(), 2.0);
  CHECK(model.builds() == builds);

  StubModel constant([](std::size_t, const Vector&) { return 3.5; });
  constant.fill(100);
  const auto flat = subclt_estimate(constant, 100, Vector(), 2.0);
  CHECK(flat.vhat == 0.0);
  CHECK(flat.mean == 3.5);
  CHECK(flat.refresh == 64);

  StubModel tiny([](std::size_t, const Vector&) { return 0.0; });
  tiny.fill(3);
  CHECK_THROWS_AS(subclt_estimate(tiny, 3, Vector(), 2.0), GridTooShort);
  CHECK_THROWS_AS(subclt_estimate(tiny, 10, Vector(), 2.0), PrefixError);
}

TEST_CASE("V-hat ignores observations past the last refresh point") {
  Rng rng(5);
  ConjugateLinearModel m(2, {1.0, 1.0});
  std::vector<Sample> rows(127);
  for (auto& s : rows) {
    s.x = Vector(2);
    s.x << rng.uniform(), rng.uniform();
    s.y = rng.normal();
  }
  m.fit_append(std::span<const Sample>(rows).first(64));
  const Vector q = Vector::Ones(2);
  const auto a = subclt_estimate(m, 64, q, 2.0);
  m.fit_append(std::span<const Sample>(rows).subspan(64, 63));
  for (std::size_t n : {64u, 80u, 127u}) {
    const auto b = subclt_estimate(m, n, q, 2.0);
    CHECK(b.vhat == a.vhat);
    CHECK(b.mean == a.mean);
    CHECK(b.refresh == 64);
  }
  CHECK(a.vhat >= 0.0);
}

TEST_CASE("stride-1 limit matches the all-prefix estimator") {
  // Base just above 1 makes every prefix a grid point for n < 10^4, so the
  // estimator must reduce to the average over consecutive increments.
  Rng rng(9);
  std::vector<double> means(400);
  for (auto& v : means) v = rng.normal();
  StubModel model([&](std::size_t i, const Vector&) { return means[i]; });
  model.fill(300);
  const auto est = subclt_estimate(model, 300, Vector(), 1.00001);
  double sum = 0.0;
  for (std::size_t t = 2; t < 300; ++t) {
    const double d = means[t + 1] - means[t];
    sum += static_cast<double>(t) * static_cast<double>(t + 1) * d * d;
  }
  CHECK(est.grid.points.size() == 299);
  CHECK(est.vhat == doctest::Approx(sum / 298.0).epsilon(1e-12));
}

TEST_CASE("subsampled and all-prefix estimators target the same variance") {
  const std::size_t d = 3, n = 1024;
  std::vector<double> sub_ratio, full_ratio;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(SeedSpec::root(seed).child("stride", 0));
    Vector beta(3), q(3);
    for (Eigen::Index j = 0; j < 3; ++j) {
      beta(j) = rng.normal();
      q(j) = rng.uniform();
    }
    ConjugateLinearModel m(d, {1.0, 0.25});
    for (std::size_t i = 0; i < n; ++i) {
      Vector x(3);
      for (Eigen::Index j = 0; j < 3; ++j) x(j) = rng.uniform();
      m.fit_append(Sample{x, x.dot(beta) + rng.normal(0.0, 0.5)});
    }
    const auto sub = subclt_estimate(m, n, q, 2.0);
    sub_ratio.push_back(sub.vhat / (static_cast<double>(sub.refresh) * m.posterior_var(q, sub.refresh)));
    const auto full = subclt_estimate(m, n, q, 1.00001);
    full_ratio.push_back(full.vhat / (static_cast<double>(full.refresh) * m.posterior_var(q, full.refresh)));
  }
  const double sub_med = oracle::quantile(sub_ratio, 0.5), full_med = oracle::quantile(full_ratio, 0.5);
  CHECK(sub_med > 0.5);
  CHECK(sub_med < 2.0);
  CHECK(full_med > 0.8);
  CHECK(full_med < 1.25);
  // the all-prefix version averages many more blocks
  CHECK(oracle::quantile(full_ratio, 0.75) - oracle::quantile(full_ratio, 0.25) <
        oracle::quantile(sub_ratio, 0.75) - oracle::quantile(sub_ratio, 0.25));
}

TEST_CASE("thompson_draw") {
  SubCltEstimate est{1.25, 0.0, 16, geometric_grid(16, 2)};
  Rng rng(1);
  CHECK(thompson_draw(est, 0.0, rng) == 1.25);

  est.vhat = 3.0;
  Rng a(SeedSpec::root(42).child("draw", 0)), b(SeedSpec::root(42).child("draw", 0));
  CHECK(thompson_draw(est, 0.0, a) == thompson_draw(est, 0.0, b));

  for (auto [vhat, floor] : {std::pair{3.0, 0.0}, std::pair{0.01, 0.5}}) {
    est.vhat = vhat;
    const double want = std::max(vhat, floor) / 16.0;
    CHECK(sampling_variance(est, floor) == want);
    Rng r(77);
    double s = 0.0, ss = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double x = thompson_draw(est, floor, r);
      s += x;
      ss += x * x;
    }
    const double mean = s / n, var = ss / n - mean * mean;
    CHECK(var == doctest::Approx(want).epsilon(0.03));
  }
}

TEST_CASE("interval") {
  SubCltEstimate est{2.0, 0.0, 16, geometric_grid(16, 2)};
  auto iv = interval(est, 0.95, 0.0);
  CHECK(iv.lo == 2.0);
  CHECK(iv.hi == 2.0);

  est.vhat = 16.0;  // V/s = 1
  iv = interval(est, 0.95, 0.0);
  const double z = oracle::quantile_bisect(0.975);
  CHECK(iv.hi - 2.0 == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(std::abs((iv.hi - 2.0) - z) < 1e-9);
  CHECK(std::abs((2.0 - iv.lo) - z) < 1e-9);

  SubCltEstimate wider = est;
  wider.refresh = 64;
  CHECK(interval(wider, 0.95, 0.0).length() == doctest::Approx(iv.length() / 2.0));
  CHECK_THROWS_AS(interval(est, 0.0, 0.0), ParamError);
  CHECK_THROWS_AS(interval(est, 1.0, 0.0), ParamError);
  CHECK(interval(est, 0.5, 0.0).hi >= interval(est, 0.5, 0.0).lo);
}

namespace {

// Linear problem drawn from the conjugate model's own prior.
ProblemFactory prior_linear(std::size_t d, double s2) {
  return [d, s2](const SeedSpec& seed) {
    Rng rng(seed);
    auto beta = std::make_shared<Vector>(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < beta->size(); ++j) (*beta)(j) = rng.normal();
    RegressionProblem p;
    p.dim = d;
    p.sample_x = [d](Rng& r) {
      Vector x(static_cast<Eigen::Index>(d));
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = r.uniform();
      return x;
    };
    p.latent_mean = [beta](const Vector& x) { return x.dot(*beta); };
    p.noise_sd = std::sqrt(s2);
    return p;
  };
}

}  // namespace

TEST_CASE("coverage: exact posterior intervals are calibrated") {
  const ModelFactory models = [](std::size_t d) { return std::make_unique<ConjugateLinearModel>(d, ConjugateLinearModel::Params{1.0, 0.25}); };
  CoverageConfig cfg{"prior-linear", {256}, 50, 20};
  const auto res = coverage_diagnostic(prior_linear(5, 0.25), models, exact_posterior_rule(0.95), cfg, SeedSpec::root(42));
  REQUIRE(res.summary.size() == 1);
  CHECK(res.summary[0].n == 256);
  CHECK(res.summary[0].coverage >= 0.93);
  CHECK(res.summary[0].coverage <= 0.97);
  CHECK(res.rows.size() == 50 * 20);
}

TEST_CASE("coverage: exact interpolation gives full coverage") {
  ProblemFactory constant = [](const SeedSpec&) {
    RegressionProblem p;
    p.dim = 0;
    p.sample_x = [](Rng&) { return Vector(); };
    p.latent_mean = [](const Vector&) { return 1.5; };
    p.noise_sd = 0.0;
    return p;
  };
  const ModelFactory models = [](std::size_t) {
    return std::make_unique<StubModel>([](std::size_t, const Vector&) { return 1.5; });
  };
  CoverageConfig cfg{"constant", {16, 64}, 5, 10};
  const auto res = coverage_diagnostic(constant, models, subclt_interval_rule(2.0, 0.95, 0.0), cfg, SeedSpec::root(1));
  for (const auto& s : res.summary) CHECK(s.coverage == 1.0);
}

TEST_CASE("coverage: SubCLT interval lengths shrink with n") {
  const ModelFactory models = [](std::size_t d) { return std::make_unique<ConjugateLinearModel>(d, ConjugateLinearModel::Params{1.0, 0.25}); };
  CoverageConfig cfg{"prior-linear", {16, 64, 256, 1024}, 20, 10};
  const auto res = coverage_diagnostic(prior_linear(5, 0.25), models, subclt_interval_rule(2.0, 0.95, 1e-8), cfg, SeedSpec::root(3));
  REQUIRE(res.summary.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) CHECK(res.summary[i].mean_length < res.summary[i - 1].mean_length);

  std::ostringstream csv;
  write_coverage_csv(csv, res.rows);
  std::istringstream in(csv.str());
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "dgp,n,rep,query_id,covered,length");
  CHECK(first.rfind("prior-linear,16,0,0,", 0) == 0);
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines + 1 == res.rows.size());

  // reproducible under the same seed
  const auto again = coverage_diagnostic(prior_linear(5, 0.25), models, subclt_interval_rule(2.0, 0.95, 1e-8), cfg, SeedSpec::root(3));
  std::ostringstream csv2;
  write_coverage_csv(csv2, again.rows);
  CHECK(csv.str() == csv2.str());
}
