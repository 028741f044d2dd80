#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "pfnts/classification.hpp"
#include "pfnts/errors.hpp"
#include "pfnts/logged_data.hpp"
#include "pfnts/regret.hpp"
#include "pfnts/synthetic.hpp"
#include "support/oracles.hpp"

using namespace pfnts;
using namespace pfnts::envs;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> xs(std::initializer_list<double> v) { return v; }

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("friedman1") {
  CHECK(friedman1(xs({1, 0.5, 0, 1, 1})) == doctest::Approx(30.0).epsilon(1e-14));
  CHECK(friedman1(xs({0, 0.8, 0.5, 0, 0})) == 0.0);
  CHECK(friedman1(xs({0.5, 0.5, 0.5, 0.5, 0.5})) == doctest::Approx(10 * std::sin(kPi / 4) + 7.5).epsilon(1e-14));
  CHECK(friedman1(xs({0.5, 0.5, 0.5, 0.5, 0.5})) == doctest::Approx(14.5711).epsilon(1e-5));
  CHECK_THROWS_AS(friedman1(xs({1, 2, 3})), ParamError);
}

TEST_CASE("friedman2 and friedman3") {
  CHECK(friedman2(xs({0, 0, 0, 0})) == doctest::Approx(1.0 / 125.0 / (40 * kPi)).epsilon(1e-12));
  CHECK(friedman2(xs({0, 0, 0, 0})) == doctest::Approx(6.366e-5).epsilon(1e-3));
  CHECK(friedman3(xs({0, 0.5, 1, 0})) == doctest::Approx(kPi / 2 / 0.1).epsilon(1e-14));
  CHECK(friedman3(xs({0, 0.5, 1, 0})) == doctest::Approx(15.70796).epsilon(1e-6));

  // direct formula away from the singular point
  const double x1 = 0.3, x2 = 0.6, x3 = 0.2, x4 = 0.9;
  const double a = 100 * x1, b = 40 * kPi + 520 * kPi * x2, d = 1 + 10 * x4;
  const double inner = b * x3 - 1 / (b * d);
  CHECK(friedman2(xs({x1, x2, x3, x4})) == doctest::Approx(std::sqrt(a * a + inner * inner) / 125).epsilon(1e-12));
  CHECK(friedman3(xs({x1, x2, x3, x4})) == doctest::Approx(std::atan(inner / a) / 0.1).epsilon(1e-12));

  Rng rng(4);
  for (int i = 0; i < 5000; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = rng.uniform() < 0.1 ? 0.0 : rng.uniform();
    CHECK(std::isfinite(friedman1(x)));
    CHECK(std::isfinite(friedman2(x)));
    CHECK(std::isfinite(friedman3(x)));
    CHECK(friedman2(x) >= 0.0);
  }
}

TEST_CASE("arm-2 variants") {
  CHECK(arm2_mean(Arm2Variant::kShared, xs({1, 0.5, 0, 1, 1, 0.3})) == doctest::Approx(35.0).epsilon(1e-14));
  const auto pal = xs({0.2, 0.7, 0.4, 0.7, 0.2});
  CHECK(arm2_mean(Arm2Variant::kDisjoint, pal) == friedman1(pal));
  const auto x = xs({0.1, 0.2, 0.3, 0.4, 0.5});
  CHECK(arm2_mean(Arm2Variant::kDisjoint, x) == friedman1(xs({0.5, 0.4, 0.3, 0.2, 0.1})));
  std::vector<double> wide(20);
  for (std::size_t i = 0; i < 20; ++i) wide[i] = 0.05 * static_cast<double>(i);
  std::vector<double> rev(wide.rbegin(), wide.rend());
  CHECK(arm2_mean(Arm2Variant::kDisjoint, wide) == friedman1(rev));
}

TEST_CASE("built-in scenarios") {
  for (const auto& name : scenario_names()) {
    const auto spec = scenario_spec(name);
    CHECK(spec.name == name);
    SyntheticDgp dgp(spec, SeedSpec::root(42).child("rep", 0));
    CHECK(dgp.num_arms() == spec.arms);
    CHECK(dgp.dim() == spec.dim);
    for (std::size_t t = 1; t <= 20; ++t) {
      const auto x = dgp.context(t);
      CHECK(static_cast<std::size_t>(x.size()) == spec.dim);
      CHECK(x.minCoeff() >= 0.0);
      CHECK(x.maxCoeff() < 1.0);
      const auto means = dgp.arm_means(t);
      for (double m : means) CHECK(std::isfinite(m));
      CHECK(std::isfinite(dgp.reward(t, 0)));
    }
  }
  CHECK(scenario_spec("Friedman-Sparse").dim == 20);
  CHECK(scenario_spec("Friedman-Sparse-Disjoint").variant == Arm2Variant::kDisjoint);
  CHECK(scenario_spec("Linear").dim == 10);
  CHECK(scenario_spec("Linear").arms == 3);
  CHECK(scenario_spec("SynBART").dim == 4);
  CHECK(scenario_spec("SynBART").noise_variance == 0.01);
  CHECK_THROWS_AS(scenario_spec("Nope"), ConfigError);
}

TEST_CASE("sparse Friedman ignores coordinates beyond the fifth") {
  SyntheticDgp dgp(scenario_spec("Friedman-Sparse"), SeedSpec::root(1));
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    Vector x = dgp.sample_context(rng);
    Vector y = x;
    for (Eigen::Index j = 5; j < 20; ++j) y(j) = rng.uniform();
    CHECK(dgp.mean(x, 0) == dgp.mean(y, 0));
    CHECK(dgp.mean(x, 1) == dgp.mean(y, 1));
  }
}

TEST_CASE("linear DGP") {
  auto dgp = sample_linear_dgp(SeedSpec::root(7));
  auto same = sample_linear_dgp(SeedSpec::root(7));
  auto other = sample_linear_dgp(SeedSpec::root(8));
  REQUIRE(dgp.linear_coefficients().size() == 3);
  CHECK(dgp.linear_coefficients()[1] == same.linear_coefficients()[1]);
  CHECK(dgp.linear_coefficients()[1] != other.linear_coefficients()[1]);
  const Vector x = Vector::Constant(10, 0.5);
  for (std::size_t a = 0; a < 3; ++a) CHECK(dgp.mean(x, a) == doctest::Approx(dgp.linear_coefficients()[a].dot(x)));
  CHECK(dgp.noise_variance(0) == 1.0);

  // mean 0.5 for beta = e_1 at x = 0.5: the mean is linear in beta
  Vector e1 = Vector::Zero(10);
  e1(0) = 1.0;
  CHECK(e1.dot(x) == 0.5);

  Rng rng(11);
  double s = 0.0;
  std::size_t n = 0;
  for (int i = 0; i < 1000; ++i) {
    for (const auto& b : sample_linear_coefficients(rng, 10, 1)) {
      s += b.sum();
      n += static_cast<std::size_t>(b.size());
    }
  }
  CHECK(n == 10000);
  CHECK(std::abs(s / static_cast<double>(n)) < 0.03);
}

TEST_CASE("rewards are a pure function of (seed, round, arm)") {
  SyntheticDgp a(scenario_spec("Linear"), SeedSpec::root(42).child("rep", 1));
  SyntheticDgp b(scenario_spec("Linear"), SeedSpec::root(42).child("rep", 1));
  // query b in a different order
  std::vector<double> ra, rb(50);
  for (std::size_t t = 1; t <= 50; ++t) ra.push_back(a.reward(t, t % 3));
  for (std::size_t t = 50; t >= 1; --t) {
    b.context(t);
    b.reward(t, (t + 1) % 3);
    rb[t - 1] = b.reward(t, t % 3);
  }
  CHECK(ra == rb);
  CHECK(a.context(17) == b.context(17));

  // noise = reward - mean has unit variance
  double ss = 0.0;
  for (std::size_t t = 1; t <= 20000; ++t) {
    const double e = a.reward(t, 0) - a.arm_means(t)[0];
    ss += e * e;
  }
  CHECK(ss / 20000 == doctest::Approx(1.0).epsilon(0.04));
}

TEST_CASE("oracle policy has zero regret") {
  for (const auto& name : scenario_names()) {
    SyntheticDgp dgp(scenario_spec(name), SeedSpec::root(3));
    std::vector<std::vector<double>> means;
    std::vector<std::size_t> actions;
    for (std::size_t t = 1; t <= 200; ++t) {
      means.push_back(dgp.arm_means(t));
      actions.push_back(dgp.oracle_arm(dgp.context(t)));
    }
    for (double r : cumulative_regret(means, actions)) CHECK(r == 0.0);
  }
}

TEST_CASE("heteroscedastic noise") {
  CHECK(hetero_variance(0.0) == 1.0);
  CHECK(hetero_variance(1.0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(hetero_variance(-1.0) == doctest::Approx(0.1).epsilon(1e-15));
  Rng rng(21);
  std::vector<double> logs;
  for (int i = 0; i < 5000; ++i) {
    for (double v : hetero_noise(rng, 2)) {
      CHECK(v >= 0.1);
      CHECK(v <= 10.0);
      logs.push_back(std::log10(v));
    }
  }
  CHECK(oracle::ks_pvalue(logs, [](double u) { return std::clamp((u + 1) / 2, 0.0, 1.0); }) > 0.01);

  SyntheticDgp dgp(scenario_spec("Friedman-Heteroscedastic"), SeedSpec::root(5));
  CHECK(dgp.noise_variance(0) != dgp.noise_variance(1));
  SyntheticDgp again(scenario_spec("Friedman-Heteroscedastic"), SeedSpec::root(5));
  CHECK(dgp.noise_variance(1) == again.noise_variance(1));
}

TEST_CASE("BART trees") {
  RegressionTree leaf({TreeNode{-1, 0.0, 0.7, -1, -1}});
  CHECK(leaf.evaluate(vec({0.1})) == 0.7);
  CHECK(leaf.evaluate(vec({0.9})) == 0.7);
  CHECK(leaf.split_count() == 0);

  RegressionTree stub({TreeNode{0, 0.5, 0.0, 1, 2}, TreeNode{-1, 0, -1.0, -1, -1}, TreeNode{-1, 0, 1.0, -1, -1}});
  CHECK(stub.evaluate(vec({0.2})) == -1.0);
  CHECK(stub.evaluate(vec({0.9})) == 1.0);
  CHECK(stub.split_count() == 1);
  CHECK(stub.depth() == 1);

  BartPriorSpec spec;
  CHECK(spec.leaf_sd() == doctest::Approx(0.5 / (2.0 * 10.0)));

  Rng rng(8);
  const std::vector<double> probs{0.25, 0.25, 0.25, 0.25};
  std::size_t roots = 0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) roots += sample_bart_tree(spec, probs, rng).split_count() > 0;
  CHECK(static_cast<double>(roots) / n == doctest::Approx(0.45).epsilon(0.02 / 0.45));

  // depth-1 children split with probability alpha^2
  std::size_t child_splits = 0, children = 0;
  for (std::size_t i = 0; i < 20000; ++i) {
    const auto t = sample_bart_tree(spec, probs, rng);
    const auto& nodes = t.nodes();
    if (nodes[0].var < 0) continue;
    for (int c : {nodes[0].left, nodes[0].right}) {
      ++children;
      child_splits += nodes[static_cast<std::size_t>(c)].var >= 0;
    }
  }
  CHECK(static_cast<double>(child_splits) / static_cast<double>(children) == doctest::Approx(0.45 * 0.45).epsilon(0.1));

  // split variables follow the supplied probabilities
  const std::vector<double> skew{0.7, 0.1, 0.1, 0.1};
  std::size_t first = 0, total = 0;
  for (std::size_t i = 0; i < 5000; ++i) {
    const auto tree = sample_bart_tree(spec, skew, rng);
    for (const auto& node : tree.nodes()) {
      if (node.var < 0) continue;
      ++total;
      first += node.var == 0;
    }
  }
  CHECK(static_cast<double>(first) / static_cast<double>(total) == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("BART functions are piecewise constant along axis lines") {
  BartPriorSpec spec;
  Rng rng(10);
  for (int rep = 0; rep < 5; ++rep) {
    const auto f = sample_bart_function(spec, rng);
    CHECK(f.trees().size() == 100);
    const std::size_t bound = f.total_splits() + f.trees().size();
    for (Eigen::Index axis = 0; axis < 4; ++axis) {
      Vector x(4);
      for (Eigen::Index j = 0; j < 4; ++j) x(j) = rng.uniform();
      std::size_t pieces = 1;
      x(axis) = 0.0;
      double prev = f(x);
      for (int i = 1; i <= 20000; ++i) {
        x(axis) = i / 20000.0;
        const double v = f(x);
        if (v != prev) ++pieces;
        prev = v;
      }
      CHECK(pieces <= bound);
    }
  }
}

TEST_CASE("classification rewards") {
  Matrix X(3, 1);
  X << 0.1, 0.2, 0.3;
  ClassificationEnv env("toy", X, {2, 0, 1}, 3);
  CHECK(env.classification_step(1, 2) == 1.0);
  CHECK(env.classification_step(1, 0) == 0.0);
  CHECK(env.horizon_limit() == 3);
  double total = 0.0;
  for (std::size_t t = 1; t <= env.horizon_limit(); ++t) {
    const auto means = env.arm_means(t);
    total += env.reward(t, static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin()));
  }
  CHECK(total == 3.0);
  CHECK_THROWS_AS(env.classification_step(4, 0), HorizonExhausted);
  CHECK_THROWS_AS(env.reward(1, 3), ArmIndexError);

  Matrix big = Matrix::Zero(20000, 2);
  std::vector<std::size_t> labels(20000, 0);
  ClassificationEnv capped("big", big, labels, 2);
  CHECK(capped.horizon_limit() == 10000);
  ClassificationEnv lower("big", big, labels, 2, 500);
  CHECK(lower.horizon_limit() == 500);
}

TEST_CASE("CSV ingestion") {
  const auto path = temp_file("pfnts_ingest.csv",
                              "a,const,color,label\n"
                              "1,5,red,yes\n"
                              "2,5,blue,no\n"
                              "3,5,red,\"yes\"\n"
                              "6,5,green,maybe\n");
  auto env = ingest_csv(path, "label", {"color"});
  CHECK(env.num_arms() == 3);
  CHECK(env.labels() == std::vector<std::size_t>{0, 1, 0, 2});
  CHECK(env.class_names() == std::vector<std::string>{"yes", "no", "maybe"});
  CHECK(env.dim() == 5);  // a, const, red, blue, green
  const Matrix& F = env.features();
  // column a: mean 3, population sd sqrt(3.5)
  CHECK(F(0, 0) == doctest::Approx((1 - 3) / std::sqrt(3.5)));
  CHECK(F.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
  const double sd = std::sqrt((F.col(0).array() - F.col(0).mean()).square().mean());
  CHECK(std::abs(sd - 1.0) < 1e-9);
  CHECK(F.col(1).isZero());
  CHECK(F.row(0).tail(3) == vec({1, 0, 0}).transpose());
  CHECK(F.row(1).tail(3) == vec({0, 1, 0}).transpose());
  CHECK(F.row(3).tail(3) == vec({0, 0, 1}).transpose());

  const auto two = temp_file("pfnts_two.csv", "x,y\n0.5,a\n0.7,b\n");
  auto small = ingest_csv(two, "y", {});
  CHECK(small.num_arms() == 2);
  CHECK(small.labels() == std::vector<std::size_t>{0, 1});

  CHECK_THROWS_AS(ingest_csv(two, "missing", {}), SchemaError);
  CHECK_THROWS_AS(ingest_csv(two, "y", {"nope"}), SchemaError);
  const auto bad = temp_file("pfnts_bad.csv", "x,y\n0.5,a\noops,b\n");
  try {
    ingest_csv(bad, "y", {});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == "x");
  }
  for (const auto& p : {path, two, bad}) std::filesystem::remove(p);
}

TEST_CASE("CSV parser") {
  const auto t = parse_csv("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n1,2\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "x, y");
  CHECK(t.rows[0][1] == "he said \"hi\"");
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), SchemaError);
}

TEST_CASE("logged data generator") {
  Rng rng(42);
  const auto dgp = EngagementDgp::sample(rng);
  const std::vector<double> props{0.4, 0.3, 0.3};
  const auto data = generate_logged_data(dgp, props, 349, 30, rng);
  CHECK(data.decisions.size() == 10470);
  CHECK(data.num_arms == 3);
  std::vector<double> freq(3, 0.0);
  for (const auto& d : data.decisions) freq[d.action] += 1.0 / 10470.0;
  CHECK(std::abs(freq[0] - 0.4) < 0.02);
  CHECK(std::abs(freq[1] - 0.3) < 0.02);
  CHECK(std::abs(freq[2] - 0.3) < 0.02);

  // day-major order, cluster = user, one-hot user id in the context
  CHECK(data.decisions[0].cluster == 0);
  CHECK(data.decisions[348].cluster == 348);
  CHECK(data.decisions[349].cluster == 0);
  const auto& x = data.decisions[349 + 5].context;
  CHECK(x.size() == 2 + 1 + 349);
  CHECK(x(2) == doctest::Approx(2.0 / 30.0));
  CHECK(x(3 + 5) == 1.0);
  CHECK(x.tail(349).sum() == 1.0);
  for (const auto& d : data.decisions) CHECK((d.reward == 0.0 || d.reward == 1.0));
  std::set<std::int64_t> users;
  for (const auto& d : data.decisions) users.insert(d.cluster);
  CHECK(users.size() == 349);

  const std::vector<double> point{1.0, 0.0, 0.0};
  for (const auto& d : generate_logged_data(dgp, point, 10, 3, rng).decisions) CHECK(d.action == 0);

  // Bernoulli means match the engagement formula through a CSV round trip
  const auto path = std::filesystem::temp_directory_path() / "pfnts_log.csv";
  auto small = generate_logged_data(dgp, props, 5, 4, rng, false);
  write_logged_csv(path, small.decisions);
  const auto back = read_logged_csv(path);
  REQUIRE(back.size() == small.decisions.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].action == small.decisions[i].action);
    CHECK(back[i].cluster == small.decisions[i].cluster);
    CHECK(back[i].reward == small.decisions[i].reward);
    CHECK(back[i].propensity == small.decisions[i].propensity);
    CHECK((back[i].context - small.decisions[i].context).norm() == 0.0);
  }
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "cluster_id,t,x0,x1,x2,action,propensity_0,propensity_1,propensity_2,reward");
  std::filesystem::remove(path);

  CHECK_THROWS_AS(generate_logged_data(dgp, std::vector<double>{0.5, 0.5}, 3, 3, rng), ParamError);
}
