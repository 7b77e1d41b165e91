#include <cmath>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "linkpmf/cavi.hpp"
#include "linkpmf/gibbs.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace linkpmf;

double ztp_pmf(int k, double lambda) {
  return std::exp(k * std::log(lambda) - std::lgamma(k + 1.0)) / std::expm1(lambda);
}

TEST(ZeroTruncatedPoisson, MeanAtOne) {
  CounterRng rng(1);
  constexpr int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_zero_truncated_poisson(1.0, rng);
    ASSERT_GE(x, 1.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, 1.0 / (1.0 - std::exp(-1.0)), 3 * se);
}

TEST(ZeroTruncatedPoisson, ChiSquareAgainstPmf) {
  for (double lambda : {0.1, 1.0, 10.0}) {
    CounterRng rng(stream_key(5, "ztp"), static_cast<std::uint64_t>(lambda * 100));
    constexpr int n = 200000;
    std::map<int, int> counts;
    for (int i = 0; i < n; ++i) ++counts[static_cast<int>(sample_zero_truncated_poisson(lambda, rng))];
    // Bins with expected count >= 20; the rest pooled into a tail bin.
    double stat = 0, tail_expected = 1.0;
    int tail_observed = n, bins = 0;
    for (int k = 1; k < 200; ++k) {
      const double expected = n * ztp_pmf(k, lambda);
      if (expected < 20) continue;
      const int observed = counts.count(k) ? counts[k] : 0;
      stat += (observed - expected) * (observed - expected) / expected;
      tail_expected -= expected / n;
      tail_observed -= observed;
      ++bins;
    }
    if (tail_expected * n >= 5) {
      stat += (tail_observed - tail_expected * n) * (tail_observed - tail_expected * n) / (tail_expected * n);
      ++bins;
    }
    ASSERT_GE(bins, 2) << lambda;
    const boost::math::chi_squared dist(bins - 1);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, stat)), 0.001) << "lambda " << lambda;
  }
}

TEST(ZeroTruncatedPoisson, RejectsBadRate) {
  CounterRng rng(1);
  EXPECT_THROW(sample_zero_truncated_poisson(0.0, rng), Error);
}

TEST(Multinomial, SingleComponentAndBalance) {
  CounterRng rng(2);
  const double one[] = {0.0, 3.0, 0.0};
  std::uint32_t out[3];
  sample_multinomial(17, one, out, rng);
  EXPECT_EQ(out[0], 0u);
  EXPECT_EQ(out[1], 17u);
  EXPECT_EQ(out[2], 0u);

  const double half[] = {0.5, 0.5};
  std::uint32_t split[2];
  sample_multinomial(100000, half, split, rng);
  EXPECT_EQ(split[0] + split[1], 100000u);
  EXPECT_NEAR(split[0] / 1e5, 0.5, 3 * std::sqrt(0.25 / 1e5));
}

Hyperparameters hyper_r(int r) {
  Hyperparameters h;
  h.latent_dim = r;
  return h;
}

TEST(Conditionals, SymbolicGamma4Rate2p1) {
  SparseBipartiteGraph g(1, 2, {{0, 0}, {0, 1}});
  CovariateMatrix u(1), h(2);
  EpmfProblem p(g, u, h);
  auto hyper = hyper_r(1);
  hyper.alpha.a = 1.0;
  auto s = init_gibbs_state(p, hyper, 0);
  s.zeta_alpha[0] = 0.1;
  s.params.beta(0, 0) = 0.5;
  s.params.beta(1, 0) = 1.5;
  s.z_latent = {1, 2};
  const auto c = alpha_conditional(s, p, hyper, 0, 0);
  EXPECT_DOUBLE_EQ(c.shape, 4.0);
  EXPECT_DOUBLE_EQ(c.rate, 2.1);
}

TEST(Conditionals, NoEdgesGivesPriorShape) {
  SparseBipartiteGraph g(3, 4, {});
  CovariateMatrix u(3), h(4);
  EpmfProblem p(g, u, h);
  const auto hyper = hyper_r(2);
  const auto s = init_gibbs_state(p, hyper, 9);
  const auto c = alpha_conditional(s, p, hyper, 1, 1);
  EXPECT_EQ(c.shape, hyper.alpha.a);
  EXPECT_DOUBLE_EQ(c.rate, s.zeta_alpha[1] + s.params.beta.col(1).sum());
}

// log joint density of (alpha, beta, phi, Z) up to terms free of the
// parameters, with every cell's Z_ijl ~ Poisson(rate component).
double log_joint(const GibbsState& s, const SparseBipartiteGraph& g, const CovariateMatrix& u,
                 const CovariateMatrix& h, const Hyperparameters& hyper) {
  const int R = s.params.latent_dim();
  const std::size_t H = h.n_covariates();
  double lp = 0;
  for (NodeId i = 0; i < g.n_users(); ++i) {
    for (NodeId j = 0; j < g.n_hosts(); ++j) {
      const auto e = g.find(i, j);
      for (int r = 0; r < R; ++r) {
        const double rate = s.params.alpha(i, r) * s.params.beta(j, r);
        const double z = e ? s.z_latent[*e * R + r] : 0.0;
        lp += z * std::log(rate) - rate;
      }
      for (auto k : u.active(i)) {
        for (auto hh : h.active(j)) {
          double z = 0;
          if (e) {
            EpmfProblem p(g, u, h);
            const auto pairs = p.edge_pairs(*e);
            for (std::size_t q = 0; q < pairs.size(); ++q)
              if (pairs[q] == k * H + hh) z = s.z_covariate[p.pair_offset(*e) + q];
          }
          const double rate = s.params.phi(k, hh);
          lp += z * std::log(rate) - rate;
        }
      }
    }
  }
  auto gamma_lp = [](double x, double a, double b) { return (a - 1) * std::log(x) - b * x + a * std::log(b); };
  for (Eigen::Index i = 0; i < s.params.alpha.rows(); ++i)
    for (int r = 0; r < R; ++r) lp += gamma_lp(s.params.alpha(i, r), hyper.alpha.a, s.zeta_alpha[i]);
  for (Eigen::Index j = 0; j < s.params.beta.rows(); ++j)
    for (int r = 0; r < R; ++r) lp += gamma_lp(s.params.beta(j, r), hyper.beta.a, s.zeta_beta[j]);
  for (Eigen::Index k = 0; k < s.params.phi.size(); ++k)
    lp += gamma_lp(s.params.phi.data()[k], hyper.phi.a, s.zeta_phi);
  return lp;
}

// Recovers (shape, rate) of a gamma kernel from three evaluations of the log
// joint along one coordinate.
template <class Set>
GammaParams fit_kernel(GibbsState s, Set set, const SparseBipartiteGraph& g, const CovariateMatrix& u,
                       const CovariateMatrix& h, const Hyperparameters& hyper) {
  const double xs[3] = {0.3, 1.1, 2.7};
  double f[3];
  for (int k = 0; k < 3; ++k) {
    set(s, xs[k]);
    f[k] = log_joint(s, g, u, h, hyper);
  }
  // f = (shape - 1) log x - rate x + C
  const double l01 = std::log(xs[1]) - std::log(xs[0]), l12 = std::log(xs[2]) - std::log(xs[1]);
  const double d01 = xs[1] - xs[0], d12 = xs[2] - xs[1];
  const double f01 = f[1] - f[0], f12 = f[2] - f[1];
  const double sm1 = (f01 * d12 - f12 * d01) / (l01 * d12 - l12 * d01);
  const double rate = (sm1 * l01 - f01) / d01;
  return {sm1 + 1, rate};
}

TEST(Conditionals, MatchJointDensityOnTinyInstance) {
  SparseBipartiteGraph g(2, 2, {{0, 0}, {0, 1}, {1, 1}});
  std::vector<CovariateGroup> ug{{"g", {"x", "y"}, 0}}, hg{{"h", {"p"}, 0}};
  const auto u = CovariateMatrix::from_levels(ug, {{0}, {1}});
  const auto h = CovariateMatrix::from_levels(hg, {{0}, {0}});
  EpmfProblem p(g, u, h);
  auto hyper = hyper_r(2);
  hyper.alpha = {0.7, 1.0, 0.4};
  hyper.beta = {1.3, 1.0, 0.6};
  hyper.phi = {0.9, 1.0, 0.5};
  auto s = init_gibbs_state(p, hyper, 3);
  sample_latent_counts(s, p, 3, 0);

  for (NodeId i = 0; i < 2; ++i) {
    for (int r = 0; r < 2; ++r) {
      const auto want = alpha_conditional(s, p, hyper, i, r);
      const auto got = fit_kernel(s, [&](GibbsState& st, double x) { st.params.alpha(i, r) = x; }, g, u, h, hyper);
      EXPECT_NEAR(got.shape, want.shape, 1e-8);
      EXPECT_NEAR(got.rate, want.rate, 1e-8);
      const auto wb = beta_conditional(s, p, hyper, i, r);
      const auto gb = fit_kernel(s, [&](GibbsState& st, double x) { st.params.beta(i, r) = x; }, g, u, h, hyper);
      EXPECT_NEAR(gb.shape, wb.shape, 1e-8);
      EXPECT_NEAR(gb.rate, wb.rate, 1e-8);
    }
  }
  for (std::size_t k = 0; k < 2; ++k) {
    const auto want = phi_conditional(s, p, hyper, k, 0);
    const auto got = fit_kernel(s, [&](GibbsState& st, double x) { st.params.phi(k, 0) = x; }, g, u, h, hyper);
    EXPECT_NEAR(got.shape, want.shape, 1e-8);
    EXPECT_NEAR(got.rate, want.rate, 1e-8);
  }
}

TEST(LatentCounts, ConsistentAllocation) {
  const auto g = fixtures::random_graph(10, 10, 0.3, 1);
  const auto u = fixtures::random_covariates(10, {2}, 2);
  const auto h = fixtures::random_covariates(10, {2}, 3);
  EpmfProblem p(g, u, h);
  auto s = init_gibbs_state(p, hyper_r(3), 4);
  sample_latent_counts(s, p, 4, 0);
  for (std::size_t e = 0; e < g.nnz(); ++e) {
    std::uint32_t total = 0;
    for (int r = 0; r < 3; ++r) total += s.z_latent[e * 3 + r];
    for (std::size_t q = 0; q < p.edge_pairs(e).size(); ++q) total += s.z_covariate[p.pair_offset(e) + q];
    EXPECT_GE(s.counts[e], 1u);
    EXPECT_EQ(total, s.counts[e]);
  }
}

TEST(RunChain, Defaults) {
  const GibbsOptions o;
  EXPECT_EQ(o.n_samples, 10000);
  EXPECT_EQ(o.burn_in, 1000);
}

TEST(RunChain, ThinningAndDeterminism) {
  const auto g = fixtures::random_graph(8, 6, 0.3, 5);
  CovariateMatrix u(8), h(6);
  EpmfProblem p(g, u, h);
  GibbsOptions o;
  o.n_samples = 60;
  o.burn_in = 10;
  o.thin = 5;
  o.seed = 12;
  const auto a = run_chain(p, hyper_r(2), o);
  EXPECT_EQ(a.size(), 10u);
  const auto b = run_chain(p, hyper_r(2), o);
  for (std::size_t m = 0; m < a.size(); ++m) EXPECT_EQ(a.draws[m].alpha, b.draws[m].alpha);
  o.burn_in = 60;
  EXPECT_THROW(run_chain(p, hyper_r(2), o), Error);
}

TEST(RunChain, NoCellsRecoversPriorMoments) {
  // Without any host there is no likelihood term at all.
  SparseBipartiteGraph g(5, 0, {});
  CovariateMatrix u(5), h(0);
  EpmfProblem p(g, u, h);
  auto hyper = hyper_r(2);
  hyper.alpha = {2.0, 3.0, 1.0};  // E[alpha] = a c / (b - 1) = 1
  GibbsOptions o;
  o.n_samples = 6000;
  o.burn_in = 1000;
  o.seed = 3;
  const auto draws = run_chain(p, hyper, o);
  double sum = 0;
  std::size_t n = 0;
  for (const auto& d : draws.draws) {
    sum += d.alpha.sum();
    n += static_cast<std::size_t>(d.alpha.size());
  }
  EXPECT_NEAR(sum / n, 1.0, 0.08);
}

TEST(PosteriorMean, ReducesToPlugIn) {
  auto d = fixtures::random_params(3, 3, 0, 0, 2, 1);
  CovariateMatrix u(3), h(3);
  PosteriorSamples one;
  one.draws = {d};
  const double plug = link_probability(rate_value(d, 1, 2, {}, {}));
  EXPECT_NEAR(posterior_mean_link_probability(one, 1, 2, u, h), plug, 1e-15);
  PosteriorSamples same;
  same.draws = {d, d, d, d};
  EXPECT_NEAR(posterior_mean_link_probability(same, 1, 2, u, h), plug, 1e-15);
}

TEST(PosteriorMean, JensenBound) {
  CovariateMatrix u(4), h(4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // Only alpha varies across draws, so psi is linear in the draw and the
    // plug-in at the sample mean is an upper bound.
    const auto base = fixtures::random_params(4, 4, 0, 0, 3, seed);
    PosteriorSamples s;
    PointParams mean = base;
    mean.alpha.setZero();
    for (int m = 0; m < 25; ++m) {
      auto d = base;
      d.alpha = fixtures::random_params(4, 4, 0, 0, 3, seed * 100 + m + 1).alpha;
      mean.alpha += d.alpha / 25.0;
      s.draws.push_back(d);
    }
    for (NodeId i = 0; i < 4; ++i)
      for (NodeId j = 0; j < 4; ++j)
        EXPECT_LE(posterior_mean_link_probability(s, i, j, u, h),
                  link_probability(rate_value(mean, i, j, {}, {})) + 1e-15);
  }
}

}  // namespace
