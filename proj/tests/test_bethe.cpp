#include <gtest/gtest.h>

#include <random>
#include <xxzim/bethe.hpp>
#include <xxzim/circuit.hpp>

using namespace xxzim;

namespace {
ModelParams params(int n, cplx eta, cplx u, double q) {
  ModelParams p;
  p.n_half = n;
  p.eta = eta;
  p.u = u;
  p.q_weight = q;
  return p;
}
int magnetization_flips(std::size_t i) { return __builtin_popcountll(i); }
}  // namespace

TEST(BetheRoots, ClosedForm) {
  PrecisionScope scope{40};
  auto p = params(1, {0.2, 0.9}, 0.4, 2.0);
  auto r = bethe_roots_exact(p, MpComplex(mpreal("1e-3")));
  ASSERT_EQ(r.roots.size(), 2u);
  // the roots use Q = q^2: x_1 = u + eps/(1 + q^2), x_2 = eps/(1 + q^2)
  EXPECT_NEAR(std::abs(r.roots[0].to_double() - (0.4 + 1e-3 / 5)), 0, 1e-15);
  EXPECT_NEAR(std::abs(r.roots[1].to_double() - 1e-3 / 5), 0, 1e-15);
  // half-integer phases keep q = 1 admissible
  auto p1 = params(3, {0.2, 0.9}, 0.4, 1.0);
  EXPECT_NO_THROW(bethe_roots_exact(p1, MpComplex(mpreal("1e-3"))));
}

TEST(BetheOperator, LowersMagnetizationAndAnnihilates) {
  PrecisionScope scope{60};
  auto p = params(1, {0.2, 0.9}, 0.4, 1.5);
  MpComplex eps(mpreal("1e-3")), x(mpreal("0.31"), mpreal("0.07"));
  MpState st = mp_vacuum(p.sites());
  for (int m = 1; m <= p.sites() + 1; ++m) {
    st = apply_b_operator(p, x, eps, st);
    for (std::size_t i = 0; i < st.size(); ++i)
      if (!is_zero(st[i])) EXPECT_EQ(magnetization_flips(i), m);
  }
  for (auto& z : st) EXPECT_TRUE(is_zero(z) || abs(z) < mpreal("1e-50"));
}

TEST(BetheOperator, BOperatorsCommute) {
  PrecisionScope scope{60};
  auto p = params(1, {0.2, 0.9}, 0.4, 1.5);
  MpComplex eps(mpreal("1e-3")), x1(mpreal("0.31"), mpreal("0.07")), x2(mpreal("-0.2"), mpreal("0.4"));
  VecX r = random_state(p.sites(), 9);
  MpState st(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) st[i] = MpComplex(r(i));
  auto a = apply_b_operator(p, x1, eps, apply_b_operator(p, x2, eps, st));
  auto b = apply_b_operator(p, x2, eps, apply_b_operator(p, x1, eps, st));
  mpreal d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max<mpreal>(d, abs(a[i] - b[i]));
  EXPECT_LT(d.convert_to<double>(), 1e-40);
}

TEST(BetheIM, MatchesCircuitGenericEta) {
  auto p = params(2, {0.2, 0.9}, 0.4, 2.0);
  auto b = im_bethe_limit(p);
  EXPECT_LE(normalized_distance(b.amp, im_circuit(p).amp), 1e-8);
  EXPECT_LE(b.extrapolation_error, 1e-8);
  EXPECT_EQ(b.eps_ladder.size(), 4u);
  EXPECT_GE(b.digits, bethe_min_digits(2, b.eps_ladder.back()));
}

TEST(BetheIM, SmallestCaseFiniteLimit) {
  auto p = params(1, free_fermion_eta(), 0.7, 1.3);
  auto b = im_bethe_limit(p);
  EXPECT_GT(b.amp.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_LE(normalized_distance(b.amp, im_circuit(p).amp), 1e-8);
}

TEST(BetheIM, PrecisionFloorIsEnforced) {
  auto p = params(2, free_fermion_eta(), 0.7, 1.3);
  BetheOptions o;
  o.digits = 20;
  EXPECT_THROW(im_bethe_limit(p, o), PrecisionError);
}

TEST(BetheIM, DisagreeingExtrapolantsAreReported) {
  auto p = params(2, {0.2, 0.9}, 0.4, 2.0);
  BetheOptions o;
  o.ladder = {0.2, 0.1};
  o.agreement = 1e-12;
  EXPECT_THROW(im_bethe_limit(p, o), ConvergenceError);
}

TEST(DualIM, MatchesMirroredCircuit) {
  auto p = params(2, {0.2, 0.9}, 0.4, 2.0);
  auto right = im_bethe_limit(p);
  auto dual = dual_im_bethe(p, {}, &right);
  auto circ = im_circuit(p);
  EXPECT_LE(normalized_distance(dual.amp, mirrored_im(circ).amp), 1e-8);
  cplx ov = (dual.amp.transpose() * right.amp)(0);
  EXPECT_NEAR(std::abs(ov - 1.0), 0, 1e-10);
}

TEST(BAE, ResidualScalesLinearly) {
  for (int n = 1; n <= 3; ++n) {
    auto p = params(n, {0.2, 0.9}, 0.4, 1.7);
    auto worst = [&](double e) {
      auto r = bae_residual(p, bethe_roots_double(p, e), e);
      return *std::max_element(r.begin(), r.end());
    };
    double r1 = worst(1e-3), r2 = worst(5e-4), r3 = worst(2.5e-4);
    EXPECT_NEAR(r1 / r2, 2.0, 0.2) << n;
    double slope = std::log(r1 / r3) / std::log(4.0);
    EXPECT_GE(slope, 0.8);
    EXPECT_LE(slope, 1.2);
  }
}

TEST(BAE, RandomRootsFail) {
  auto p = params(2, {0.2, 0.9}, 0.4, 1.7);
  std::vector<cplx> roots{{0.13, 0.2}, {0.5, -0.1}, {-0.3, 0.4}, {0.8, 0.05}};
  auto r = bae_residual(p, roots, 1e-3);
  EXPECT_GT(*std::max_element(r.begin(), r.end()), 0.1);
}
