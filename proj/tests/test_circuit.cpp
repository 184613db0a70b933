#include <gtest/gtest.h>

#include <cstdio>
#include <xxzim/circuit.hpp>
#include <xxzim/transfer.hpp>

using namespace xxzim;

namespace {
ModelParams unitary(int n, double u, double q, double gamma = 0.7) {
  ModelParams p;
  p.eta = {0, gamma};
  p.u = u;
  p.q_weight = q;
  p.n_half = n;
  return p;
}
Mat2 up() {
  Mat2 r = Mat2::Zero();
  r(0, 0) = 1;
  return r;
}
}  // namespace

TEST(Ordering, PairIndexRoundTrip) {
  const int m = 3;
  for (std::size_t idx = 0; idx < 64; ++idx) {
    int sb[3], s[3];
    unpack_pairs(m, idx, sb, s);
    EXPECT_EQ(pair_index(m, sb, s), idx);
  }
  // sbar_m is the most significant bit, s_m the least significant
  int sb[3] = {0, 0, 1}, s[3] = {0, 0, 0};
  EXPECT_EQ(pair_index(m, sb, s), std::size_t(32));
  int sb2[3] = {0, 0, 0}, s2[3] = {0, 0, 1};
  EXPECT_EQ(pair_index(m, sb2, s2), std::size_t(1));
}

TEST(CircuitIM, FixedPointOfTemporalTM) {
  for (int n = 1; n <= 3; ++n) {
    auto p = unitary(n, 0.45, 1.3);
    auto im = im_circuit(p);
    EXPECT_LE(normalized_distance(apply_temporal_tm(p, im.amp), im.amp), 1e-10) << n;
  }
}

TEST(CircuitIM, LightConeTruncation) {
  for (int n = 1; n <= 2; ++n) {
    auto p = unitary(n, 0.8, 0.7);
    EXPECT_LE(normalized_distance(im_circuit(p).amp, im_circuit(p, 2 * n + 2).amp), 1e-12);
  }
}

TEST(CircuitIM, ReductionEverywhere) {
  auto p = unitary(3, 0.5, 2.0);
  auto im = im_circuit(p);
  for (int k = 1; k <= 6; ++k) EXPECT_LE(check_reduction(im, k), 1e-10) << k;
  auto c = reduction_cascade(im);
  EXPECT_NEAR(std::abs(c.scalar - 1.0), 0, 1e-12);
}

TEST(CircuitIM, ChoiPositivity) {
  for (int n = 1; n <= 3; ++n) {
    auto im = im_circuit(unitary(n, 0.9, 1.7, 1.1));
    auto c = choi_check(im);
    EXPECT_LE(c.hermiticity, 1e-12);
    EXPECT_GE(c.min_eigenvalue, -1e-10);
    EXPECT_NEAR(std::abs(c.trace - 1.0), 0, 1e-10);
  }
}

TEST(Correlator, IdentityGivesOne) {
  auto im = im_circuit(unitary(2, 0.6, 1.4));
  Mat2 rho;
  rho << 0.6, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.4;
  EXPECT_NEAR(std::abs(correlator_one_point(im, im, rho, Mat2::Identity()) - 1.0), 0, 1e-12);
}

TEST(Correlator, InfiniteTemperatureIsZero) {
  ModelParams p = unitary(2, 0.6, 1.0);
  p.eta = free_fermion_eta();
  auto im = im_circuit(p);
  EXPECT_NEAR(std::abs(correlator_one_point(im, im, 0.5 * Mat2::Identity(), sigma_z())), 0, 1e-12);
}

TEST(Correlator, MatchesDenseChain) {
  // both oracles, pure-state (unitary) and density-matrix (general)
  for (double q : {1.0, 2.0}) {
    ModelParams p = unitary(2, 0.6, q);
    p.eta = free_fermion_eta();
    auto im = im_circuit(p);
    cplx z = correlator_one_point(im, im, up(), sigma_z());
    EXPECT_NEAR(std::abs(z - dense_correlator_pure(p, up(), sigma_z())), 0, 1e-10);
    EXPECT_NEAR(std::abs(z - dense_correlator_mixed(p, up(), sigma_z())), 0, 1e-10);
  }
}

TEST(Correlator, NonUnitaryGatesUseMixedOracle) {
  ModelParams p;
  p.eta = {0.2, 0.9};
  p.u = {0.4, 0.15};
  p.q_weight = 1.3;
  p.n_half = 1;
  auto im = im_circuit(p);
  Mat2 rho;
  rho << 0.7, 0.1, 0.1, 0.3;
  // the sandwich reflects the left IM itself, so the same IM goes on both sides
  cplx z = correlator_one_point(im, im, rho, sigma_z());
  EXPECT_NEAR(std::abs(z - dense_correlator(p, rho, sigma_z())), 0, 1e-10);
}

TEST(MirroredIM, LeftEigenvectorWithUnitOverlap) {
  ModelParams p;
  p.eta = {0.1, 0.6};
  p.u = {0.5, 0.05};
  p.q_weight = 1.2;
  p.n_half = 2;
  auto im = im_circuit(p);
  auto l = mirrored_im(im);
  EXPECT_NEAR(std::abs((l.amp.transpose() * im.amp)(0) - 1.0), 0, 1e-10);
  VecX lt = dense_transfer(p, TransferKind::original, 0).transpose() * l.amp;
  EXPECT_LE(normalized_distance(lt, l.amp), 1e-10);
}

TEST(Serialization, JsonRoundTrip) {
  auto im = im_circuit(unitary(1, 0.3, 1.1));
  auto j = im_to_json(im);
  EXPECT_EQ(j["ordering"], "appendixC");
  auto back = im_from_json(j);
  EXPECT_EQ(back.n_half, 1);
  EXPECT_EQ((back.amp - im.amp).cwiseAbs().maxCoeff(), 0.0);
  j["re"].erase(0);
  EXPECT_THROW(im_from_json(j), DimensionError);
}

TEST(Capacity, CapIsEnforced) {
  EXPECT_THROW(check_capacity(21, 20), CapacityError);
  EXPECT_NO_THROW(check_capacity(20, 20));
  EXPECT_THROW(correlator_one_point(im_circuit(unitary(1, 0.3, 1)), im_circuit(unitary(2, 0.3, 1)), up(),
                                   sigma_z()),
               DimensionError);
}
