#include <gtest/gtest.h>

#include <random>
#include <xxzim/core.hpp>

using namespace xxzim;

namespace {
ModelParams generic() {
  ModelParams p;
  p.eta = {0.3, 0.8};
  p.u = {0.4, 0.1};
  return p;
}
cplx draw(std::mt19937_64& g) {
  std::uniform_real_distribution<double> d(-1, 1);
  return {d(g), 0.5 * d(g)};
}
}  // namespace

TEST(RMatrix, ZeroArgumentIsSwap) {
  Mat4 r = r_matrix(generic(), 0.0);
  EXPECT_LE(max_abs(r - swap_gate()), 1e-15);
}

TEST(RMatrix, InverseAtNegatedArgument) {
  auto p = generic();
  for (cplx w : {cplx(0.3, 0.1), cplx(-0.7, 0.2), cplx(1.1, -0.4)})
    EXPECT_LE(max_abs(r_matrix(p, w) * r_matrix(p, -w) - Mat4::Identity()), 1e-13);
}

TEST(RMatrix, FreeFermionMiddleBlock) {
  ModelParams p;
  p.eta = free_fermion_eta();
  const double u = 0.63;
  Mat4 r = r_matrix(p, u);
  EXPECT_NEAR(std::abs(r(1, 1) - cplx(0, -std::tanh(u))), 0, 1e-14);
  EXPECT_NEAR(std::abs(r(2, 2) - cplx(0, -std::tanh(u))), 0, 1e-14);
  EXPECT_NEAR(std::abs(r(1, 2) - 1 / std::cosh(u)), 0, 1e-14);
  EXPECT_NEAR(std::abs(r(0, 0) - 1.0), 0, 1e-15);
  // the gate is unitary for real u
  Mat4 g = gate(p.eta, u);
  EXPECT_LE(max_abs(g * g.adjoint() - Mat4::Identity()), 1e-14);
}

TEST(RMatrix, ConservesMagnetization) {
  std::mt19937_64 g(3);
  for (int t = 0; t < 20; ++t) EXPECT_TRUE(conserves_magnetization(r_matrix(generic(), draw(g))));
}

TEST(RMatrix, PoleRaises) {
  auto p = generic();
  EXPECT_THROW(r_matrix(p, -p.eta), PoleError);
}

TEST(Identities, YangBaxterRandomSweep) {
  std::mt19937_64 g(11);
  for (auto eta : {cplx(0.3, 0.8), free_fermion_eta(), cplx(0, 0.4)}) {
    ModelParams p;
    p.eta = eta;
    for (int t = 0; t < 100; ++t) EXPECT_LE(yang_baxter_residual(p, draw(g), draw(g), draw(g)), 1e-12);
    cplx v = draw(g);
    EXPECT_LE(yang_baxter_residual(p, v, v, v), 1e-15);
  }
}

TEST(Identities, Crossing) {
  std::mt19937_64 g(5);
  auto p = generic();
  for (int t = 0; t < 50; ++t) EXPECT_LE(crossing_residual(p, draw(g)), 1e-12);
  EXPECT_LE(crossing_residual(p, 1e-6), 1e-5);
  ModelParams f;
  f.eta = free_fermion_eta();
  EXPECT_LE(crossing_residual(f, 0.3), 1e-12);
}

TEST(Identities, Unitarity) {
  std::mt19937_64 g(6);
  auto p = generic();
  for (int t = 0; t < 50; ++t) EXPECT_LE(unitarity_residual(p, draw(g)), 1e-12);
}

TEST(Identities, DegeneracyProjector) {
  auto p = generic();
  EXPECT_LE(degeneracy_projector_check(p, {0.37, 0.2}), 1e-12);
  EXPECT_LE(degeneracy_projector_check(p, p.eta * 1.0001), 1e-10);
  // R(eta) itself has the pole sinh(2 eta) = 0 at the free-fermion point
  ModelParams f;
  f.eta = free_fermion_eta();
  EXPECT_THROW(degeneracy_projector_check(f, 0.7), PoleError);
}

TEST(ModelParams, FreeFermionFlag) {
  ModelParams p;
  p.eta = free_fermion_eta();
  EXPECT_TRUE(p.free_fermion());
  p.eta += cplx(0, 1e-9);
  EXPECT_FALSE(p.free_fermion());
}
