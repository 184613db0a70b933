#include <gtest/gtest.h>

#include <random>
#include <xxzim/basis.hpp>
#include <xxzim/fermion.hpp>

using namespace xxzim;

namespace {
ModelParams ff_for_s(int n, double s) {
  ModelParams p;
  p.n_half = n;
  p.eta = free_fermion_eta();
  p.u = std::acosh(1 / s);
  return p;
}
// residual of A applied to the row span, projected back onto the span
double invariance(const Eigen::MatrixXd& rows, const MatX& a) {
  MatX v = rows.transpose().cast<cplx>();
  MatX av = a * v;
  MatX proj = v * v.completeOrthogonalDecomposition().solve(av);
  return max_abs(av - proj) / std::max(max_abs(av), 1e-300);
}
}  // namespace

TEST(Adjugate, DiagonalTerms) {
  for (int n : {1, 3, 6})
    for (double s : {0.3, 0.5, 0.8}) {
      auto b = adjugate_vectors(n, s, Sector::cl);
      for (int k = 1; k <= n; ++k) {
        double expect = ((n + 1 - k) % 2 ? -1.0 : 1.0) * std::pow(s * s - 1, k - 1);
        EXPECT_NEAR(b.rows(k - 1, 2 * k - 2), expect, 1e-12 * std::max(1.0, std::abs(expect)));
      }
    }
}

TEST(Adjugate, SupportIsTriangular) {
  auto cl = adjugate_vectors(5, 0.4, Sector::cl), q = adjugate_vectors(5, 0.4, Sector::q);
  for (int m = 1; m <= 5; ++m)
    for (int k = 1; k <= 5; ++k) {
      if (k < m) EXPECT_EQ(cl.rows.row(m - 1).segment(2 * k - 2, 2).norm(), 0.0);
      if (k > m) EXPECT_EQ(q.rows.row(m - 1).segment(2 * k - 2, 2).norm(), 0.0);
    }
}

TEST(Bases, InvariantUnderGeneratorsAndTransfer) {
  for (int n : {2, 4, 7}) {
    const double s = 0.6;
    auto p = ff_for_s(n, s);
    for (auto sec : {Sector::cl, Sector::q})
      for (auto fam : {adjugate_vectors(n, s, sec), jacobi_vectors(n, s, sec)}) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(fam.rows);
        EXPECT_EQ(lu.rank(), n);
        for (auto side : {Side::l, Side::r})
          EXPECT_LE(invariance(fam.rows, build_h(p, side, sec).cast<cplx>()), 1e-9)
              << n << family_name(fam.family) << sector_name(sec);
        EXPECT_LE(invariance(fam.rows, build_M(p, {0.3, 0.1}, sec)), 1e-9);
      }
  }
}

TEST(Bases, JacobiSpansAdjugate) {
  for (int n = 1; n <= 10; ++n)
    for (auto sec : {Sector::cl, Sector::q}) {
      auto a = adjugate_vectors(n, 0.5, sec), j = jacobi_vectors(n, 0.5, sec);
      EXPECT_LE(span_residual(a.rows, j.rows), 1e-10) << n;
      EXPECT_LE(span_residual(j.rows, a.rows), 1e-10) << n;
    }
}

TEST(Bases, JacobiDiagonal) {
  for (int n : {3, 8}) {
    auto cl = jacobi_vectors(n, 0.5, Sector::cl), q = jacobi_vectors(n, 0.5, Sector::q);
    for (int m = 1; m <= n; ++m) {
      EXPECT_NEAR(cl.rows(m - 1, 2 * m - 2), 1.0, 1e-14);
      EXPECT_NEAR(q.rows(m - 1, 2 * m - 2), 0.5, 1e-14);
    }
  }
}

TEST(GramSchmidt, OrthogonalSameSpanTriangular) {
  for (int n : {4, 20, 50})
    for (auto sec : {Sector::cl, Sector::q}) {
      auto j = jacobi_vectors(n, 0.5, sec);
      auto o = gram_schmidt_causal(j);
      EXPECT_LE(orthogonality_defect(o), 1e-10) << n;
      EXPECT_LE(span_residual(o.rows, j.rows), 1e-9) << n;
      for (int m = 1; m <= n; ++m)
        for (int k = 1; k <= n; ++k) {
          bool outside = sec == Sector::cl ? k < m : k > m;
          if (outside) EXPECT_EQ(o.rows.row(m - 1).segment(2 * k - 2, 2).norm(), 0.0);
        }
    }
}

TEST(Bases, RejectBadArguments) {
  EXPECT_THROW(jacobi_vectors(3, 1.0, Sector::cl), RangeError);
  EXPECT_THROW(adjugate_vectors(0, 0.5, Sector::cl), RangeError);
  EXPECT_THROW(jacobi_tail_envelope_error(jacobi_vectors(30, 0.5, Sector::q)), RangeError);
}

TEST(TailFit, JacobiAmplitudeAndFrequency) {
  auto j = jacobi_vectors(50, 0.5, Sector::cl);
  auto f = tail_fit(j, TailModel::half_power);
  auto pr = jacobi_tail_prediction(0.5);
  EXPECT_NEAR(f.odd.a / pr.amplitude, 1.0, 0.05);
  EXPECT_NEAR(f.even.a / pr.amplitude, 1.0, 0.05);
  EXPECT_NEAR(f.omega_free_odd, f.omega, 0.01);
  EXPECT_NEAR(f.exponent_odd, 0.5, 0.1);
}

TEST(TailFit, WrapPhase) {
  const double pi = std::numbers::pi;
  EXPECT_NEAR(wrap_phase(2.5 * pi), 0.5 * pi, 1e-12);
  EXPECT_NEAR(wrap_phase(-0.5 - 2 * pi), -0.5, 1e-12);
}
