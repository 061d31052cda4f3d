#include <dprune/nn/random.hpp>
#include <dprune/nn/synthetic.hpp>
#include <dprune/spectral/eigen.hpp>
#include <dprune/spectral/hessian.hpp>
#include <dprune/spectral/zero_space.hpp>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace dprune;

namespace {

Mat random_orthogonal(Index d, std::uint64_t seed) {
  Rng rng(seed);
  Mat g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  return Eigen::HouseholderQR<Mat>(g).householderQ();
}

Mat random_symmetric(Index d, std::uint64_t seed) {
  Rng rng(seed);
  Mat a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = rng.normal();
  return 0.5 * (a + a.transpose());
}

Dataset make_regression_data(std::uint64_t seed, Index n, Index in, Index out) {
  Rng rng(seed);
  Dataset d;
  d.inputs.resize(n, in);
  d.targets.resize(n, out);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < in; ++j) d.inputs(i, j) = rng.normal();
    for (Index j = 0; j < out; ++j) d.targets(i, j) = rng.normal();
  }
  return d;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(DenseHessian, QuadraticIsExact) {
  const Mat q = random_orthogonal(5, 1);
  Vector<double> lam(5);
  lam << 4, 3, 1, 0.5, 0;
  const Mat h = q * lam.asDiagonal() * q.transpose();
  const QuadraticObjective obj(h, Vector<double>::Ones(5));
  EXPECT_LE((dense_hessian(obj, Vector<double>::Zero(5)) - h).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DenseHessian, LinearRegressionClosedForm) {
  const NetworkSpec spec{{4, 1}, Activation::identity, LossKind::squared_error, false};
  const Dataset d = make_regression_data(2, 30, 4, 1);
  const Mat expected = 2.0 / 30.0 * d.inputs.transpose() * d.inputs;
  EXPECT_LE((dense_hessian(spec, Vector<double>::Ones(4), d) - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(DenseHessian, TanhMlpSymmetricAndMatchesHvp) {
  const NetworkSpec spec{{3, 8, 3}, Activation::tanh, LossKind::squared_error, true};  // d = 59
  const Dataset d = make_regression_data(3, 20, 3, 3);
  const ParamVector w = init_params(spec, 4);
  const Mat h = dense_hessian(spec, w, d);
  EXPECT_EQ(h, h.transpose());
  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    ParamVector v(w.size());
    for (Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
    EXPECT_LE((hvp(spec, w, d, v) - h * v).norm(), 1e-6 * std::max(1.0, (h * v).norm()));
  }
}

TEST(DenseHessian, GuardsDimension) {
  const QuadraticObjective big(Mat::Identity(kDenseHessianLimit + 1, kDenseHessianLimit + 1),
                               Vector<double>::Zero(kDenseHessianLimit + 1));
  EXPECT_THROW(dense_hessian(big, Vector<double>::Zero(kDenseHessianLimit + 1)), DomainError);
}

TEST(Hvp, QuadraticAndHomogeneity) {
  const Mat h = random_symmetric(6, 9);
  const QuadraticObjective obj(h, Vector<double>::Zero(6));
  Vector<double> v = Vector<double>::LinSpaced(6, -1, 1);
  EXPECT_LE((hvp(obj, Vector<double>::Ones(6), v) - h * v).norm(), 1e-8);
  const Vector<double> tiny = 1e-9 * v;
  EXPECT_LE((hvp(obj, Vector<double>::Ones(6), tiny) - 1e-9 * (h * v)).norm(), 1e-14);
  EXPECT_THROW(hvp(obj, Vector<double>::Ones(6), Vector<double>::Zero(6)), DomainError);
}

TEST(DenseEig, DiagonalAndIdentity) {
  Mat a = Mat::Zero(3, 3);
  a.diagonal() << 1, 3, 0;
  const Spectrum s = dense_eig(a);
  EXPECT_DOUBLE_EQ(s.eigenvalues(0), 3);
  EXPECT_DOUBLE_EQ(s.eigenvalues(1), 1);
  EXPECT_NEAR(s.eigenvalues(2), 0, 1e-15);
  EXPECT_NEAR(std::abs(s.eigenvectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(s.eigenvectors(0, 1)), 1.0, 1e-15);
  const Spectrum id = dense_eig(Mat::Identity(4, 4));
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(id.eigenvalues(i), 1.0);
}

TEST(DenseEig, RotatedDiagonalReconstructs) {
  const Mat q = random_orthogonal(8, 3);
  Vector<double> lam = Vector<double>::LinSpaced(8, 5, -2);
  const Mat a = q * lam.asDiagonal() * q.transpose();
  const Spectrum s = dense_eig(a);
  EXPECT_LE((s.eigenvalues - lam).cwiseAbs().maxCoeff(), 1e-12);
  const Mat rec = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
  EXPECT_LE((rec - a).norm(), 1e-8 * a.norm());
  EXPECT_LE((s.eigenvectors.transpose() * s.eigenvectors - Mat::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DenseEig, RejectsNonSymmetric) {
  Mat a = Mat::Identity(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(dense_eig(a), DomainError);
}

TEST(Lanczos, RandomSymmetricMatchesDense) {
  const Mat a = random_symmetric(300, 11);
  const Spectrum dense = dense_eig(a);
  const Spectrum lz = lanczos_topk(matrix_operator(a), 300, 30);
  const Spectrum pos = keep_positive(lz, 10);
  ASSERT_EQ(pos.size(), 10);
  for (Index i = 0; i < 10; ++i) EXPECT_LE(rel_err(pos.eigenvalues(i), dense.eigenvalues(i)), 1e-6);
  for (Index i = 0; i < lz.size(); ++i) {
    EXPECT_LE((a * lz.eigenvectors.col(i) - lz.eigenvalues(i) * lz.eigenvectors.col(i)).norm(), 1e-6 * a.norm());
  }
}

TEST(Lanczos, GappedDiagonalConvergesFast) {
  Vector<double> diag = Vector<double>::Constant(200, 0.01);
  diag.head(3) << 100, 50, 25;
  const Mat a = diag.asDiagonal();
  int calls = 0;
  const LinearOperator op = [&](const ParamVector& x) {
    ++calls;
    return ParamVector(a * x);
  };
  const Spectrum s = lanczos_topk(op, 200, 3);
  EXPECT_NEAR(s.eigenvalues(0), 100, 1e-8);
  EXPECT_NEAR(s.eigenvalues(2), 25, 1e-8);
  EXPECT_LT(calls, 100);
}

TEST(Lanczos, NegativeExtremesAreFilteredOut) {
  const Mat q = random_orthogonal(40, 2);
  Vector<double> lam = Vector<double>::LinSpaced(40, 0.1, 1.0);
  lam(0) = -10;
  lam(1) = -8;
  lam(39) = 5;
  const Mat a = q * lam.asDiagonal() * q.transpose();
  const Spectrum lm = lanczos_topk(matrix_operator(a), 40, 4);
  EXPECT_TRUE((lm.eigenvalues.array() < 0).any());
  const Spectrum pos = keep_positive(lm, 10);
  EXPECT_TRUE((pos.eigenvalues.array() > 0).all());
  EXPECT_NEAR(pos.eigenvalues(0), 5, 1e-9);
}

TEST(Lanczos, RepeatedAndZeroEigenvalues) {
  Vector<double> diag = Vector<double>::Zero(30);
  diag.head(4) << 2, 2, 2, 1;
  const Spectrum s = lanczos_topk(matrix_operator(diag.asDiagonal()), 30, 4);
  EXPECT_NEAR(s.eigenvalues(0), 2, 1e-10);
  EXPECT_NEAR(s.eigenvalues(2), 2, 1e-10);
  EXPECT_NEAR(s.eigenvalues(3), 1, 1e-10);
}

TEST(Lanczos, ReportsNonConvergence) {
  const Mat a = random_symmetric(200, 5);
  LanczosOptions o;
  o.max_steps = 12;
  try {
    lanczos_topk(matrix_operator(a), 200, 10, o);
    FAIL() << "expected LanczosNotConverged";
  } catch (const LanczosNotConverged& e) {
    EXPECT_GT(e.residuals().size(), 0);
  }
}

TEST(ZeroSpace, ExactZeros) {
  Mat a = Mat::Zero(3, 3);
  a(0, 0) = 2;
  const ZeroSpace zs = zero_space(dense_eig(a), 1e-8, 0.0);
  ASSERT_EQ(zs.rank(), 2);
  Mat expected = Mat::Zero(3, 2);
  expected(1, 0) = 1;
  expected(2, 1) = 1;
  EXPECT_LE(max_principal_angle(zs.basis, expected), 1e-12);
  EXPECT_EQ(zero_space(dense_eig(Mat::Identity(3, 3))).rank(), 0);
  EXPECT_THROW(zero_space(Spectrum{}), DomainError);
}

TEST(ZeroSpace, RankDeficientRegression) {
  const SyntheticSpec spec{SyntheticKind::rank_deficient_regression, 3, 60, 10, 4, 2, 0.1, 3.0};
  const SyntheticData sd = make_synthetic(spec);
  const NetworkSpec net{{10, 1}, Activation::identity, LossKind::squared_error, false};
  const ZeroSpace zs = zero_space(dense_eig(dense_hessian(net, Vector<double>::Ones(10), sd.data)));
  ASSERT_EQ(zs.rank(), 6);
  EXPECT_LE(max_principal_angle(zs.basis, sd.null_basis), 1e-6);
  for (Index i = 0; i < zs.rank(); ++i) {
    const ParamVector b = zs.basis.col(i);
    EXPECT_LE(std::abs(b.dot(dense_hessian(net, Vector<double>::Ones(10), sd.data) * b)), zs.tol_used);
  }
}

TEST(Project, Examples) {
  ZeroSpace zs;
  zs.basis = Mat::Constant(2, 1, 1.0 / std::sqrt(2.0));
  Vector<double> v(2);
  v << 1, -1;
  EXPECT_LE(project(zs, v).norm(), 1e-15);
  Vector<double> in(2);
  in << 3, 3;
  EXPECT_LE((project(zs, in) - in).norm(), 1e-15);
}

TEST(Project, IdempotentAndPythagorean) {
  const Mat q = random_orthogonal(12, 4);
  ZeroSpace zs;
  zs.basis = q.leftCols(5);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    Vector<double> v(12);
    for (Index j = 0; j < 12; ++j) v(j) = rng.normal();
    const Vector<double> p = project(zs, v);
    EXPECT_LE((project(zs, p) - p).norm(), 1e-12);
    EXPECT_NEAR(v.squaredNorm(), p.squaredNorm() + (v - p).squaredNorm(), 1e-10);
  }
}

TEST(GradCovariance, Examples) {
  const NetworkSpec spec{{1, 1}, Activation::identity, LossKind::squared_error, false};
  Dataset same;
  same.inputs = Mat::Constant(5, 1, 2.0);
  same.targets = Mat::Constant(5, 1, 1.0);
  ParamVector w(1);
  w << 0.3;
  EXPECT_LE(grad_covariance(spec, w, same).cwiseAbs().maxCoeff(), 0.0);

  // Per-example gradients 2(w x - y) x: with x = 1, targets y = +/-1 and w = 0
  // they are -2 and +2, so the covariance is g g^T = 4.
  Dataset two;
  two.inputs = Mat::Constant(2, 1, 1.0);
  two.targets.resize(2, 1);
  two.targets << 1.0, -1.0;
  EXPECT_NEAR(grad_covariance(spec, ParamVector::Zero(1), two)(0, 0), 4.0, 1e-14);

  Dataset single = same.subset(std::vector<Index>{0});
  EXPECT_THROW(grad_covariance(spec, w, single), DomainError);
}

TEST(GradCovariance, PsdOnRandomMlp) {
  const NetworkSpec spec{{2, 5, 1}, Activation::tanh, LossKind::squared_error, true};
  const Dataset d = make_regression_data(7, 25, 2, 1);
  const Mat c = grad_covariance(spec, init_params(spec, 1), d);
  EXPECT_EQ(c, c.transpose());
  EXPECT_GE(dense_eig(c).eigenvalues.minCoeff(), -1e-10);
}

TEST(ProjectionFraction, Examples) {
  const Mat q = random_orthogonal(100, 8);
  const TopSubspace top{q.leftCols(10).transpose()};
  EXPECT_NEAR(projection_fraction(top, q.col(3)), 1.0, 1e-12);
  EXPECT_NEAR(projection_fraction(top, q.col(50)), 0.0, 1e-12);
  EXPECT_THROW(projection_fraction(top, ParamVector::Zero(100)), DomainError);
  Rng rng(12);
  double mean = 0.0;
  constexpr int kDraws = 4000;
  for (int k = 0; k < kDraws; ++k) {
    ParamVector z(100);
    for (Index j = 0; j < 100; ++j) z(j) = rng.normal();
    const double f = projection_fraction(top, z);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    mean += f / kDraws;
  }
  EXPECT_NEAR(mean, std::sqrt(0.1), 0.01);
}

TEST(SpectrumCsv, WritesValuesAndVectors) {
  const auto dir = std::filesystem::temp_directory_path() / "dprune_spectrum_csv";
  std::filesystem::create_directories(dir);
  const Spectrum s = dense_eig(Mat::Identity(3, 3));
  write_spectrum_csv(s, (dir / "v.csv").string(), (dir / "e.csv").string());
  std::ifstream is(dir / "v.csv");
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "index,eigenvalue,residual");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_TRUE(std::filesystem::exists(dir / "e.csv"));
}
