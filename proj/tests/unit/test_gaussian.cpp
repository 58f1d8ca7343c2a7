#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pmdlab/gaussian.hpp"
#include "pmdlab/lattice.hpp"

using namespace pmdlab;

namespace {
Eigen::VectorXd V(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}
Eigen::MatrixXd M1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }
}  // namespace

TEST(NormalInterval, MatchesErfc) {
    EXPECT_NEAR(normal_interval(0, 1, -1, 1), oracle::phi(1) - oracle::phi(-1), 1e-15);
    EXPECT_GT(normal_interval(0, 1, 30, 31), 0.0);
}

TEST(DiscretizedGaussian, ReflectionSymmetry) {
    auto S = M1(0.09);
    EXPECT_NEAR(discretized_gaussian_pmf(V({0.5}), S, {0}), discretized_gaussian_pmf(V({0.5}), S, {1}), 1e-15);
}

TEST(DiscretizedGaussian, SixSigmaMass) {
    double s = 0;
    for (int x = -60; x <= 60; ++x) s += discretized_gaussian_pmf(V({0}), M1(100), {x});
    EXPECT_GE(s, 1 - 1e-6);
}

TEST(DiscretizedGaussian, DiagonalIsProduct) {
    Eigen::MatrixXd S = Eigen::Vector2d(2.0, 5.0).asDiagonal();
    for (int a = -2; a <= 3; ++a)
        for (int b = -3; b <= 4; ++b) {
            double want = oracle::discretized_normal(0.3, std::sqrt(2.0), a) * oracle::discretized_normal(1.1, std::sqrt(5.0), b);
            EXPECT_NEAR(discretized_gaussian_pmf(V({0.3, 1.1}), S, {a, b}), want, 1e-10);
        }
}

TEST(DiscretizedGaussian, CorrelatedMassSumsToOne) {
    Rng rng(4);
    std::normal_distribution<double> z;
    for (int d = 2; d <= 3; ++d) {
        Eigen::MatrixXd A(d, d);
        for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = z(rng);
        Eigen::MatrixXd S = A * A.transpose() + Eigen::MatrixXd::Identity(d, d) * 0.6;
        Eigen::VectorXd mu = Eigen::VectorXd::Constant(d, 0.2);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        const int r = static_cast<int>(std::ceil(7 * std::sqrt(es.eigenvalues().maxCoeff())));
        double total = 0;
        Point x(d, -r);
        while (true) {
            total += discretized_gaussian_pmf(mu, S, x);
            int i = 0;
            for (; i < d; ++i) {
                if (++x[i] <= r) break;
                x[i] = -r;
            }
            if (i == d) break;
        }
        EXPECT_NEAR(total, 1.0, 1e-7) << "d=" << d;
    }
}

// Equicorrelated boxes reduce to a 1-D integral over the shared factor.
double equicorrelated_box(const std::vector<double>& lo, const std::vector<double>& hi, double rho) {
    const double a = std::sqrt(rho), b = std::sqrt(1 - rho);
    const int steps = 4000;
    const double zmax = 9, h = 2 * zmax / steps;
    double s = 0;
    for (int i = 0; i <= steps; ++i) {
        const double zz = -zmax + i * h;
        double f = std::exp(-zz * zz / 2) / std::sqrt(2 * M_PI);
        for (std::size_t j = 0; j < lo.size(); ++j)
            f *= oracle::phi((hi[j] - a * zz) / b) - oracle::phi((lo[j] - a * zz) / b);
        s += f * ((i == 0 || i == steps) ? 1 : (i % 2 ? 4 : 2));
    }
    return s * h / 3;
}

TEST(DiscretizedGaussian, EquicorrelatedHigherDimensions) {
    for (int d : {3, 4, 5}) {
        const double rho = 0.4;
        Eigen::MatrixXd S = Eigen::MatrixXd::Constant(d, d, rho);
        S.diagonal().setOnes();
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
        for (int shift = 0; shift < 3; ++shift) {
            Point x(d, 0);
            x[0] = shift;
            std::vector<double> lo(d), hi(d);
            for (int j = 0; j < d; ++j) {
                lo[j] = static_cast<double>(x[j]) - 0.5;
                hi[j] = static_cast<double>(x[j]) + 0.5;
            }
            auto est = discretized_gaussian_pmf_estimate(mu, S, x);
            const double want = equicorrelated_box(lo, hi, rho);
            EXPECT_NEAR(est.value, want, d <= 3 ? 1e-9 : 2e-6 + 5 * est.error) << "d=" << d << " shift=" << shift;
        }
    }
}

TEST(DiscretizedGaussian, ZeroVarianceIsPointMass) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2, 2);
    S(0, 0) = 1.0;
    EXPECT_NEAR(discretized_gaussian_pmf(V({0, 2.4}), S, {0, 2}), oracle::discretized_normal(0, 1, 0), 1e-12);
    EXPECT_EQ(discretized_gaussian_pmf(V({0, 2.4}), S, {0, 3}), 0.0);
}

TEST(DiscretizedGaussian, RejectsNonPsd) {
    Eigen::MatrixXd S(2, 2);
    S << 1, 2, 2, 1;
    EXPECT_THROW(discretized_gaussian_pmf(V({0, 0}), S, {0, 0}), SingularCovariance);
}

TEST(BlockGaussian, PivotConstraintAndOneFreeCoordinate) {
    BlockGaussian bg(2, {GaussianBlock{{0, 1}, 1, 10, V({4.3}), M1(2.5)}});
    EXPECT_EQ(block_gaussian_pmf(bg, {4, 5}), 0.0);
    for (int a = 0; a <= 10; ++a)
        EXPECT_NEAR(block_gaussian_pmf(bg, {a, 10 - a}), oracle::discretized_normal(4.3, std::sqrt(2.5), a), 1e-12);
}

TEST(BlockGaussian, DisjointBlocksMultiply) {
    GaussianBlock b1{{0, 2}, 2, 8, V({3.0}), M1(1.5)};
    GaussianBlock b2{{1, 3}, 1, 6, V({2.2}), M1(0.8)};
    BlockGaussian both(4, {b1, b2});
    BlockGaussian only1(2, {GaussianBlock{{0, 1}, 1, 8, V({3.0}), M1(1.5)}});
    BlockGaussian only2(2, {GaussianBlock{{0, 1}, 0, 6, V({2.2}), M1(0.8)}});
    BlockGaussianEvaluator ev(both);
    for (int a = 1; a <= 5; ++a)
        for (int c = 1; c <= 4; ++c) {
            Point x{a, 6 - c, 8 - a, c};
            double want = block_gaussian_pmf(only1, {a, 8 - a}) * block_gaussian_pmf(only2, {6 - c, c});
            EXPECT_NEAR(block_gaussian_pmf(both, x), want, 1e-12);
            EXPECT_NEAR(ev.pmf(x), want, 1e-12);
        }
}

TEST(BlockGaussian, ValidatesStructure) {
    EXPECT_THROW(BlockGaussian(2, {GaussianBlock{{0, 1}, 3, 1, V({0}), M1(1)}}), InvalidArgument);
    EXPECT_THROW(BlockGaussian(3, {GaussianBlock{{0, 1}, 1, 1, V({0}), M1(1)}, GaussianBlock{{1, 2}, 2, 1, V({0}), M1(1)}}),
                 InvalidArgument);
}

TEST(BlockGaussianSample, ZeroCovarianceIsDeterministic) {
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2, 2);
    BlockGaussian bg(3, {GaussianBlock{{0, 1, 2}, 2, 9, V({2, 3}), Z}});
    Rng rng(1);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(block_gaussian_sample(bg, rng), (Point{2, 3, 4}));
}

TEST(BlockGaussianSample, EmpiricalMatchesPmfAndTotals) {
    BlockGaussian bg(2, {GaussianBlock{{0, 1}, 1, 40, V({18.7}), M1(6.0)}});
    Rng rng(17);
    std::vector<Point> xs;
    for (int i = 0; i < 100000; ++i) {
        xs.push_back(block_gaussian_sample(bg, rng));
        ASSERT_EQ(xs.back()[0] + xs.back()[1], 40);
    }
    EXPECT_LE(tv_distance(empirical_pmf(xs), tabulate_block_gaussian(bg)), 0.02);
}

TEST(TabulateGaussian, MassAndMean) {
    auto t = tabulate_gaussian_1d(12.3, 9.0);
    EXPECT_NEAR(t.total_mass(), 1.0, 1e-9);
    EXPECT_NEAR(t.mean()[0], 12.3, 1e-3);
}

// Rounding a sum versus summing roundings.
TEST(GaussianProperties, MergeBoundOneDimension) {
    Rng rng(8);
    std::uniform_real_distribution<double> u(2.0, 12.0);
    for (int t = 0; t < 25; ++t) {
        double s1 = u(rng), s2 = u(rng);
        auto joint = tabulate_gaussian_1d(0, s1 * s1 + s2 * s2);
        auto split = convolve(tabulate_gaussian_1d(0, s1 * s1), tabulate_gaussian_1d(0, s2 * s2));
        EXPECT_LE(tv_distance(joint, split), 1 / (2 * std::max(s1, s2)));
    }
}

TEST(GaussianProperties, OneDimensionalTvBound) {
    Rng rng(12);
    std::uniform_real_distribution<double> mu(-5, 5), sd(1, 6);
    for (int t = 0; t < 50; ++t) {
        double m1 = mu(rng), m2 = mu(rng), a = sd(rng), b = sd(rng);
        if (a > b) std::swap(a, b);
        double bound = 0.5 * (std::abs(m1 - m2) / a + (b * b - a * a) / (a * a));
        EXPECT_LE(tv_distance(tabulate_gaussian_1d(m1, a * a), tabulate_gaussian_1d(m2, b * b)), bound + 1e-9);
    }
}
