#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "pmdlab/errors.hpp"
#include "pmdlab/estimation.hpp"
#include "pmdlab/gaussian.hpp"
#include "pmdlab/lattice.hpp"

using namespace pmdlab;

namespace {

Eigen::MatrixXd rotation(double a) {
    Eigen::MatrixXd R(2, 2);
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return R;
}

Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// A^{1/2} (I + E) A^{1/2} with symmetric E of spectral norm `r`: directional ratio to A is exactly r.
Eigen::MatrixXd in_band(const Eigen::MatrixXd& a, double r, Rng& rng) {
    std::normal_distribution<double> z;
    const auto k = a.rows();
    Eigen::MatrixXd E(k, k);
    for (Eigen::Index i = 0; i < E.size(); ++i) E.data()[i] = z(rng);
    E = 0.5 * (E + E.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E);
    E *= r / es.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::MatrixXd h = sqrtm(a);
    return h * (Eigen::MatrixXd::Identity(k, k) + E) * h;
}

}  // namespace

TEST(EmpiricalMoments, ConstantAndTwoSamples) {
    std::vector<Point> same(10, Point{3, 4});
    auto m = empirical_moments(same);
    EXPECT_EQ(m.cov.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(m.mean[1], 4.0);
    auto two = empirical_moments({{1, 5}, {4, 1}});
    Eigen::Vector2d d(-3, 4);
    EXPECT_LE((two.cov - 0.5 * d * d.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    auto sub = empirical_moments({{1, 5, 9}, {4, 1, 9}}, {1});
    EXPECT_EQ(sub.mean.size(), 1);
    EXPECT_DOUBLE_EQ(sub.cov(0, 0), 8.0);
}

TEST(EmpiricalMoments, BinomialConcentration) {
    Rng rng(123);
    std::binomial_distribution<int> bin(100, 0.3);
    int good = 0;
    for (int t = 0; t < 200; ++t) {
        std::vector<Point> xs(10000);
        for (auto& x : xs) x = {bin(rng)};
        auto m = empirical_moments(xs);
        good += std::abs(m.mean[0] - 30) <= 1 && std::abs(m.cov(0, 0) - 21) <= 3;
    }
    EXPECT_GE(good, 180);
}

TEST(Directions, EigenDirectionSet) {
    Eigen::MatrixXd S(2, 2);
    S << 4, 0, 0, 9;
    auto dirs = eigen_direction_set(S);
    EXPECT_EQ(dirs.size(), 3u);
    for (const auto& y : dirs) EXPECT_GT(y.norm(), 0.0);
    Rng rng(1);
    auto rnd = sample_directions(S, 100, rng);
    EXPECT_EQ(rnd.size(), 100u);
    for (const auto& y : rnd) EXPECT_NEAR(y.norm(), 1.0, 1e-12);
}

TEST(DirectionalCheck, ExactEstimatePasses) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(2, 2) * 3;
    EmpiricalMoments est{100, Eigen::Vector2d(1, 2), S};
    auto rep = directional_error_check(est, Eigen::Vector2d(1, 2), S, eigen_direction_set(S), 0.01);
    EXPECT_TRUE(rep.pass());
    EXPECT_THROW(directional_error_check(est, Eigen::Vector2d(1, 2), S * 0.1, eigen_direction_set(S), 0.1),
                 PreconditionViolation);
}

TEST(EigenCandidates, ContainsReferenceAndCoversBand) {
    auto c = eigen_candidates({1.0, 7.5}, 0, 0, 0.1);
    for (std::size_t z = 0; z < 2; ++z) {
        const double lam = z == 0 ? 1.0 : 7.5;
        EXPECT_TRUE(std::any_of(c[z].begin(), c[z].end(), [&](double v) { return std::abs(v - lam) < 1e-12; }));
    }
    const double eps1 = 0.2, eps2 = 0.5, eps = 0.1;
    auto w = eigen_candidates({4.0}, eps1, eps2, eps);
    for (double target = 4 * (1 - eps1) - eps2; target <= 4 * (1 + eps1) + eps2; target += 0.01) {
        bool hit = std::any_of(w[0].begin(), w[0].end(),
                               [&](double v) { return v >= target * (1 - eps) && v <= target * (1 + eps); });
        EXPECT_TRUE(hit) << target;
    }
    EXPECT_THROW(eigen_candidates({0.5}, 0, 0, 0.1), PreconditionViolation);
}

TEST(EigenCandidates, SizeBoundedByShiftCountTimesGeometricSpan) {
    const double eps = 0.1, eps1 = 0.1, lam = 5.0;
    for (double eps2 : {0.0, 1.0, 2.0, 4.0}) {
        const auto s = eigen_candidates({lam}, eps1, eps2, eps)[0].size();
        const double L = std::max(1.0, lam * (1 - eps1) - eps2), U = lam * (1 + eps1) + eps2;
        const double lo = std::min(0.5, L / (lam + eps2)), hi = std::max(1.5, U / std::max(0.5, lam - eps2));
        const double shifts = 2 * std::floor(4 * eps2) + 1;
        const double per_shift = std::ceil(std::log(hi / lo) / std::log1p(eps)) + 2;
        EXPECT_LE(static_cast<double>(s), shifts * per_shift) << eps2;
    }
}

TEST(PsdCover, ContainsReferenceWhenBandIsZero) {
    Eigen::MatrixXd A(2, 2);
    A << 3, 1, 1, 2;
    PsdCoverSpec spec{0, 0, 0.1, 0.25};
    PsdCover cover(A, spec);
    bool found = false;
    std::size_t count = 0;
    while (auto b = cover.next()) {
        ++count;
        EXPECT_LE((*b - b->transpose()).cwiseAbs().maxCoeff(), 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*b);
        EXPECT_GE(es.eigenvalues().minCoeff(), 1 - 1e-9);
        found = found || (*b - A).cwiseAbs().maxCoeff() < 1e-9;
    }
    EXPECT_GT(count, 0u);
    EXPECT_TRUE(found);
}

TEST(PsdCover, EigenvaluesMatchCandidates) {
    Eigen::MatrixXd A(2, 2);
    A << 5, 1, 1, 3;
    PsdCover cover(A, PsdCoverSpec{0.1, 0, 0.1, 0.2});
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        auto B = in_band(A, 0.1, rng);
        auto idx = cover.locate(B);
        auto e = cover.element_at(idx);
        ASSERT_TRUE(e.has_value());
        auto lam = cover.eigenvalues_of(idx);
        std::sort(lam.begin(), lam.end());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*e);
        for (int i = 0; i < 2; ++i) EXPECT_NEAR(es.eigenvalues()[i], lam[i], 1e-9 * lam[i]);
    }
}

TEST(PsdCover, RotatedTargetIsCovered) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd D = Eigen::Vector2d(1.0, 1.2).asDiagonal();
    Eigen::MatrixXd B = rotation(0.3) * D * rotation(0.3).transpose();
    PsdCover cover(A, PsdCoverSpec{0.2, 0, 0.1});
    Rng rng(8);
    auto dirs = sample_directions(B, 1000, rng);
    auto e = cover.element_at(cover.locate(B));
    ASSERT_TRUE(e.has_value());
    EXPECT_LE(directional_ratio(B, *e, dirs), 0.1);
}

TEST(PsdCover, EnumerationLimit) {
    PsdCover cover(Eigen::MatrixXd::Identity(2, 2) * 4, PsdCoverSpec{0.1, 0, 0.1});
    cover.set_enumeration_limit(10);
    EXPECT_THROW(
        {
            while (cover.next()) {
            }
        },
        CapExceeded);
}

TEST(DirectionalRatio, ExactDominatesSampled) {
    Rng rng(2);
    Eigen::MatrixXd A(3, 3);
    A << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
    auto B = in_band(A, 0.15, rng);
    EXPECT_NEAR(exact_directional_ratio(A, B), 0.15, 1e-9);
    auto dirs = sample_directions(A, 500, rng);
    EXPECT_LE(directional_ratio(A, B, dirs), 0.15 + 1e-12);
}

TEST(DriftCheck, Precondition) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(2, 2) * 2000;
    auto v = rounding_drift_check(S, S * 1.05, 0.1, eigen_direction_set(S));
    EXPECT_TRUE(v.pass);
    EXPECT_THROW(rounding_drift_check(S * 0.1, S, 0.1, eigen_direction_set(S)), PreconditionViolation);
}

TEST(GaussianTvBound, DominatesNumericTvInOneDimension) {
    Rng rng(4);
    std::uniform_real_distribution<double> mu(-3, 3), var(4, 100), rel(0.9, 1.1);
    for (int t = 0; t < 50; ++t) {
        double m1 = mu(rng), v1 = var(rng);
        double m2 = m1 + 0.2 * mu(rng), v2 = v1 * rel(rng);
        Eigen::VectorXd a(1), b(1);
        a << m1;
        b << m2;
        double bound = directional_gaussian_tv_bound(a, Eigen::MatrixXd::Constant(1, 1, v1), b,
                                                     Eigen::MatrixXd::Constant(1, 1, v2));
        double tv = tv_distance(tabulate_gaussian_1d(m1, v1), tabulate_gaussian_1d(m2, v2));
        EXPECT_LE(tv, bound + 1e-9);
    }
}

TEST(BlockGuesses, CountsAndTotals) {
    EXPECT_EQ(block_structure_guesses(1).size(), 1u);
    EXPECT_EQ(block_structure_guesses(2).size(), 3u);
    EXPECT_EQ(block_structure_guesses(3).size(), 10u);
    for (const auto& s : block_structure_guesses(4)) {
        std::vector<int> all;
        for (std::size_t b = 0; b < s.blocks.size(); ++b) {
            all.insert(all.end(), s.blocks[b].begin(), s.blocks[b].end());
            EXPECT_NE(std::find(s.blocks[b].begin(), s.blocks[b].end(), s.pivots[b]), s.blocks[b].end());
        }
        std::sort(all.begin(), all.end());
        EXPECT_EQ(all, (std::vector<int>{0, 1, 2, 3}));
    }
    BlockStructure two{{{0}, {1}}, {0, 1}};
    auto g = block_total_guesses({3, 1}, two, 2);
    EXPECT_EQ(g.size(), 3u * 2u);
    EXPECT_EQ(g.front(), (std::vector<std::int64_t>{3, 1}));
}

TEST(MeanCover, GridShape) {
    Eigen::MatrixXd S(2, 2);
    S << 4, 0, 0, 9;
    auto pts = mean_cover(Eigen::Vector2d(1, 1), S, 0.05, 0.1);
    EXPECT_EQ(pts.size(), 25u);
    double far = 0;
    for (const auto& p : pts) far = std::max(far, std::abs(p[1] - 1));
    EXPECT_NEAR(far, 0.1 * 3, 1e-12);
}
