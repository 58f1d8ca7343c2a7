#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pmdlab/covers.hpp"
#include "pmdlab/errors.hpp"
#include "pmdlab/lattice.hpp"

using namespace pmdlab;

namespace {

std::vector<ParamMatrix> collect(GridPmdCover c) {
    std::vector<ParamMatrix> out;
    while (auto m = c.next()) out.push_back(std::move(*m));
    return out;
}

double nearest_tv(const SparsePmf& target, const std::vector<ParamMatrix>& cover) {
    double best = 1.0;
    for (const auto& m : cover) best = std::min(best, tv_distance(target, pmd_pmf_exact(m)));
    return best;
}

std::vector<Point> simplex_points(int d, int n) {
    std::vector<Point> out;
    Point x(d, 0);
    while (true) {
        std::int64_t s = 0;
        for (auto v : x) s += v;
        if (s <= n) out.push_back(x);
        int i = 0;
        for (; i < d; ++i) {
            if (++x[i] <= n) break;
            x[i] = 0;
        }
        if (i == d) break;
    }
    return out;
}

double l1_to_approximator(const GmdParams& g, const std::vector<double>& q, int w) {
    auto exact = gmd_pmf_exact(g);
    RoosApproximator approx(g, q, w);
    double l1 = 0;
    for (const auto& x : simplex_points(g.dims(), g.n())) l1 += std::abs(exact.at(x) - approx(x));
    return l1;
}

GmdParams random_gmd(Rng& rng, int n, int d) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
        std::vector<double> r(d + 1);
        for (auto& x : r) x = u(rng);
        r = oracle::normalize(r);
        v.insert(v.end(), r.begin(), r.begin() + d);
    }
    return GmdParams(n, d, v);
}

}  // namespace

TEST(GridRows, SingleRowHalfGrid) {
    auto all = collect(grid_cover_sparse_pmd(1, 2, 0.5));
    ASSERT_EQ(all.size(), 3u);
    std::set<std::vector<double>> rows;
    for (auto& m : all) rows.insert(m.rows()[0]);
    EXPECT_EQ(rows, (std::set<std::vector<double>>{{0, 1}, {0.5, 0.5}, {1, 0}}));
}

TEST(GridRows, UnitGranularityIsDeterministicAssignments) {
    auto all = collect(grid_cover_sparse_pmd(2, 3, 1.0));
    EXPECT_EQ(all.size(), 6u);  // multisets of size 2 over 3 unit vectors
    GridPmdCover c(2, 3, 1.0);
    EXPECT_DOUBLE_EQ(c.size(), 6.0);
}

TEST(GridRows, NearestElementWithinRadius) {
    auto cover = collect(grid_cover_sparse_pmd(2, 2, 0.25));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto target = pmd_pmf_exact(fixtures::uniform_matrix(seed, 2, 2));
        EXPECT_LE(nearest_tv(target, cover), 2 * 2 * 0.25);
    }
}

TEST(GridRows, RadiusShrinksWithGranularity) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto target = pmd_pmf_exact(fixtures::uniform_matrix(seed + 40, 3, 2));
        double prev = 1.0;
        for (double g : {0.5, 0.25, 0.125}) {
            double r = nearest_tv(target, collect(grid_cover_sparse_pmd(3, 2, g)));
            EXPECT_LE(r, 3 * 2 * g);
            EXPECT_LE(r, prev + 1e-12);
            prev = r;
        }
    }
}

TEST(GaussianCover, HandCountOneFreeDimension) {
    // Totals 0..4, means 0..t on the unit cube grid, variances {1, 4} from diagonal factors {1, 2}.
    GridGaussianCover c(4, 2, GridSpec{0.1, 1.0, 1.0});
    std::size_t count = 0;
    while (auto b = c.next()) {
        ++count;
        for (const auto& blk : b->blocks()) {
            if (blk.cov.rows() == 0) continue;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk.cov);
            EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
        }
    }
    EXPECT_EQ(count, 30u);
    EXPECT_DOUBLE_EQ(c.size(), 30.0);
}

TEST(GaussianCover, RecoversGridTarget) {
    GridGaussianCover c(9, 3, GridSpec{0.1, 1.0, 1.0, 9, 9});
    bool found = false;
    while (auto b = c.next()) {
        const auto& blk = b->blocks()[0];
        Eigen::MatrixXd L(2, 2);
        L << 2, 0, -1, 1;
        Eigen::Vector2d mu(3, 4);
        if (blk.total == 9 && (blk.mean - mu).norm() < 1e-12 && (blk.cov - L * L.transpose()).norm() < 1e-12) found = true;
    }
    EXPECT_TRUE(found);
}

TEST(MomentProfile, BasicEntries) {
    auto pm = ParamMatrix::from_rows({{0.2, 0.8}, {0.4, 0.6}});
    auto p0 = moment_profile(pm, 0);
    ASSERT_EQ(p0.values.size(), 1u);
    EXPECT_EQ(p0.values[0], 2.0);
    auto p1 = moment_profile(pm, 1);
    EXPECT_NEAR(p1.values[1], 0.6, 1e-15);
    auto swapped = ParamMatrix::from_rows({{0.4, 0.6}, {0.2, 0.8}});
    EXPECT_EQ(moment_profile(swapped, 3).values, moment_profile(pm, 3).values);
}

TEST(MeanBoxes, GroupingConventions) {
    std::vector<std::vector<double>> same(5, {0.3, 0.2, 0.5});
    EXPECT_EQ(group_by_mean_box(ParamMatrix::from_rows(same)).size(), 1u);
    const int B = mean_box_count(2);
    EXPECT_EQ(B, 11);
    const double edge = 1.0 / B;
    auto g = group_by_mean_box(ParamMatrix::from_rows({{edge, 1 - edge}, {edge + 1e-6, 1 - edge - 1e-6}}));
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g.begin()->first, std::vector<int>{1});
}

TEST(MeanBoxes, SpreadWithinGroups) {
    auto pm = fixtures::uniform_matrix(17, 200, 3);
    const double width = 1.0 / mean_box_count(3);
    for (const auto& [box, rows] : group_by_mean_box(pm))
        for (int j = 0; j < 2; ++j) {
            double lo = 1, hi = 0;
            for (int i : rows) {
                lo = std::min(lo, pm(i, j));
                hi = std::max(hi, pm(i, j));
            }
            EXPECT_LE(hi - lo, width + 1e-12);
        }
}

TEST(MomentMatching, DeduplicatesAndNeverGrows) {
    std::vector<ParamMatrix> same(4, fixtures::uniform_matrix(2, 3, 2));
    EXPECT_EQ(moment_matching_cover(same, 2, {}).size(), 1u);
    auto grid = collect(grid_cover_sparse_pmd(3, 2, 0.1));
    for (int w : {1, 2, 3}) {
        auto kept = moment_matching_cover(grid, w, {});
        EXPECT_LE(kept.size(), grid.size());
    }
}

TEST(MomentMatching, RadiusGrowsByAtMostTwiceTheBound) {
    auto grid = collect(grid_cover_sparse_pmd(3, 2, 0.1));
    const int w = 3;
    std::vector<ParamMatrix> kept;
    for (auto i : moment_matching_cover(grid, w, {})) kept.push_back(grid[i]);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto target = pmd_pmf_exact(fixtures::uniform_matrix(seed + 7, 3, 2));
        EXPECT_LE(nearest_tv(target, kept), nearest_tv(target, grid) + 2 * std::pow(2.0, -w));
    }
}

TEST(Roos, CoefficientBasics) {
    GmdParams g(2, 1, {0.3, 0.5});
    auto c = roos_coefficients(g, {0.2}, 2);
    EXPECT_DOUBLE_EQ(c.at({0}), 1.0);
    // (1 + 0.1 z)(1 + 0.3 z) = 1 + 0.4 z + 0.03 z^2
    EXPECT_NEAR(c.at({1}), 0.4, 1e-15);
    EXPECT_NEAR(c.at({2}), 0.03, 1e-15);
    GmdParams flat(3, 2, {0.2, 0.3, 0.2, 0.3, 0.2, 0.3});
    for (const auto& [u, a] : roos_coefficients(flat, {0.2, 0.3}, 3))
        if (u[0] + u[1] > 0) EXPECT_NEAR(a, 0.0, 1e-15);
}

TEST(Roos, OrderZeroWithMatchedRowsIsMultinomial) {
    GmdParams flat(4, 2, {0.2, 0.3, 0.2, 0.3, 0.2, 0.3, 0.2, 0.3});
    for (const auto& x : simplex_points(2, 4))
        EXPECT_NEAR(roos_approximator_pmf(flat, {0.2, 0.3}, 0, x), gmd_pmf_exact(flat).at(x), 1e-14);
}

TEST(Roos, FullOrderIdentity) {
    Rng rng(99);
    std::uniform_int_distribution<int> nd(1, 6), dd(1, 2);
    for (int t = 0; t < 20; ++t) {
        auto g = random_gmd(rng, nd(rng), dd(rng));
        auto q = mean_matched_q(g);
        RoosApproximator approx(g, q, g.n());
        auto exact = gmd_pmf_exact(g);
        for (const auto& x : simplex_points(g.dims(), g.n())) EXPECT_NEAR(approx(x), exact.at(x), 1e-10);
    }
}

TEST(Roos, GapBoundedByAlphaSeries) {
    Rng rng(5);
    int checked = 0;
    for (int t = 0; t < 40; ++t) {
        auto g = random_gmd(rng, 5, 1);
        auto q = mean_matched_q(g);
        const double a = roos_alpha(g, q);
        if (!(a < 1)) continue;
        ++checked;
        for (int w = 0; w <= 4; ++w) EXPECT_LE(l1_to_approximator(g, q, w), std::pow(a, w + 1) / (1 - a) + 1e-12);
    }
    EXPECT_GT(checked, 0);
}

TEST(Roos, SmallSpreadGroupsMeetTwoToMinusW) {
    Rng rng(31);
    for (int d = 1; d <= 2; ++d) {
        const int k = d + 1;
        const double spread = 1.0 / (4 * std::exp(1.0) * k * k * k);
        std::uniform_real_distribution<double> u(0, spread);
        for (int n = 2; n <= 8; n += 3) {
            std::vector<double> v;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) v.push_back(0.2 + u(rng));
            GmdParams g(n, d, v);
            auto q = mean_matched_q(g);
            for (int w = 1; w <= std::min(3, n); ++w) EXPECT_LE(l1_to_approximator(g, q, w), std::pow(2.0, -w)) << "d=" << d << " n=" << n;
        }
    }
}

TEST(Roos, DefaultOrder) {
    EXPECT_EQ(default_profile_order(100, 2, 0.25), 4);
    EXPECT_EQ(default_profile_order(3, 3, 0.01), 3);
}
