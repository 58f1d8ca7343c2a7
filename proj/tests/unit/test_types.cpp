#include <gtest/gtest.h>

#include <cstdlib>
#include <limits>

#include "pmdlab/errors.hpp"
#include "pmdlab/types.hpp"

using namespace pmdlab;

TEST(ParamMatrix, RejectsBadRows) {
    EXPECT_THROW(ParamMatrix(1, 2, {0.5, 0.6}), InvalidArgument);
    EXPECT_THROW(ParamMatrix(1, 2, {-0.1, 1.1}), InvalidArgument);
    EXPECT_THROW(ParamMatrix(2, 2, {0.5, 0.5}), InvalidArgument);
    EXPECT_THROW(ParamMatrix(1, 0, {}), InvalidArgument);
}

TEST(ParamMatrix, RowsSelectStack) {
    auto pm = ParamMatrix::from_rows({{0.2, 0.8}, {1.0, 0.0}, {0.5, 0.5}});
    EXPECT_EQ(pm.n(), 3);
    EXPECT_EQ(pm.k(), 2);
    EXPECT_DOUBLE_EQ(pm(1, 0), 1.0);
    auto s = pm.select({2, 0});
    EXPECT_DOUBLE_EQ(s(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(s(1, 1), 0.8);
    auto st = s.stack(pm);
    EXPECT_EQ(st.n(), 5);
    EXPECT_EQ(st.rows()[4], (std::vector<double>{0.5, 0.5}));
    EXPECT_THROW(pm.stack(ParamMatrix(0, 3, {})), InvalidArgument);
}

TEST(ParamMatrix, EmptyMatrixKeepsK) {
    ParamMatrix pm(0, 3, {});
    EXPECT_EQ(pm.n(), 0);
    EXPECT_EQ(pm.k(), 3);
}

TEST(GmdParams, RoundTripThroughPmd) {
    auto pm = ParamMatrix::from_rows({{0.2, 0.3, 0.5}, {0.1, 0.1, 0.8}});
    auto g = GmdParams::from_pmd(pm, 2);
    EXPECT_EQ(g.dims(), 2);
    EXPECT_NEAR(g.invisible(0), 0.5, 1e-15);
    EXPECT_EQ(g.to_pmd(), pm);
    EXPECT_THROW(GmdParams(1, 2, {0.7, 0.6}), InvalidArgument);
}

TEST(SparsePmf, MergesSortsAndValidates) {
    SparsePmf p(1, {{{2}, 0.25}, {{0}, 0.5}, {{2}, 0.25}});
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p.entries()[0].first, Point{0});
    EXPECT_DOUBLE_EQ(p.at({2}), 0.5);
    EXPECT_DOUBLE_EQ(p.at({1}), 0.0);
    EXPECT_THROW(SparsePmf(1, {{{0}, 0.5}}), InvalidArgument);
    EXPECT_THROW(SparsePmf(1, {{{0}, 1.2}, {{1}, -0.2}}), InvalidArgument);
    EXPECT_THROW(SparsePmf(2, {{{0}, 1.0}}), InvalidArgument);
}

TEST(SparsePmf, SubMeasureAndPruning) {
    auto m = SparsePmf::measure(1, {{{0}, 0.3}});
    EXPECT_NEAR(m.total_mass(), 0.3, 1e-15);
    SparsePmf p(1, {{{0}, 1.0}, {{1}, 1e-17}});
    EXPECT_EQ(p.size(), 1u);
    EXPECT_NEAR(p.pruned_mass(), 1e-17, 1e-30);
}

TEST(SparsePmf, MeanAndMap) {
    SparsePmf p(2, {{{0, 2}, 0.5}, {{2, 0}, 0.5}});
    auto mu = p.mean();
    EXPECT_DOUBLE_EQ(mu[0], 1.0);
    EXPECT_DOUBLE_EQ(mu[1], 1.0);
    auto proj = p.map(1, [](const Point& x) { return Point{x[0] + x[1]}; });
    EXPECT_EQ(proj.size(), 1u);
    EXPECT_DOUBLE_EQ(proj.at({2}), 1.0);
}

TEST(SupportCap, ReadsEnvironment) {
    ::setenv("PMDLAB_SUPPORT_CAP", "1234", 1);
    EXPECT_EQ(support_cap(), 1234u);
    ::unsetenv("PMDLAB_SUPPORT_CAP");
    EXPECT_EQ(support_cap(), 10000000u);
}
