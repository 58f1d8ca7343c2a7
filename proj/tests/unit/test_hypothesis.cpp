#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pmdlab/errors.hpp"
#include "pmdlab/hypothesis.hpp"
#include "pmdlab/lattice.hpp"

using namespace pmdlab;

namespace {
Eigen::VectorXd V1(double v) { return Eigen::VectorXd::Constant(1, v); }
Eigen::MatrixXd M1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

StructuralDecomposition small_hybrid() {
    BlockGaussian bg(3, {GaussianBlock{{0, 1}, 1, 12, V1(5.2), M1(2.0)}, GaussianBlock{{2}, 2, 4, Eigen::VectorXd(0), Eigen::MatrixXd(0, 0)}});
    return {bg, ParamMatrix::from_rows({{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}})};
}
}  // namespace

TEST(Hybrid, EmptySparseIsGaussian) {
    BlockGaussian bg(2, {GaussianBlock{{0, 1}, 0, 10, V1(3.5), M1(1.7)}});
    StructuralDecomposition sd{bg, ParamMatrix(0, 2, {})};
    for (int a = 0; a <= 10; ++a) EXPECT_NEAR(hybrid_pmf_at(sd, {10 - a, a}), block_gaussian_pmf(bg, {10 - a, a}), 1e-15);
}

TEST(Hybrid, ZeroVarianceGaussianShiftsSparse) {
    BlockGaussian bg(2, {GaussianBlock{{0, 1}, 1, 9, V1(4.0), M1(0.0)}});
    auto sp = ParamMatrix::from_rows({{0.3, 0.7}, {0.5, 0.5}});
    StructuralDecomposition sd{bg, sp};
    auto exact = pmd_pmf_exact(sp);
    for (const auto& [y, q] : exact.entries()) EXPECT_NEAR(hybrid_pmf_at(sd, {y[0] + 4, y[1] + 5}), q, 1e-15);
}

TEST(Hybrid, MatchesConvolutionOfComponents) {
    auto sd = small_hybrid();
    auto full = convolve(tabulate_block_gaussian(sd.gaussian), pmd_pmf_exact(sd.sparse));
    for (const auto& [x, q] : full.entries()) EXPECT_NEAR(hybrid_pmf_at(sd, x), q, 1e-13);
    EXPECT_NEAR(tabulate_decomposition(sd).total_mass(), 1.0, 1e-6);
}

TEST(Hypothesis, ExactForm) {
    Hypothesis h(ExactPmd{ParamMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}})}, "bin");
    EXPECT_EQ(h.tag(), "exact_pmd");
    EXPECT_EQ(h.label(), "bin");
    EXPECT_EQ(h.dims(), 2);
    EXPECT_NEAR(h.pmf_at({1, 1}), 0.5, 1e-15);
    EXPECT_EQ(h.pmf_at({3, 0}), 0.0);
    EXPECT_THROW(h.pmf_at({1}), InvalidArgument);
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        auto x = h.sample(rng);
        EXPECT_EQ(x[0] + x[1], 2);
    }
}

TEST(Hypothesis, GaussianPlusSparseForm) {
    auto sd = small_hybrid();
    Hypothesis h(GaussianPlusSparse{sd});
    EXPECT_EQ(h.tag(), "gaussian_plus_sparse");
    auto tab = h.tabulate();
    for (const auto& [x, q] : tab.entries()) EXPECT_NEAR(h.pmf_at(x), q, 1e-12);
    Rng rng(4);
    std::vector<Point> xs;
    for (int i = 0; i < 50000; ++i) xs.push_back(h.sample(rng));
    EXPECT_LE(tv_distance(empirical_pmf(xs), tab), 0.03);
}

TEST(Hypothesis, SiirvForm) {
    Hypothesis h(SiirvForm{2, 10.0, 4.0, {2.0 / 3, 1.0 / 3}});
    EXPECT_EQ(h.tag(), "siirv");
    EXPECT_EQ(h.dims(), 1);
    for (int z = 5; z <= 15; ++z) {
        const double g = oracle::discretized_normal(10.0, 2.0, z);
        EXPECT_NEAR(h.pmf_at({2 * z}), g * 2.0 / 3, 1e-13);
        EXPECT_NEAR(h.pmf_at({2 * z + 1}), g / 3, 1e-13);
    }
    EXPECT_NEAR(h.tabulate().total_mass(), 1.0, 1e-9);
    EXPECT_THROW(Hypothesis(SiirvForm{2, 0, 1, {1.0}}), InvalidArgument);
    EXPECT_THROW(Hypothesis(SiirvForm{1, 0, -1, {1.0}}), InvalidArgument);
}

TEST(Hypothesis, SiirvZeroVarianceIsPointMassPlusResidue) {
    Hypothesis h(SiirvForm{1, 7.0, 0.0, {1.0}});
    EXPECT_DOUBLE_EQ(h.pmf_at({7}), 1.0);
}

TEST(Hypothesis, TabulatedForm) {
    SparsePmf p(1, {{{3}, 0.25}, {{5}, 0.75}});
    Hypothesis h(TabulatedPmf{p});
    EXPECT_EQ(h.tag(), "tabulated");
    EXPECT_DOUBLE_EQ(h.pmf_at({5}), 0.75);
    Rng rng(2);
    std::vector<Point> xs;
    for (int i = 0; i < 40000; ++i) xs.push_back(h.sample(rng));
    EXPECT_LE(tv_distance(empirical_pmf(xs), p), 0.02);
}
