#include "pmdlab/hypothesis.hpp"

#include <algorithm>
#include <cmath>

#include "pmdlab/lattice.hpp"

namespace pmdlab {

double hybrid_pmf_at(const StructuralDecomposition& sd, const Point& x) {
    BlockGaussianEvaluator ev(sd.gaussian);
    double s = 0;
    Point z(x.size());
    const SparsePmf sparse = pmd_pmf_exact(sd.sparse);
    for (const auto& [y, p] : sparse.entries()) {
        for (std::size_t j = 0; j < x.size(); ++j) z[j] = x[j] - y[j];
        s += p * ev.pmf(z);
    }
    return s;
}

SparsePmf tabulate_decomposition(const StructuralDecomposition& sd, double tail_sd) {
    return convolve(tabulate_block_gaussian(sd.gaussian, tail_sd), pmd_pmf_exact(sd.sparse));
}

struct Hypothesis::Cache {
    std::shared_ptr<const SparsePmf> table;  // exact or sparse-part pmf
    std::vector<double> cumulative;          // for TabulatedPmf sampling
    std::unique_ptr<BlockGaussianEvaluator> gaussian;
};

namespace {

double siirv_pmf(const SiirvForm& f, std::int64_t x) {
    const std::int64_t l = f.scale;
    std::int64_t r = ((x % l) + l) % l;
    std::int64_t g = (x - r) / l;
    double res = f.residue[r];
    if (res == 0) return 0;
    if (f.variance <= 1e-12) return g == round_half_even(f.mean) ? res : 0.0;
    double sd = std::sqrt(f.variance);
    return res * normal_interval(f.mean, sd, g - 0.5, g + 0.5);
}

}  // namespace

Hypothesis::Hypothesis(Form form, std::string label) : form_(std::move(form)), label_(std::move(label)) {
    auto cache = std::make_shared<Cache>();
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ExactPmd>) {
                dims_ = f.pm.k();
                cache->table = std::make_shared<SparsePmf>(pmd_pmf_exact(f.pm));
            } else if constexpr (std::is_same_v<T, GaussianPlusSparse>) {
                dims_ = f.sd.gaussian.k();
                if (f.sd.sparse.n() > 0 && f.sd.sparse.k() != dims_)
                    throw InvalidArgument("Hypothesis: sparse part dims differ from Gaussian dims");
                cache->table = std::make_shared<SparsePmf>(
                    f.sd.sparse.n() > 0 ? pmd_pmf_exact(f.sd.sparse) : SparsePmf::point_mass(Point(dims_, 0)));
                cache->gaussian = std::make_unique<BlockGaussianEvaluator>(f.sd.gaussian);
            } else if constexpr (std::is_same_v<T, SiirvForm>) {
                dims_ = 1;
                if (f.scale < 1 || static_cast<int>(f.residue.size()) != f.scale)
                    throw InvalidArgument("Hypothesis: residue length must equal scale");
                double s = 0;
                for (double r : f.residue) {
                    if (r < 0) throw InvalidArgument("Hypothesis: negative residue probability");
                    s += r;
                }
                if (std::abs(s - 1) > 1e-9) throw InvalidArgument("Hypothesis: residue pmf does not sum to 1");
                if (f.variance < 0) throw InvalidArgument("Hypothesis: negative variance");
            } else {
                dims_ = f.pmf.dims();
                double c = 0;
                for (const auto& e : f.pmf.entries()) cache->cumulative.push_back(c += e.second);
            }
        },
        form_);
    cache_ = std::move(cache);
}

std::string Hypothesis::tag() const {
    switch (form_.index()) {
        case 0: return "exact_pmd";
        case 1: return "gaussian_plus_sparse";
        case 2: return "siirv";
        default: return "tabulated";
    }
}

double Hypothesis::pmf_at(const Point& x) const {
    if (static_cast<int>(x.size()) != dims_) throw InvalidArgument("Hypothesis::pmf_at: point dims");
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ExactPmd>) {
                return cache_->table->at(x);
            } else if constexpr (std::is_same_v<T, GaussianPlusSparse>) {
                double s = 0;
                Point z(x.size());
                for (const auto& [y, p] : cache_->table->entries()) {
                    for (std::size_t j = 0; j < x.size(); ++j) z[j] = x[j] - y[j];
                    s += p * cache_->gaussian->pmf(z);
                }
                return s;
            } else if constexpr (std::is_same_v<T, SiirvForm>) {
                return siirv_pmf(f, x[0]);
            } else {
                return f.pmf.at(x);
            }
        },
        form_);
}

Point Hypothesis::sample(Rng& rng) const {
    return std::visit(
        [&](const auto& f) -> Point {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ExactPmd>) {
                return pmd_sample(f.pm, rng);
            } else if constexpr (std::is_same_v<T, GaussianPlusSparse>) {
                Point g = block_gaussian_sample(f.sd.gaussian, rng);
                if (f.sd.sparse.n() > 0) {
                    Point s = pmd_sample(f.sd.sparse, rng);
                    for (std::size_t j = 0; j < g.size(); ++j) g[j] += s[j];
                }
                return g;
            } else if constexpr (std::is_same_v<T, SiirvForm>) {
                std::int64_t g = round_half_even(f.mean);
                if (f.variance > 1e-12) {
                    std::normal_distribution<double> N(f.mean, std::sqrt(f.variance));
                    g = round_half_even(N(rng));
                }
                int r = f.scale > 1 ? crv_sample(f.residue, rng) : 0;
                return Point{f.scale * g + r};
            } else {
                const auto& c = cache_->cumulative;
                std::uniform_real_distribution<double> U(0.0, c.back());
                auto it = std::upper_bound(c.begin(), c.end(), U(rng));
                std::size_t i = std::min<std::size_t>(it - c.begin(), c.size() - 1);
                return f.pmf.entries()[i].first;
            }
        },
        form_);
}

SparsePmf Hypothesis::tabulate() const {
    return std::visit(
        [&](const auto& f) -> SparsePmf {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ExactPmd>) {
                return *cache_->table;
            } else if constexpr (std::is_same_v<T, GaussianPlusSparse>) {
                return convolve(tabulate_block_gaussian(f.sd.gaussian), *cache_->table);
            } else if constexpr (std::is_same_v<T, SiirvForm>) {
                auto g = tabulate_gaussian_1d(f.mean, f.variance);
                std::vector<std::pair<Point, double>> out;
                for (const auto& [x, p] : g.entries())
                    for (int r = 0; r < f.scale; ++r)
                        if (f.residue[r] > 0) out.push_back({Point{f.scale * x[0] + r}, p * f.residue[r]});
                return SparsePmf(1, std::move(out), 1e-6);
            } else {
                return f.pmf;
            }
        },
        form_);
}

}  // namespace pmdlab
