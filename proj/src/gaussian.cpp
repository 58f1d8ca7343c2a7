#include "pmdlab/gaussian.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>

#include "pmdlab/lattice.hpp"

namespace pmdlab {

namespace {

constexpr double kZClip = 38.5;  // Phi(-38.5) underflows double precision

double std_normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }

// Phi(b) - Phi(a) without cancellation in either tail.
double phi_diff(double a, double b) {
    if (a >= b) return 0.0;
    constexpr double r = 1.0 / std::numbers::sqrt2;
    if (a >= 0) return 0.5 * (std::erfc(a * r) - std::erfc(b * r));
    if (b <= 0) return 0.5 * (std::erfc(-b * r) - std::erfc(-a * r));
    return 1.0 - 0.5 * std::erfc(-a * r) - 0.5 * std::erfc(b * r);
}

double phi(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double phi_inv(double p) {
    static const boost::math::normal N;
    p = std::clamp(p, 1e-300, 1.0 - 1e-16);
    return boost::math::quantile(N, p);
}

// Whitened sequential-conditioning integrator for one covariance.
class BoxIntegrator {
public:
    BoxIntegrator(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) : mu_(mu), d_(mu.size()) {
        if (sigma.rows() != d_ || sigma.cols() != d_)
            throw InvalidArgument("gaussian: covariance shape does not match mean");
        if (d_ > 8) throw InvalidArgument("gaussian: at most 8 free dimensions are supported");
        if (d_ == 0) return;
        Eigen::MatrixXd S = 0.5 * (sigma + sigma.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < kEigenvalueFloor)
            throw SingularCovariance("gaussian: covariance eigenvalue below floor");
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) throw SingularCovariance("gaussian: Cholesky failed");
        L_ = llt.matrixL();
    }

    BoxEstimate operator()(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
        if (d_ == 0) return {1.0, 0.0};
        Scratch s{lo - mu_, hi - mu_, std::vector<double>(d_, 0.0)};
        if (d_ == 1) return {phi_diff(s.lo[0] / L_(0, 0), s.hi[0] / L_(0, 0)), 1e-15};
        if (d_ <= 3) return {nested(0, s), 1e-11};
        return lattice_rule(s);
    }

private:
    struct Scratch {
        Eigen::VectorXd lo, hi;
        std::vector<double> z;
    };

    std::pair<double, double> limits(int i, const Scratch& s) const {
        double shift = 0;
        for (int j = 0; j < i; ++j) shift += L_(i, j) * s.z[j];
        double a = (s.lo[i] - shift) / L_(i, i);
        double b = (s.hi[i] - shift) / L_(i, i);
        return {std::max(a, -kZClip), std::min(b, kZClip)};
    }

    double nested(int i, Scratch& s) const {
        auto [a, b] = limits(i, s);
        if (a >= b) return 0.0;
        if (i == d_ - 1) return phi_diff(a, b);
        auto f = [this, i, &s](double t) {
            s.z[i] = t;
            return std_normal_pdf(t) * nested(i + 1, s);
        };
        return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 12, 1e-12);
    }

    // Genz transform with randomly shifted Richtmyer points.
    BoxEstimate lattice_rule(Scratch& s) const {
        constexpr int kShifts = 8;
        constexpr int kPoints = 1 << 13;
        static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
        std::vector<double> alpha(d_);
        for (int j = 0; j < d_; ++j) alpha[j] = std::fmod(std::sqrt(primes[j]), 1.0);
        Rng rng(0x5eedULL + d_);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> means(kShifts);
        std::vector<double> shift(d_);
        for (int r = 0; r < kShifts; ++r) {
            for (auto& v : shift) v = U(rng);
            double acc = 0;
            for (int p = 1; p <= kPoints; ++p) {
                double prod = 1.0;
                for (int i = 0; i < d_; ++i) {
                    auto [a, b] = limits(i, s);
                    if (a >= b) {
                        prod = 0;
                        break;
                    }
                    double pa = phi(a), e = phi_diff(a, b);
                    prod *= e;
                    if (i + 1 < d_) {
                        double w = std::fmod(p * alpha[i] + shift[i], 1.0);
                        w = std::abs(2.0 * w - 1.0);  // baker's transform
                        s.z[i] = std::clamp(phi_inv(pa + w * e), a, b);
                    }
                }
                acc += prod;
            }
            means[r] = acc / kPoints;
        }
        double m = 0;
        for (double v : means) m += v;
        m /= kShifts;
        double var = 0;
        for (double v : means) var += (v - m) * (v - m);
        var /= (kShifts - 1) * kShifts;
        return {m, 3.0 * std::sqrt(var) + 1e-15};
    }

    Eigen::VectorXd mu_;
    int d_;
    Eigen::MatrixXd L_;
};

Eigen::VectorXd lattice_box(const Point& x, const std::vector<int>& idx, double offset) {
    Eigen::VectorXd v(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) v[i] = static_cast<double>(x[idx[i]]) + offset;
    return v;
}

}  // namespace

double normal_interval(double mu, double sd, double lo, double hi) {
    if (sd <= 0) return (mu >= lo && mu < hi) ? 1.0 : 0.0;
    return phi_diff((lo - mu) / sd, (hi - mu) / sd);
}

BoxEstimate gaussian_box_probability(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    BoxIntegrator integ(mu, sigma);
    return integ(lo, hi);
}

DegenerateSplit split_degenerate(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double zero_tol) {
    DegenerateSplit out;
    const int d = static_cast<int>(mu.size());
    for (int i = 0; i < d; ++i) (sigma(i, i) <= zero_tol ? out.fixed : out.free).push_back(i);
    const int m = static_cast<int>(out.free.size());
    out.free_mean.resize(m);
    out.free_cov.resize(m, m);
    for (int a = 0; a < m; ++a) {
        out.free_mean[a] = mu[out.free[a]];
        for (int b = 0; b < m; ++b) out.free_cov(a, b) = sigma(out.free[a], out.free[b]);
    }
    return out;
}

BoxEstimate discretized_gaussian_pmf_estimate(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                              const Point& x) {
    if (static_cast<int>(x.size()) != mu.size()) throw InvalidArgument("discretized_gaussian_pmf: dims");
    auto split = split_degenerate(mu, sigma);
    for (int f : split.fixed)
        if (x[f] != round_half_even(mu[f])) return {0.0, 0.0};
    if (split.free.empty()) return {1.0, 0.0};
    auto lo = lattice_box(x, split.free, -0.5);
    auto hi = lattice_box(x, split.free, 0.5);
    if (split.free.size() == 1) {
        if (split.free_cov(0, 0) < kEigenvalueFloor)
            throw SingularCovariance("gaussian: covariance eigenvalue below floor");
        return {normal_interval(split.free_mean[0], std::sqrt(split.free_cov(0, 0)), lo[0], hi[0]), 1e-15};
    }
    auto est = gaussian_box_probability(split.free_mean, split.free_cov, lo, hi);
    est.value = std::max(0.0, est.value);
    return est;
}

double discretized_gaussian_pmf(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, const Point& x) {
    return discretized_gaussian_pmf_estimate(mu, sigma, x).value;
}

std::vector<int> GaussianBlock::free_coords() const {
    std::vector<int> out;
    for (int c : coords)
        if (c != pivot) out.push_back(c);
    return out;
}

BlockGaussian::BlockGaussian(int k, std::vector<GaussianBlock> blocks) : k_(k), blocks_(std::move(blocks)) {
    std::set<int> seen;
    for (auto& b : blocks_) {
        std::sort(b.coords.begin(), b.coords.end());
        if (b.coords.empty()) throw InvalidArgument("BlockGaussian: empty block");
        if (std::find(b.coords.begin(), b.coords.end(), b.pivot) == b.coords.end())
            throw InvalidArgument("BlockGaussian: pivot outside block");
        for (int c : b.coords) {
            if (c < 0 || c >= k) throw InvalidArgument("BlockGaussian: coordinate out of range");
            if (!seen.insert(c).second) throw InvalidArgument("BlockGaussian: overlapping blocks");
        }
        if (b.total < 0) throw InvalidArgument("BlockGaussian: negative total");
        const auto m = static_cast<Eigen::Index>(b.coords.size() - 1);
        if (b.mean.size() != m || b.cov.rows() != m || b.cov.cols() != m)
            throw InvalidArgument("BlockGaussian: mean/covariance shape mismatch");
        b.cov = 0.5 * (b.cov + b.cov.transpose());
        if (m > 0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.cov, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -1e-9) throw InvalidArgument("BlockGaussian: covariance not PSD");
        }
    }
}

// Per-block evaluator: zero-variance coordinates split off, the rest factorized once.
struct BlockGaussianEvaluator::Impl {
    explicit Impl(const GaussianBlock& b)
        : block(b), free(b.free_coords()), split(split_degenerate(b.mean, b.cov)),
          integ(split.free_mean, split.free_cov) {
        for (int f : split.fixed) fixed_value.push_back(round_half_even(b.mean[f]));
    }

    // Probability of the block's free coordinates taking values `v`.
    double free_pmf(const std::vector<std::int64_t>& v) const {
        for (std::size_t i = 0; i < split.fixed.size(); ++i)
            if (v[split.fixed[i]] != fixed_value[i]) return 0.0;
        const auto m = split.free.size();
        if (m == 0) return 1.0;
        Eigen::VectorXd lo(m), hi(m);
        for (std::size_t i = 0; i < m; ++i) {
            lo[i] = static_cast<double>(v[split.free[i]]) - 0.5;
            hi[i] = lo[i] + 1.0;
        }
        return std::max(0.0, integ(lo, hi).value);
    }

    double pmf(const Point& x) const {
        std::int64_t s = 0;
        for (int c : block.coords) s += x[c];
        if (s != block.total) return 0.0;
        std::vector<std::int64_t> v(free.size());
        for (std::size_t i = 0; i < free.size(); ++i) v[i] = x[free[i]];
        return free_pmf(v);
    }

    GaussianBlock block;
    std::vector<int> free;
    DegenerateSplit split;
    BoxIntegrator integ;
    std::vector<std::int64_t> fixed_value;
};

BlockGaussianEvaluator::BlockGaussianEvaluator(const BlockGaussian& bg) : bg_(bg), covered_(bg.k(), false) {
    for (const auto& b : bg_.blocks()) {
        for (int c : b.coords) covered_[c] = true;
        blocks_.push_back(std::make_unique<Impl>(b));
    }
}
BlockGaussianEvaluator::~BlockGaussianEvaluator() = default;
BlockGaussianEvaluator::BlockGaussianEvaluator(BlockGaussianEvaluator&&) noexcept = default;
BlockGaussianEvaluator& BlockGaussianEvaluator::operator=(BlockGaussianEvaluator&&) noexcept = default;

double BlockGaussianEvaluator::pmf(const Point& x) const {
    if (static_cast<int>(x.size()) != bg_.k()) throw InvalidArgument("block_gaussian_pmf: point dims");
    for (int j = 0; j < bg_.k(); ++j)
        if (!covered_[j] && x[j] != 0) return 0.0;
    double p = 1.0;
    for (const auto& b : blocks_) {
        p *= b->pmf(x);
        if (p == 0) break;
    }
    return p;
}

double block_gaussian_pmf(const BlockGaussian& bg, const Point& x) { return BlockGaussianEvaluator(bg).pmf(x); }

Point block_gaussian_sample(const BlockGaussian& bg, Rng& rng) {
    Point x(bg.k(), 0);
    std::normal_distribution<double> N(0.0, 1.0);
    for (const auto& b : bg.blocks()) {
        auto fr = b.free_coords();
        const auto m = static_cast<Eigen::Index>(fr.size());
        std::int64_t s = 0;
        if (m > 0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.cov);
            Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            Eigen::VectorXd z(m);
            for (Eigen::Index i = 0; i < m; ++i) z[i] = N(rng);
            Eigen::VectorXd y = b.mean + es.eigenvectors() * root.asDiagonal() * z;
            for (Eigen::Index i = 0; i < m; ++i) {
                x[fr[i]] = round_half_even(y[i]);
                s += x[fr[i]];
            }
        }
        x[b.pivot] = b.total - s;
    }
    return x;
}

namespace {

// Tabulates one block's free coordinates as a sub-measure over the full k dims.
std::vector<std::pair<Point, double>> tabulate_block(const GaussianBlock& b, int k, double tail_sd) {
    BlockGaussianEvaluator::Impl ev(b);
    const auto& fr = ev.free;
    const std::size_t m = fr.size();
    std::vector<std::int64_t> lo(m), hi(m);
    double count = 1;
    for (std::size_t i = 0; i < m; ++i) {
        double sd = std::sqrt(std::max(0.0, b.cov(i, i)));
        lo[i] = static_cast<std::int64_t>(std::floor(b.mean[i] - tail_sd * sd)) - 1;
        hi[i] = static_cast<std::int64_t>(std::ceil(b.mean[i] + tail_sd * sd)) + 1;
        count *= static_cast<double>(hi[i] - lo[i] + 1);
    }
    if (count > static_cast<double>(support_cap()))
        throw SupportCapExceeded("tabulate_block_gaussian: grid exceeds cap");
    std::vector<std::pair<Point, double>> out;
    std::vector<std::int64_t> v(lo);
    while (true) {
        double p = ev.free_pmf(v);
        if (p > 0) {
            Point x(k, 0);
            std::int64_t s = 0;
            for (std::size_t i = 0; i < m; ++i) {
                x[fr[i]] = v[i];
                s += v[i];
            }
            x[b.pivot] = b.total - s;
            out.emplace_back(std::move(x), p);
        }
        std::size_t i = 0;
        while (i < m && ++v[i] > hi[i]) {
            v[i] = lo[i];
            ++i;
        }
        if (i == m) break;
    }
    return out;
}

}  // namespace

SparsePmf tabulate_block_gaussian(const BlockGaussian& bg, double tail_sd) {
    std::vector<std::pair<Point, double>> acc{{Point(bg.k(), 0), 1.0}};
    for (const auto& b : bg.blocks()) {
        auto part = tabulate_block(b, bg.k(), tail_sd);
        std::vector<std::pair<Point, double>> next;
        next.reserve(acc.size() * part.size());
        for (const auto& [x, p] : acc)
            for (const auto& [y, q] : part) {
                Point z = x;
                for (int c : b.coords) z[c] = y[c];
                next.emplace_back(std::move(z), p * q);
            }
        if (next.size() > support_cap()) throw SupportCapExceeded("tabulate_block_gaussian: support exceeds cap");
        acc = std::move(next);
    }
    return SparsePmf(bg.k(), std::move(acc), 1e-6);
}

SparsePmf tabulate_gaussian_1d(double mu, double variance, double tail_sd) {
    if (variance <= 1e-12) return SparsePmf::point_mass({round_half_even(mu)});
    double sd = std::sqrt(variance);
    auto lo = static_cast<std::int64_t>(std::floor(mu - tail_sd * sd)) - 1;
    auto hi = static_cast<std::int64_t>(std::ceil(mu + tail_sd * sd)) + 1;
    std::vector<std::pair<Point, double>> out;
    for (auto v = lo; v <= hi; ++v) {
        double p = normal_interval(mu, sd, v - 0.5, v + 0.5);
        if (p > 0) out.push_back({Point{v}, p});
    }
    return SparsePmf(1, std::move(out), 1e-6);
}

}  // namespace pmdlab
