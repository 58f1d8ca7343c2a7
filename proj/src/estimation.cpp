#include "pmdlab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "pmdlab/gaussian.hpp"

namespace pmdlab {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose()));
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& m) {
    auto es = eig(m);
    if (es.eigenvalues().minCoeff() < kEigenvalueFloor) throw SingularCovariance("covariance below eigenvalue floor");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace

EmpiricalMoments empirical_moments(const std::vector<Point>& samples) {
    if (samples.size() < 2) throw InvalidArgument("empirical_moments: need at least 2 samples");
    std::vector<int> all(samples.front().size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
    return empirical_moments(samples, all);
}

EmpiricalMoments empirical_moments(const std::vector<Point>& samples, const std::vector<int>& coords) {
    if (samples.size() < 2) throw InvalidArgument("empirical_moments: need at least 2 samples");
    const auto d = static_cast<Eigen::Index>(coords.size());
    EmpiricalMoments e;
    e.m = samples.size();
    e.mean = Eigen::VectorXd::Zero(d);
    for (const auto& s : samples)
        for (Eigen::Index a = 0; a < d; ++a) e.mean[a] += static_cast<double>(s[coords[a]]);
    e.mean /= static_cast<double>(e.m);
    e.cov = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd c(d);
    for (const auto& s : samples) {
        for (Eigen::Index a = 0; a < d; ++a) c[a] = static_cast<double>(s[coords[a]]) - e.mean[a];
        e.cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
    }
    e.cov = e.cov.selfadjointView<Eigen::Lower>();
    e.cov /= static_cast<double>(e.m - 1);
    return e;
}

std::vector<Eigen::VectorXd> eigen_direction_set(const Eigen::MatrixXd& sigma) {
    auto es = eig(sigma);
    const auto k = sigma.rows();
    if (es.eigenvalues().minCoeff() < kEigenvalueFloor) throw SingularCovariance("eigen_direction_set: degenerate");
    std::vector<Eigen::VectorXd> v;
    for (Eigen::Index i = 0; i < k; ++i) v.push_back(es.eigenvectors().col(i) / std::sqrt(es.eigenvalues()[i]));
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j) v.push_back(v[i] + v[j]);
    return v;
}

std::vector<Eigen::VectorXd> sample_directions(const Eigen::MatrixXd& reference, int count, Rng& rng) {
    const auto k = reference.rows();
    auto es = eig(reference);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<Eigen::VectorXd> out;
    for (int c = 0; c < count; ++c) {
        Eigen::VectorXd y(k);
        for (auto i = 0; i < k; ++i) y[i] = N(rng);
        if (c % 2 == 1) y = es.eigenvectors().col((c / 2) % k) + 0.05 * y;
        double nrm = y.norm();
        if (nrm == 0) y = Eigen::VectorXd::Unit(k, 0), nrm = 1;
        out.push_back(y / nrm);
    }
    return out;
}

DirectionalReport directional_error_check(const EmpiricalMoments& est, const Eigen::VectorXd& mu,
                                          const Eigen::MatrixXd& sigma,
                                          const std::vector<Eigen::VectorXd>& directions, double eps) {
    if (eig(sigma).eigenvalues().minCoeff() < 1.0 - 1e-12)
        throw PreconditionViolation("directional_error_check: covariance minimum eigenvalue below 1");
    DirectionalReport rep;
    for (const auto& y : directions) {
        DirectionVerdict v;
        double s = y.dot(sigma * y);
        v.mean_ratio = std::abs(y.dot(est.mean - mu)) / std::sqrt(s);
        v.cov_ratio = std::abs(y.dot((est.cov - sigma) * y)) / s;
        v.mean_ok = v.mean_ratio <= eps + 1e-12;
        v.cov_ok = v.cov_ratio <= eps + 1e-12;
        rep.mean_ok = rep.mean_ok && v.mean_ok;
        rep.cov_ok = rep.cov_ok && v.cov_ok;
        rep.directions.push_back(v);
    }
    return rep;
}

double PsdCoverSpec::resolved_eps_prime(int k) const {
    if (eps_prime > 0) return eps_prime;
    return std::sqrt(eps) * std::pow((1.0 + eps2) * k, -1.5) / 8.0;
}

void PsdCoverSpec::validate() const {
    if (!(eps1 >= 0 && eps1 < 0.25)) throw InvalidArgument("PsdCoverSpec: eps1 must lie in [0, 1/4)");
    if (!(eps2 >= 0)) throw InvalidArgument("PsdCoverSpec: eps2 must be >= 0");
    if (!(eps > 0 && eps < 1)) throw InvalidArgument("PsdCoverSpec: eps must lie in (0,1)");
    if (eps_prime < 0) throw InvalidArgument("PsdCoverSpec: eps_prime must be >= 0");
}

std::vector<std::vector<double>> eigen_candidates(const std::vector<double>& eigs, double eps1, double eps2,
                                                  double eps) {
    std::vector<std::vector<double>> out;
    const double lg = std::log1p(eps);
    for (double lam : eigs) {
        if (lam < 1.0 - 1e-9) throw PreconditionViolation("eigen_candidates: eigenvalues must be >= 1");
        const double L = std::max(1.0, lam * (1 - eps1) - eps2);
        const double U = lam * (1 + eps1) + eps2;
        std::vector<double> c;
        const int J = static_cast<int>(std::floor(4 * eps2 + 1e-9));
        for (int a = -J; a <= J; ++a) {
            const double base = lam + 0.25 * a;
            if (base < 0.5) continue;
            const double lo = std::min(0.5, L / base), hi = std::max(1.5, U / base);
            const int jlo = static_cast<int>(std::floor(std::log(lo) / lg));
            const int jhi = static_cast<int>(std::ceil(std::log(hi) / lg));
            for (int j = jlo; j <= jhi; ++j) {
                double v = base * std::pow(1 + eps, j);
                if (v >= 1.0 / (1 + eps)) c.push_back(v);
            }
        }
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
                c.end());
        out.push_back(std::move(c));
    }
    return out;
}

PsdCover::PsdCover(const Eigen::MatrixXd& a_hat, PsdCoverSpec spec) : k_(static_cast<int>(a_hat.rows())), spec_(spec) {
    spec_.validate();
    auto es = eig(a_hat);
    mu_ = es.eigenvalues();
    u_ = es.eigenvectors();
    if (mu_.minCoeff() < 1.0 - 1e-9) throw PreconditionViolation("psd_cover: reference eigenvalue below 1");
    const double ep = spec_.resolved_eps_prime(k_);
    step_.resize(k_, k_);
    for (int z = 0; z < k_; ++z)
        for (int i = 0; i < k_; ++i)
            step_(z, i) =
                ep * std::min(2.0 * std::sqrt((mu_[i] + spec_.eps2) / std::max(mu_[z] - 2 * spec_.eps2, 1.0)), 1.0);
    cands_ = eigen_candidates(std::vector<double>(mu_.data(), mu_.data() + k_), spec_.eps1, spec_.eps2, spec_.eps);
}

int PsdCover::grid_half(int z, int i) const { return static_cast<int>(std::ceil(1.0 / step_(z, i) - 1e-12)); }

double PsdCover::raw_size() const {
    double s = 1;
    for (int z = 0; z < k_; ++z) {
        s *= static_cast<double>(cands_[z].size());
        for (int i = 0; i < k_; ++i) s *= 2.0 * grid_half(z, i) + 1;
    }
    return s;
}

std::vector<double> PsdCover::eigenvalues_of(const PsdCoverIndex& idx) const {
    std::vector<double> out(k_);
    for (int z = 0; z < k_; ++z) out[z] = std::max(1.0, cands_[z][idx.eigen[z]]);
    return out;
}

std::optional<Eigen::MatrixXd> PsdCover::element_at(const PsdCoverIndex& idx) const {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(k_, k_);
    for (int z = 0; z < k_; ++z) {
        double tol = 0;
        for (int i = 0; i < k_; ++i) {
            double v = std::clamp(idx.proj[z][i] * step_(z, i), -1.0, 1.0);
            W.col(z) += v * u_.col(i);
            tol += 2 * step_(z, i);
        }
        if (std::abs(W.col(z).squaredNorm() - 1.0) > tol) return std::nullopt;
    }
    Eigen::MatrixXd G = W.transpose() * W;
    for (int a = 0; a < k_; ++a)
        for (int b = a + 1; b < k_; ++b) {
            double tol = 0;
            for (int i = 0; i < k_; ++i) tol += step_(a, i) + step_(b, i);
            if (std::abs(G(a, b)) > tol) return std::nullopt;
        }
    auto es = eig(G);
    if (es.eigenvalues().minCoeff() <= 1e-6) return std::nullopt;
    Eigen::MatrixXd Q = W * (es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                             es.eigenvectors().transpose());
    auto lam = eigenvalues_of(idx);
    Eigen::VectorXd l = Eigen::Map<Eigen::VectorXd>(lam.data(), k_);
    Eigen::MatrixXd B = Q * l.asDiagonal() * Q.transpose();
    return Eigen::MatrixXd(0.5 * (B + B.transpose()));
}

PsdCoverIndex PsdCover::locate(const Eigen::MatrixXd& b) const {
    auto es = eig(b);
    PsdCoverIndex idx;
    idx.eigen.resize(k_);
    idx.proj.assign(k_, std::vector<int>(k_, 0));
    for (int z = 0; z < k_; ++z) {
        const double lb = std::log(std::max(es.eigenvalues()[z], 1e-300));
        int best = 0;
        for (int c = 1; c < static_cast<int>(cands_[z].size()); ++c)
            if (std::abs(std::log(cands_[z][c]) - lb) < std::abs(std::log(cands_[z][best]) - lb)) best = c;
        idx.eigen[z] = best;
        Eigen::VectorXd v = es.eigenvectors().col(z);
        for (int i = 0; i < k_; ++i) {
            int J = grid_half(z, i);
            idx.proj[z][i] = std::clamp(static_cast<int>(std::lround(u_.col(i).dot(v) / step_(z, i))), -J, J);
        }
        for (int i = 0; i < k_; ++i) {
            if (idx.proj[z][i] == 0) continue;
            if (idx.proj[z][i] < 0)
                for (auto& p : idx.proj[z]) p = -p;
            break;
        }
    }
    return idx;
}

bool PsdCover::advance() {
    // innermost: projections of the last vector, outermost: eigenvalue choice of the first
    for (int z = k_ - 1; z >= 0; --z) {
        for (int i = k_ - 1; i >= 0; --i) {
            int J = grid_half(z, i);
            if (++cur_.proj[z][i] <= J) return true;
            cur_.proj[z][i] = -J;
        }
    }
    for (int z = k_ - 1; z >= 0; --z) {
        if (++cur_.eigen[z] < static_cast<int>(cands_[z].size())) return true;
        cur_.eigen[z] = 0;
    }
    return false;
}

std::optional<Eigen::MatrixXd> PsdCover::next() {
    if (done_) return std::nullopt;
    if (!started_) {
        cur_.eigen.assign(k_, 0);
        cur_.proj.assign(k_, std::vector<int>(k_, 0));
        for (int z = 0; z < k_; ++z)
            for (int i = 0; i < k_; ++i) cur_.proj[z][i] = -grid_half(z, i);
        started_ = true;
    } else if (!advance()) {
        done_ = true;
        return std::nullopt;
    }
    while (true) {
        if (++visited_ > limit_) throw CapExceeded("psd_cover: enumeration limit reached");
        bool canonical = true;
        for (int z = 0; z < k_ && canonical; ++z)
            for (int i = 0; i < k_; ++i) {
                if (cur_.proj[z][i] == 0) continue;
                canonical = cur_.proj[z][i] > 0;
                break;
            }
        if (canonical)
            if (auto m = element_at(cur_)) return m;
        if (!advance()) {
            done_ = true;
            return std::nullopt;
        }
    }
}

PsdCover psd_cover(const Eigen::MatrixXd& a_hat, const PsdCoverSpec& spec) { return PsdCover(a_hat, spec); }

double directional_ratio(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2,
                         const std::vector<Eigen::VectorXd>& directions) {
    double r = 0;
    for (const auto& y : directions) r = std::max(r, std::abs(y.dot((s1 - s2) * y)) / y.dot(s1 * y));
    return r;
}

double exact_directional_ratio(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2) {
    Eigen::MatrixXd R = inverse_sqrt(s1);
    return eig(R * (s1 - s2) * R).eigenvalues().cwiseAbs().maxCoeff();
}

DriftVerdict rounding_drift_check(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2, double eps,
                                  const std::vector<Eigen::VectorXd>& directions) {
    if (eig(s1).eigenvalues().minCoeff() < 1.0 / (eps * eps * eps))
        throw PreconditionViolation("rounding_drift_check: minimum eigenvalue below 1/eps^3");
    DriftVerdict v;
    v.ratio = directional_ratio(s1, s2, directions);
    v.bound = 9 * eps;
    v.pass = v.ratio <= v.bound;
    return v;
}

double directional_gaussian_tv_bound(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                     const Eigen::VectorXd& mu2, const Eigen::MatrixXd& sigma2) {
    Eigen::MatrixXd R = inverse_sqrt(sigma);
    Eigen::VectorXd d = R * (mu2 - mu);
    Eigen::MatrixXd M = R * sigma2 * R - Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
    double e = std::max(d.norm(), eig(M).eigenvalues().cwiseAbs().maxCoeff());
    return 2.0 * e * static_cast<double>(sigma.rows());
}

std::vector<BlockStructure> block_structure_guesses(int k) {
    if (k < 1) throw InvalidArgument("block_structure_guesses: k must be >= 1");
    std::vector<BlockStructure> out;
    std::vector<int> label(k, 0);
    // restricted growth strings enumerate set partitions
    std::function<void(int, int)> rec = [&](int pos, int used) {
        if (pos == k) {
            std::vector<std::vector<int>> blocks(used);
            for (int j = 0; j < k; ++j) blocks[label[j]].push_back(j);
            std::vector<std::size_t> choice(used, 0);
            while (true) {
                BlockStructure s{blocks, {}};
                for (int b = 0; b < used; ++b) s.pivots.push_back(blocks[b][choice[b]]);
                out.push_back(std::move(s));
                int b = 0;
                for (; b < used; ++b) {
                    if (++choice[b] < blocks[b].size()) break;
                    choice[b] = 0;
                }
                if (b == used) break;
            }
            return;
        }
        for (int l = 0; l <= used && l < k; ++l) {
            label[pos] = l;
            rec(pos + 1, std::max(used, l + 1));
        }
    };
    rec(0, 0);
    return out;
}

std::vector<std::vector<std::int64_t>> block_total_guesses(const Point& x, const BlockStructure& s, int sparse_cap) {
    std::vector<std::vector<std::int64_t>> per;
    for (const auto& b : s.blocks) {
        std::int64_t sum = 0;
        for (int c : b) sum += x[c];
        std::vector<std::int64_t> c;
        for (int l = 0; l <= sparse_cap; ++l) {
            auto v = std::max<std::int64_t>(0, sum - l);
            if (c.empty() || c.back() != v) c.push_back(v);
        }
        per.push_back(std::move(c));
    }
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::size_t> pos(per.size(), 0);
    while (true) {
        std::vector<std::int64_t> g;
        for (std::size_t b = 0; b < per.size(); ++b) g.push_back(per[b][pos[b]]);
        out.push_back(std::move(g));
        std::size_t b = 0;
        for (; b < per.size(); ++b) {
            if (++pos[b] < per[b].size()) break;
            pos[b] = 0;
        }
        if (b == per.size()) break;
    }
    return out;
}

std::vector<Eigen::VectorXd> mean_cover(const Eigen::VectorXd& center, const Eigen::MatrixXd& sigma, double step,
                                        double half_width) {
    const auto d = center.size();
    if (d == 0) return {center};
    auto es = eig(sigma);
    const int J = static_cast<int>(std::floor(half_width / step + 1e-9));
    std::vector<int> j(d, -J);
    std::vector<Eigen::VectorXd> out;
    while (true) {
        Eigen::VectorXd m = center;
        for (Eigen::Index z = 0; z < d; ++z)
            m += j[z] * step * std::sqrt(std::max(0.0, es.eigenvalues()[z])) * es.eigenvectors().col(z);
        out.push_back(std::move(m));
        Eigen::Index z = 0;
        for (; z < d; ++z) {
            if (++j[z] <= J) break;
            j[z] = -J;
        }
        if (z == d) break;
    }
    return out;
}

}  // namespace pmdlab
