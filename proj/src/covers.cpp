#include "pmdlab/covers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>

#include "pmdlab/errors.hpp"
#include "pmdlab/lattice.hpp"

namespace pmdlab {

namespace {

constexpr std::size_t kMaxBlockGrid = 10'000'000;

// Values j*g in [0, limit] (j >= jmin).
std::vector<double> grid_values(double g, double lo, double hi) {
    std::vector<double> out;
    auto jlo = static_cast<std::int64_t>(std::ceil(lo / g - 1e-9));
    for (auto j = jlo; j * g <= hi + 1e-9; ++j) out.push_back(static_cast<double>(j) * g);
    return out;
}

void compositions(int dims, int total, MultiIndex& cur, int pos, std::vector<MultiIndex>& out) {
    if (pos == dims - 1) {
        cur[pos] = total;
        out.push_back(cur);
        return;
    }
    for (int v = total; v >= 0; --v) {
        cur[pos] = v;
        compositions(dims, total - v, cur, pos + 1, out);
    }
}

double binom(int n, int r) {
    double c = 1;
    for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
    return c;
}

}  // namespace

std::vector<MultiIndex> multi_indices(int dims, int w) {
    std::vector<MultiIndex> out;
    if (dims == 0) {
        out.emplace_back();
        return out;
    }
    MultiIndex cur(dims, 0);
    for (int s = 0; s <= w; ++s) compositions(dims, s, cur, 0, out);
    return out;
}

std::vector<std::vector<double>> grid_rows(int k, double granularity) {
    if (!(granularity > 0) || granularity > 1) throw InvalidArgument("grid_rows: granularity must be in (0,1]");
    std::vector<std::vector<double>> out;
    const auto steps = static_cast<int>(std::floor(1.0 / granularity + 1e-9));
    std::vector<int> j(k - 1, 0);
    while (true) {
        int used = 0;
        for (int v : j) used += v;
        if (used * granularity <= 1.0 + 1e-9) {
            std::vector<double> row(k);
            double s = 0;
            for (int a = 0; a < k - 1; ++a) {
                row[a] = std::min(1.0, j[a] * granularity);
                s += row[a];
            }
            double rem = 1.0 - s;
            row[k - 1] = rem < 1e-12 ? 0.0 : rem;
            if (row[k - 1] == 0 && s != 1.0 && k > 1) {
                // put the rounding slack back on the largest entry so the row sums to 1
                auto it = std::max_element(row.begin(), row.end());
                *it += 1.0 - s;
            }
            out.push_back(std::move(row));
        }
        int a = k - 2;
        while (a >= 0 && ++j[a] > steps) j[a--] = 0;
        if (a < 0) break;
    }
    return out;
}

GridPmdCover::GridPmdCover(int n, int k, double granularity)
    : n_(n), k_(k), rows_(grid_rows(k, granularity)), idx_(n, 0) {}

double GridPmdCover::size() const { return binom(static_cast<int>(rows_.size()) + n_ - 1, n_); }

std::optional<ParamMatrix> GridPmdCover::next() {
    if (done_) return std::nullopt;
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(n_) * k_);
    for (auto i : idx_) data.insert(data.end(), rows_[i].begin(), rows_[i].end());
    ParamMatrix out(n_, k_, std::move(data));
    ++emitted_;
    int p = n_ - 1;
    while (p >= 0 && idx_[p] + 1 >= rows_.size()) --p;
    if (p < 0) {
        done_ = true;
    } else {
        ++idx_[p];
        for (int q = p + 1; q < n_; ++q) idx_[q] = idx_[p];
    }
    return out;
}

GridPmdCover grid_cover_sparse_pmd(int n, int k, double granularity) { return GridPmdCover(n, k, granularity); }

void GridSpec::validate() const {
    if (!(param_granularity > 0) || !(mean_cube > 0) || !(chol_granularity > 0))
        throw InvalidArgument("GridSpec: granularities must be positive");
}

GridGaussianCover::GridGaussianCover(int n, int k, GridSpec spec, std::vector<std::vector<int>> blocks,
                                     std::vector<int> pivots)
    : k_(k) {
    spec.validate();
    if (blocks.empty()) {
        blocks.emplace_back();
        for (int j = 0; j < k; ++j) blocks.back().push_back(j);
        pivots = {k - 1};
    }
    if (pivots.size() != blocks.size()) throw InvalidArgument("grid_cover_gaussian: one pivot per block");
    const std::int64_t tmax = spec.total_max < 0 ? n : spec.total_max;
    const double root = std::sqrt(static_cast<double>(n));
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        BlockGrid grid;
        grid.coords = blocks[b];
        std::sort(grid.coords.begin(), grid.coords.end());
        grid.pivot = pivots[b];
        const int m = static_cast<int>(grid.coords.size()) - 1;
        auto diag = grid_values(spec.chol_granularity, spec.chol_granularity, root);
        auto off = grid_values(spec.chol_granularity, -root, root);
        if (m > 0 && diag.empty()) throw InvalidArgument("grid_cover_gaussian: Cholesky grid is empty");
        // enumerate lower-triangular factors once
        std::vector<Eigen::MatrixXd> factors;
        {
            std::vector<std::pair<int, int>> cells;
            for (int r = 0; r < m; ++r)
                for (int c = 0; c <= r; ++c) cells.emplace_back(r, c);
            std::vector<std::size_t> pos(cells.size(), 0);
            while (true) {
                Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
                for (std::size_t i = 0; i < cells.size(); ++i) {
                    auto [r, c] = cells[i];
                    L(r, c) = r == c ? diag[pos[i]] : off[pos[i]];
                }
                factors.push_back(L * L.transpose());
                if (factors.size() > kMaxBlockGrid) throw CapExceeded("grid_cover_gaussian: grid too large");
                std::size_t i = 0;
                for (; i < cells.size(); ++i) {
                    const auto lim = cells[i].first == cells[i].second ? diag.size() : off.size();
                    if (++pos[i] < lim) break;
                    pos[i] = 0;
                }
                if (i == cells.size()) break;
            }
        }
        for (std::int64_t t = spec.total_min; t <= tmax; ++t) {
            auto vals = grid_values(spec.mean_cube, 0.0, static_cast<double>(t));
            std::vector<std::size_t> pos(m, 0);
            while (true) {
                double s = 0;
                Eigen::VectorXd mu(m);
                for (int i = 0; i < m; ++i) s += mu[i] = vals[pos[i]];
                if (s <= static_cast<double>(t) + 1e-9) {
                    for (const auto& S : factors) {
                        grid.elements.push_back(GaussianBlock{grid.coords, grid.pivot, t, mu, S});
                        if (grid.elements.size() > kMaxBlockGrid)
                            throw CapExceeded("grid_cover_gaussian: grid too large");
                    }
                }
                int i = 0;
                for (; i < m; ++i) {
                    if (++pos[i] < vals.size()) break;
                    pos[i] = 0;
                }
                if (i == m) break;
            }
        }
        grids_.push_back(std::move(grid));
    }
    idx_.assign(grids_.size(), 0);
    for (const auto& g : grids_) done_ = done_ || g.elements.empty();
}

double GridGaussianCover::size() const {
    double s = 1;
    for (const auto& g : grids_) s *= static_cast<double>(g.elements.size());
    return s;
}

std::optional<BlockGaussian> GridGaussianCover::next() {
    if (done_) return std::nullopt;
    std::vector<GaussianBlock> blocks;
    for (std::size_t b = 0; b < grids_.size(); ++b) blocks.push_back(grids_[b].elements[idx_[b]]);
    BlockGaussian out(k_, std::move(blocks));
    std::size_t b = 0;
    for (; b < grids_.size(); ++b) {
        if (++idx_[b] < grids_[b].elements.size()) break;
        idx_[b] = 0;
    }
    if (b == grids_.size()) done_ = true;
    return out;
}

GridGaussianCover grid_cover_gaussian(int n, int k, const GridSpec& spec) { return GridGaussianCover(n, k, spec); }

bool MomentProfile::matches(const MomentProfile& o) const {
    if (order != o.order || dims != o.dims) return false;
    if (!keys.empty() && !o.keys.empty()) return keys == o.keys;
    return values == o.values;
}

MomentProfile moment_profile(const ParamMatrix& pm, int w, ProfileQuantizer quantizer) {
    if (w < 0) throw InvalidArgument("moment_profile: w must be >= 0");
    MomentProfile prof;
    prof.order = w;
    prof.dims = pm.k() - 1;
    prof.index = multi_indices(prof.dims, w);
    std::vector<double> terms(pm.n());
    for (const auto& u : prof.index) {
        int deg = 0;
        for (int v : u) deg += v;
        double value;
        if (deg == 0) {
            value = pm.n();
        } else {
            for (int i = 0; i < pm.n(); ++i) {
                double t = 1;
                for (int j = 0; j < prof.dims; ++j)
                    if (u[j] > 0) t *= std::pow(pm(i, j), u[j]);
                terms[i] = t;
            }
            // Sorting makes the sum independent of row order.
            std::sort(terms.begin(), terms.end());
            value = 0;
            for (double t : terms) value += t;
        }
        prof.values.push_back(value);
        if (quantizer.g > 0)
            prof.keys.push_back(static_cast<std::int64_t>(std::floor(value / std::pow(quantizer.g, deg) + 1e-9)));
    }
    return prof;
}

int mean_box_count(int k) {
    const int d = std::max(1, k - 1);
    return static_cast<int>(std::ceil(4.0 * std::numbers::e * d * d * d));
}

std::map<std::vector<int>, std::vector<int>> group_by_mean_box(const ParamMatrix& pm) {
    const int B = mean_box_count(pm.k());
    std::map<std::vector<int>, std::vector<int>> groups;
    for (int i = 0; i < pm.n(); ++i) {
        std::vector<int> v(pm.k() - 1);
        for (int j = 0; j < pm.k() - 1; ++j) {
            int box = static_cast<int>(std::ceil(pm(i, j) * B - 1e-9));
            v[j] = std::clamp(box, 1, B);
        }
        groups[v].push_back(i);
    }
    return groups;
}

std::vector<std::pair<std::vector<int>, MomentProfile>> cover_signature(const ParamMatrix& pm, int w,
                                                                        ProfileQuantizer quantizer) {
    std::vector<std::pair<std::vector<int>, MomentProfile>> sig;
    for (const auto& [v, rows] : group_by_mean_box(pm)) {
        auto sub = pm.select(rows);
        sig.emplace_back(v, moment_profile(sub, std::min(w, sub.n()), quantizer));
    }
    return sig;
}

std::vector<std::size_t> moment_matching_cover(const std::vector<ParamMatrix>& candidates, int w,
                                               ProfileQuantizer quantizer) {
    std::set<std::vector<std::int64_t>> seen;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        std::vector<std::int64_t> key{candidates[c].n(), candidates[c].k()};
        for (const auto& [v, prof] : cover_signature(candidates[c], w, quantizer)) {
            key.push_back(-1);
            key.insert(key.end(), v.begin(), v.end());
            key.push_back(prof.order);
            if (!prof.keys.empty())
                key.insert(key.end(), prof.keys.begin(), prof.keys.end());
            else
                for (double x : prof.values) key.push_back(std::bit_cast<std::int64_t>(x));
        }
        if (seen.insert(std::move(key)).second) keep.push_back(c);
    }
    return keep;
}

double multinomial_pmf(int n, const std::vector<double>& q, const std::vector<std::int64_t>& x) {
    if (q.size() != x.size()) throw InvalidArgument("multinomial_pmf: dimension mismatch");
    double q0 = 1.0;
    for (double v : q) {
        if (v < 0) throw InvalidArgument("multinomial_pmf: negative probability");
        q0 -= v;
    }
    if (q0 < -1e-12) throw InvalidArgument("multinomial_pmf: probabilities exceed 1");
    q0 = std::max(0.0, q0);
    if (n < 0) return 0.0;
    std::int64_t s = 0;
    for (auto v : x) {
        if (v < 0) return 0.0;
        s += v;
    }
    if (s > n) return 0.0;
    double logc = std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(n - s) + 1.0);
    double prod = std::pow(q0, static_cast<double>(n - s));
    for (std::size_t j = 0; j < x.size(); ++j) {
        logc -= std::lgamma(static_cast<double>(x[j]) + 1.0);
        prod *= std::pow(q[j], static_cast<double>(x[j]));
    }
    return prod == 0 ? 0.0 : std::exp(logc) * prod;
}

std::map<MultiIndex, double> roos_coefficients(const GmdParams& rho, const std::vector<double>& q, int w) {
    const int d = rho.dims();
    if (static_cast<int>(q.size()) != d) throw InvalidArgument("roos_coefficients: q dimension");
    std::map<MultiIndex, double> poly{{MultiIndex(d, 0), 1.0}};
    for (int i = 0; i < rho.n(); ++i) {
        std::map<MultiIndex, double> next = poly;
        for (const auto& [u, a] : poly) {
            int deg = 0;
            for (int v : u) deg += v;
            if (deg >= w) continue;
            for (int j = 0; j < d; ++j) {
                double dij = rho(i, j) - q[j];
                if (dij == 0) continue;
                MultiIndex v = u;
                ++v[j];
                next[v] += a * dij;
            }
        }
        poly = std::move(next);
    }
    // fill absent indices with zero so callers see all of V(w)
    for (const auto& u : multi_indices(d, w)) poly.try_emplace(u, 0.0);
    return poly;
}

RoosApproximator::RoosApproximator(const GmdParams& rho, std::vector<double> q, int w)
    : n_(rho.n()), q_(std::move(q)), coef_(roos_coefficients(rho, q_, w)) {
    if (w > n_) throw InvalidArgument("roos_approximator_pmf: need w <= n");
}

double RoosApproximator::operator()(const std::vector<std::int64_t>& x) const {
    const auto d = x.size();
    double total = 0;
    for (const auto& [u, a] : coef_) {
        if (a == 0) continue;
        int deg = 0;
        for (int v : u) deg += v;
        // Delta^u h(x) = sum_{v <= u} prod_j C(u_j, v_j) (-1)^{u_j - v_j} h(x - v)
        std::vector<int> v(d, 0);
        double acc = 0;
        while (true) {
            double w = 1;
            std::vector<std::int64_t> y(x);
            for (std::size_t j = 0; j < d; ++j) {
                w *= binom(u[j], v[j]) * (((u[j] - v[j]) % 2) ? -1.0 : 1.0);
                y[j] -= v[j];
            }
            acc += w * multinomial_pmf(n_ - deg, q_, y);
            std::size_t j = 0;
            for (; j < d; ++j) {
                if (++v[j] <= u[j]) break;
                v[j] = 0;
            }
            if (j == d) break;
        }
        total += a * acc;
    }
    return total;
}

double roos_approximator_pmf(const GmdParams& rho, const std::vector<double>& q, int w,
                             const std::vector<std::int64_t>& x) {
    return RoosApproximator(rho, q, w)(x);
}

double roos_alpha(const GmdParams& rho, const std::vector<double>& q) {
    const int d = rho.dims();
    double q0 = 1.0;
    for (double v : q) q0 -= v;
    if (!(q0 > 0)) throw InvalidArgument("roos_alpha: q0 must be positive");
    const double n = rho.n();
    double sum = 0;
    for (int j = 0; j < d; ++j) {
        double s1 = 0, s2 = 0;
        for (int i = 0; i < rho.n(); ++i) {
            double dv = rho(i, j) - q[j];
            s1 += dv;
            s2 += dv * dv;
        }
        double num = 2 * s2 + s1 * s1;
        if (num == 0) continue;
        if (q[j] <= 0) return std::numeric_limits<double>::infinity();
        sum += std::sqrt(num / (2 * n * q0 * q[j]));
    }
    return std::exp(0.5) * sum;
}

SparsePmf gmd_pmf_exact(const GmdParams& rho) {
    const int d = rho.dims();
    return pmd_pmf_exact(rho.to_pmd()).map(d, [d](const Point& x) { return Point(x.begin(), x.begin() + d); });
}

std::vector<double> mean_matched_q(const GmdParams& rho) {
    std::vector<double> q(rho.dims(), 0.0);
    for (int i = 0; i < rho.n(); ++i)
        for (int j = 0; j < rho.dims(); ++j) q[j] += rho(i, j);
    for (auto& v : q) v /= std::max(1, rho.n());
    return q;
}

int default_profile_order(int n, int k, double eps) {
    return std::min(n, static_cast<int>(std::ceil(k * std::log2(1.0 / eps))));
}

}  // namespace pmdlab
