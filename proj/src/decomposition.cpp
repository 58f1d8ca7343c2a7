#include "pmdlab/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include "pmdlab/lattice.hpp"
#include "pmdlab/rounding.hpp"

namespace pmdlab {

namespace {

double min_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double tv_cost(int k, double sigma) {
    if (!(sigma > 0)) return 1.0;
    return std::min(1.0, k / (2.0 * sigma));
}

}  // namespace

DecompositionConfig DecompositionConfig::theory(double eps, int k) {
    DecompositionConfig cfg;
    cfg.c = std::pow(eps * eps / std::pow(k, 5), 1.1);
    cfg.t = std::pow(std::pow(k, 19) / (cfg.c * std::pow(eps, 6)), 1.1);
    cfg.gamma = 6.5;
    cfg.theory_mode = true;
    return cfg;
}

void DecompositionConfig::validate(int k) const {
    if (!(c > 0) || c > 1.0 / (2.0 * k) + 1e-15) throw InvalidArgument("DecompositionConfig: need 0 < c <= 1/(2k)");
    if (!(t >= 1)) throw InvalidArgument("DecompositionConfig: need t >= 1");
    if (!(gamma > 6)) throw InvalidArgument("DecompositionConfig: need gamma > 6");
}

int FullBlock::index_of(int coord) const {
    auto it = std::lower_bound(coords.begin(), coords.end(), coord);
    if (it == coords.end() || *it != coord) return -1;
    return static_cast<int>(it - coords.begin());
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> FullBlock::drop(int coord) const {
    const int p = index_of(coord);
    if (p < 0) throw InvalidArgument("FullBlock::drop: coordinate not in block");
    const int m = static_cast<int>(coords.size()) - 1;
    Eigen::VectorXd mu(m);
    Eigen::MatrixXd S(m, m);
    for (int a = 0, ra = 0; a <= m; ++a) {
        if (a == p) continue;
        mu[ra] = mean[a];
        for (int b = 0, rb = 0; b <= m; ++b) {
            if (b == p) continue;
            S(ra, rb++) = cov(a, b);
        }
        ++ra;
    }
    return {mu, S};
}

GaussianBlock FullBlock::to_block() const {
    auto [mu, S] = drop(pivot);
    return GaussianBlock{coords, pivot, total, mu, S};
}

std::vector<std::vector<int>> partition_by_heaviest(const ParamMatrix& pm) {
    std::vector<std::vector<int>> groups(pm.k());
    for (int i = 0; i < pm.n(); ++i) groups[heaviest_coordinate(pm.row(i))].push_back(i);
    return groups;
}

int bucket_level(std::size_t size, double t, double gamma) {
    const double s = static_cast<double>(size);
    if (s < t) return 0;
    int l = static_cast<int>(std::floor(std::pow(s / t, 1.0 / gamma)));
    while (l > 0 && std::pow(l, gamma) * t > s) --l;
    while (std::pow(l + 1, gamma) * t <= s) ++l;
    return l;
}

std::map<int, std::vector<int>> bucketize(const ParamMatrix& pm, const std::vector<int>& group, int heavy,
                                          double t, double gamma) {
    std::map<std::vector<int>, std::vector<int>> patterns;
    for (int i : group) {
        std::vector<int> I;
        for (int j = 0; j < pm.k(); ++j)
            if (j != heavy && pm(i, j) > 0) I.push_back(j);
        patterns[I].push_back(i);
    }
    std::map<int, std::vector<int>> buckets;
    for (auto& [I, rows] : patterns) {
        auto& b = buckets[bucket_level(rows.size(), t, gamma)];
        b.insert(b.end(), rows.begin(), rows.end());
    }
    for (auto& [l, rows] : buckets) std::sort(rows.begin(), rows.end());
    return buckets;
}

SparseSplit sparse_bin_split(const ParamMatrix& pm, const std::vector<int>& rows, double t) {
    SparseSplit out;
    out.dense = rows;
    while (true) {
        std::vector<std::size_t> count(pm.k(), 0);
        for (int i : out.dense)
            for (int j = 0; j < pm.k(); ++j)
                if (pm(i, j) > 0) ++count[j];
        int col = -1;
        for (int j = 0; j < pm.k() && col < 0; ++j)
            if (count[j] > 0 && static_cast<double>(count[j]) < t) col = j;
        if (col < 0) break;
        std::vector<int> keep;
        for (int i : out.dense) (pm(i, col) > 0 ? out.leftover : keep).push_back(i);
        out.dense = std::move(keep);
    }
    std::sort(out.leftover.begin(), out.leftover.end());
    return out;
}

GmdMoments gmd_moments(const ParamMatrix& pm, const std::vector<int>& rows, int dropped) {
    GmdMoments m;
    for (int j = 0; j < pm.k(); ++j)
        if (j != dropped) m.coords.push_back(j);
    const int d = static_cast<int>(m.coords.size());
    m.mean = Eigen::VectorXd::Zero(d);
    m.cov = Eigen::MatrixXd::Zero(d, d);
    std::vector<double> vis(d);
    for (int i : rows) {
        for (int a = 0; a < d; ++a) vis[a] = pm(i, m.coords[a]);
        for (int a = 0; a < d; ++a) m.mean[a] += vis[a];
        m.cov += crv_covariance(vis);
    }
    return m;
}

FullBlock extend_to_full_block(const std::vector<int>& coords, int dropped, std::int64_t total,
                               const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    FullBlock b;
    b.coords = coords;
    std::sort(b.coords.begin(), b.coords.end());
    b.pivot = dropped;
    b.total = total;
    const int p = b.index_of(dropped);
    if (p < 0) throw InvalidArgument("extend_to_full_block: dropped coordinate not in set");
    const int m = static_cast<int>(b.coords.size());
    if (mean.size() != m - 1 || cov.rows() != m - 1) throw InvalidArgument("extend_to_full_block: shape mismatch");
    b.mean = Eigen::VectorXd::Zero(m);
    b.cov = Eigen::MatrixXd::Zero(m, m);
    std::vector<int> pos;
    for (int a = 0; a < m; ++a)
        if (a != p) pos.push_back(a);
    for (int a = 0; a < m - 1; ++a) {
        b.mean[pos[a]] = mean[a];
        for (int c = 0; c < m - 1; ++c) b.cov(pos[a], pos[c]) = cov(a, c);
        b.cov(pos[a], p) = b.cov(p, pos[a]) = -cov.row(a).sum();
    }
    b.mean[p] = static_cast<double>(total) - mean.sum();
    b.cov(p, p) = cov.sum();
    return b;
}

double retained_min_eigenvalue(const FullBlock& b) {
    if (b.coords.size() < 2) return 0.0;
    return min_eigenvalue(b.drop(b.pivot).second);
}

CostedBlock swap_pivot(const FullBlock& b, int new_pivot, int k) {
    if (b.index_of(new_pivot) < 0) throw InvalidArgument("swap_pivot: pivot not in block");
    if (new_pivot == b.pivot) return {b, 0.0};
    double lo = std::max(min_eigenvalue(b.drop(b.pivot).second), min_eigenvalue(b.drop(new_pivot).second));
    FullBlock out = b;
    out.pivot = new_pivot;
    return {out, tv_cost(k, std::sqrt(std::max(0.0, lo)))};
}

CostedBlock merge_blocks(const FullBlock& a, const FullBlock& b, int k) {
    if (a.pivot != b.pivot) throw InvalidArgument("merge_blocks: pivot mismatch");
    FullBlock m;
    std::set_union(a.coords.begin(), a.coords.end(), b.coords.begin(), b.coords.end(),
                   std::back_inserter(m.coords));
    m.pivot = a.pivot;
    m.total = a.total + b.total;
    m.rows = a.rows + b.rows;
    const int d = static_cast<int>(m.coords.size());
    m.mean = Eigen::VectorXd::Zero(d);
    m.cov = Eigen::MatrixXd::Zero(d, d);
    for (const FullBlock* src : {&a, &b}) {
        std::vector<int> pos;
        for (int c : src->coords) pos.push_back(m.index_of(c));
        for (std::size_t r = 0; r < pos.size(); ++r) {
            m.mean[pos[r]] += src->mean[r];
            for (std::size_t s = 0; s < pos.size(); ++s) m.cov(pos[r], pos[s]) += src->cov(r, s);
        }
    }
    double sigma = std::numeric_limits<double>::infinity();
    for (int c : m.coords) {
        if (c == m.pivot) continue;
        double sa = a.index_of(c) >= 0 ? a.cov(a.index_of(c), a.index_of(c)) : 0.0;
        double sb = b.index_of(c) >= 0 ? b.cov(b.index_of(c), b.index_of(c)) : 0.0;
        sigma = std::min(sigma, std::sqrt(std::max({sa, sb, 0.0})));
    }
    double cost = std::isfinite(sigma) ? tv_cost(k, sigma) : 0.0;
    bool trivial = a.cov.isZero(0) && a.mean.isZero(0) && a.total == 0;
    trivial = trivial || (b.cov.isZero(0) && b.mean.isZero(0) && b.total == 0);
    return {m, trivial ? 0.0 : cost};
}

double clt_bound(int k, double sigma, double n) {
    if (!(sigma > 0) || n < 1) return 1.0;
    return std::pow(k, 4.0 / 3.0) / std::cbrt(sigma) * 2.2 * std::pow(3.1 + 0.83 * std::log(n), 2.0 / 3.0);
}

double DecompositionResult::ledger_total() const {
    double s = 0;
    for (const auto& e : ledger) s += e.cost;
    return s;
}

DecompositionResult decompose(const ParamMatrix& pm, const DecompositionConfig& cfg) {
    const int k = pm.k(), n = pm.n();
    cfg.validate(k);
    if (cfg.theory_mode && cfg.t > kTheoryExecutionCap)
        throw CapExceeded("decompose: theory constant t exceeds the execution cap");

    DecompositionResult res;
    res.rounded = round_parameters(pm, cfg.c);
    {
        double ck = cfg.c * k;
        double r = ck < 1 ? 5.0 * k * k * std::sqrt(ck * std::log(1.0 / ck)) : 1.0;
        res.ledger.push_back({"rounding", std::min(1.0, r)});
    }
    const ParamMatrix& R = res.rounded;
    auto finish = [&](std::vector<int> sparse) {
        std::sort(sparse.begin(), sparse.end());
        std::vector<GaussianBlock> blocks;
        for (const auto& b : res.blocks) blocks.push_back(b.to_block());
        res.decomposition.gaussian = BlockGaussian(k, std::move(blocks));
        res.decomposition.sparse = R.select(sparse);
        res.sparse_rows = std::move(sparse);
        return res;
    };

    if (static_cast<double>(n) <= cfg.t * k * k) {
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        return finish(std::move(all));
    }

    std::vector<int> sparse;
    std::vector<FullBlock> group_blocks;
    auto groups = partition_by_heaviest(R);
    for (int g = 0; g < k; ++g) {
        if (groups[g].empty()) continue;
        auto buckets = bucketize(R, groups[g], g, cfg.t, cfg.gamma);
        std::vector<std::pair<int, std::vector<int>>> components;  // (level, rows)
        for (auto& [level, rows] : buckets) {
            if (level == 0) {
                auto split = sparse_bin_split(R, rows, cfg.t);
                if (split.leftover.size() > static_cast<std::size_t>(k * cfg.t))
                    throw Error("decompose: sparse leftover exceeds k*t");
                sparse.insert(sparse.end(), split.leftover.begin(), split.leftover.end());
                if (!split.dense.empty()) components.emplace_back(0, std::move(split.dense));
            } else {
                components.emplace_back(level, std::move(rows));
            }
        }
        // Largest bucket first.
        std::stable_sort(components.begin(), components.end(),
                         [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });
        std::optional<FullBlock> acc;
        for (auto& [level, rows] : components) {
            auto mom = gmd_moments(R, rows, g);
            std::vector<int> coords{g};
            std::vector<int> keep;
            for (std::size_t a = 0; a < mom.coords.size(); ++a) {
                bool used = false;
                for (int i : rows) used = used || R(i, mom.coords[a]) > 0;
                if (used) {
                    coords.push_back(mom.coords[a]);
                    keep.push_back(static_cast<int>(a));
                }
            }
            Eigen::VectorXd mu(keep.size());
            Eigen::MatrixXd S(keep.size(), keep.size());
            for (std::size_t a = 0; a < keep.size(); ++a) {
                mu[a] = mom.mean[keep[a]];
                for (std::size_t b = 0; b < keep.size(); ++b) S(a, b) = mom.cov(keep[a], keep[b]);
            }
            std::vector<int> sorted_coords = coords;
            std::sort(sorted_coords.begin(), sorted_coords.end());
            // extend_to_full_block expects mean/cov in sorted order of the non-dropped coordinates,
            // which `keep` preserves because mom.coords is sorted.
            FullBlock fb = extend_to_full_block(sorted_coords, g, static_cast<std::int64_t>(rows.size()), mu, S);
            fb.rows = rows.size();
            double lam = retained_min_eigenvalue(fb);
            res.ledger.push_back({"clt group " + std::to_string(g) + " level " + std::to_string(level),
                                  std::min(1.0, clt_bound(k, std::sqrt(std::max(0.0, lam)), rows.size()))});
            if (!acc) {
                acc = std::move(fb);
            } else {
                auto merged = merge_blocks(*acc, fb, k);
                res.ledger.push_back({"merge within group " + std::to_string(g), merged.cost});
                acc = std::move(merged.block);
            }
        }
        if (acc) group_blocks.push_back(std::move(*acc));
    }
    if (sparse.size() > static_cast<std::size_t>(cfg.t * k * k))
        throw Error("decompose: sparse component exceeds t*k^2 rows");

    // Merge overlapping blocks across groups on their first shared coordinate.
    while (true) {
        bool merged_any = false;
        for (std::size_t a = 0; a < group_blocks.size() && !merged_any; ++a)
            for (std::size_t b = a + 1; b < group_blocks.size() && !merged_any; ++b) {
                std::vector<int> shared;
                std::set_intersection(group_blocks[a].coords.begin(), group_blocks[a].coords.end(),
                                      group_blocks[b].coords.begin(), group_blocks[b].coords.end(),
                                      std::back_inserter(shared));
                if (shared.empty()) continue;
                int s = shared.front();
                auto sa = swap_pivot(group_blocks[a], s, k);
                auto sb = swap_pivot(group_blocks[b], s, k);
                if (sa.cost > 0) res.ledger.push_back({"swap pivot to " + std::to_string(s), sa.cost});
                if (sb.cost > 0) res.ledger.push_back({"swap pivot to " + std::to_string(s), sb.cost});
                auto m = merge_blocks(sa.block, sb.block, k);
                res.ledger.push_back({"merge across groups on " + std::to_string(s), m.cost});
                group_blocks[a] = std::move(m.block);
                group_blocks.erase(group_blocks.begin() + static_cast<std::ptrdiff_t>(b));
                merged_any = true;
            }
        if (!merged_any) break;
    }
    res.blocks = std::move(group_blocks);
    return finish(std::move(sparse));
}

}  // namespace pmdlab
