#include "pmdlab/learn.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>

#include "pmdlab/covers.hpp"
#include "pmdlab/estimation.hpp"
#include "pmdlab/lattice.hpp"

namespace pmdlab {

SampleOracle make_oracle(Hypothesis h, std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    auto hyp = std::make_shared<Hypothesis>(std::move(h));
    return [rng, hyp]() { return hyp->sample(*rng); };
}

void LearnConfig::validate() const {
    if (!(eps > 0 && eps < 1)) throw InvalidArgument("LearnConfig: eps must lie in (0,1)");
    if (!(delta > 0 && delta < 1)) throw InvalidArgument("LearnConfig: delta must lie in (0,1)");
    if (sparse_cap < 0 || sparse_rows_max < 0) throw InvalidArgument("LearnConfig: negative sparse bound");
    if (!(sparse_granularity > 0 && sparse_granularity <= 1) || !(siirv_granularity > 0 && siirv_granularity <= 1))
        throw InvalidArgument("LearnConfig: granularity must lie in (0,1]");
    if (!(tournament_divisor >= 1)) throw InvalidArgument("LearnConfig: tournament_divisor must be >= 1");
    if (psd_eps_prime < 0 || mean_step < 0 || mean_half_width < 0 || shift_window < 0)
        throw InvalidArgument("LearnConfig: negative grid parameter");
}

std::size_t LearnConfig::resolved_moment_samples(int k) const {
    if (moment_samples > 0) return moment_samples;
    double m = std::ceil(40.0 * std::pow(k, 4) / (eps * eps));
    return static_cast<std::size_t>(std::max(500.0, std::min(1e6, m)));
}

double LearnConfig::theory_variance_threshold(int k) const {
    double l = std::log(1 / eps);
    return 15 * std::pow(k, 18) / std::pow(eps, 6) * l * l;
}

namespace {

struct Draws {
    const SampleOracle& oracle;
    LearnReport& report;
    Point operator()() {
        ++report.samples_drawn;
        return oracle();
    }
    std::vector<Point> many(std::size_t m) {
        std::vector<Point> v;
        v.reserve(m);
        for (std::size_t i = 0; i < m; ++i) v.push_back((*this)());
        return v;
    }
};

// All multisets of `size` elements drawn from `rows`.
void multisets(const std::vector<std::vector<double>>& rows, int size, std::size_t from,
               std::vector<std::vector<double>>& cur, const std::function<void()>& emit) {
    if (static_cast<int>(cur.size()) == size) {
        emit();
        return;
    }
    for (std::size_t i = from; i < rows.size(); ++i) {
        cur.push_back(rows[i]);
        multisets(rows, size, i, cur, emit);
        cur.pop_back();
    }
}

std::vector<ParamMatrix> sparse_candidates(int k, double g, int rows_max) {
    std::vector<ParamMatrix> out{ParamMatrix(0, k, {})};
    for (int r = 1; r <= rows_max; ++r) {
        GridPmdCover cover(r, k, g);
        while (auto m = cover.next()) out.push_back(std::move(*m));
    }
    return out;
}

// Vectors l >= 0 of length b with sum r.
void compositions(int b, int r, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == b - 1) {
        cur.push_back(r);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int v = 0; v <= r; ++v) {
        cur.push_back(v);
        compositions(b, r - v, cur, out);
        cur.pop_back();
    }
}

std::vector<Eigen::MatrixXd> covariance_candidates(const Eigen::MatrixXd& a_hat, const LearnConfig& cfg) {
    PsdCoverSpec spec{cfg.eps, 0.0, cfg.eps, cfg.psd_eps_prime};
    PsdCover cover(a_hat, spec);
    cover.set_enumeration_limit(2e6);
    std::vector<Eigen::MatrixXd> out;
    while (auto b = cover.next()) {
        // Only elements inside the estimation band can be the target.
        if (exact_directional_ratio(a_hat, *b) > spec.eps1 + spec.eps) continue;
        bool dup = false;
        for (const auto& o : out) dup = dup || (o - *b).cwiseAbs().maxCoeff() <= 1e-9;
        if (!dup) out.push_back(std::move(*b));
    }
    return out;
}

double value_of(const Point& p) { return static_cast<double>(p[0]); }

}  // namespace

LearnResult learn_pmd(const SampleOracle& oracle, int k, const LearnConfig& cfg) {
    cfg.validate();
    LearnResult res;
    auto& rep = res.report;
    rep.kind = "pmd";
    Draws draw{oracle, rep};
    Rng rng(cfg.seed);

    rep.first_sample = draw();
    if (static_cast<int>(rep.first_sample.size()) != k) throw InvalidArgument("learn_pmd: sample dimension differs from k");
    const std::size_t M = cfg.resolved_moment_samples(k);
    rep.moment_samples = M;
    auto samples = draw.many(std::max<std::size_t>(M, 2));
    const auto full = empirical_moments(samples);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full_es(full.cov);

    const double step = cfg.mean_step > 0 ? cfg.mean_step : cfg.eps / k;
    const double half = cfg.mean_half_width > 0 ? cfg.mean_half_width : cfg.eps;
    const int rows_max = std::min(cfg.sparse_rows_max, cfg.sparse_cap);
    const auto sparse = sparse_candidates(k, cfg.sparse_granularity, rows_max);

    std::vector<Hypothesis> hyps;
    for (const auto& S : block_structure_guesses(k)) {
        ++rep.structures;
        const std::size_t nb = S.blocks.size();
        std::vector<std::vector<int>> free(nb);
        std::vector<EmpiricalMoments> est(nb);
        std::vector<std::vector<Eigen::MatrixXd>> covs(nb);
        bool skip = false;
        for (std::size_t b = 0; b < nb && !skip; ++b) {
            for (int c : S.blocks[b])
                if (c != S.pivots[b]) free[b].push_back(c);
            if (free[b].empty()) {
                covs[b].push_back(Eigen::MatrixXd(0, 0));
                continue;
            }
            est[b] = empirical_moments(samples, free[b]);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est[b].cov, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < 1.0) {
                skip = true;
                break;
            }
            covs[b] = covariance_candidates(est[b].cov, cfg);
        }
        if (skip) {
            ++rep.structures_skipped;
            continue;
        }
        for (const auto& sp : sparse) {
            Eigen::VectorXd smean = Eigen::VectorXd::Zero(k);
            for (int i = 0; i < sp.n(); ++i)
                for (int j = 0; j < k; ++j) smean[j] += sp(i, j);
            std::vector<std::vector<int>> ls;
            std::vector<int> cur;
            compositions(static_cast<int>(nb), sp.n(), cur, ls);
            for (const auto& l : ls) {
                std::vector<std::int64_t> totals(nb);
                bool ok = true;
                for (std::size_t b = 0; b < nb; ++b) {
                    std::int64_t s = 0;
                    for (int c : S.blocks[b]) s += rep.first_sample[c];
                    totals[b] = s - l[b];
                    ok = ok && totals[b] >= 0 && l[b] <= cfg.sparse_cap;
                }
                if (!ok) continue;
                // per-block (cov, mean) options
                std::vector<std::vector<std::pair<const Eigen::MatrixXd*, Eigen::VectorXd>>> opts(nb);
                for (std::size_t b = 0; b < nb; ++b) {
                    if (free[b].empty()) {
                        opts[b].push_back({&covs[b][0], Eigen::VectorXd(0)});
                        continue;
                    }
                    Eigen::VectorXd center = est[b].mean;
                    for (std::size_t a = 0; a < free[b].size(); ++a) center[a] -= smean[free[b][a]];
                    for (const auto& C : covs[b])
                        for (auto& mu : mean_cover(center, C, step, half)) opts[b].push_back({&C, mu});
                }
                std::vector<std::size_t> pos(nb, 0);
                while (true) {
                    std::vector<GaussianBlock> blocks;
                    Eigen::VectorXd implied = smean;
                    for (std::size_t b = 0; b < nb; ++b) {
                        const auto& [C, mu] = opts[b][pos[b]];
                        blocks.push_back(GaussianBlock{S.blocks[b], S.pivots[b], totals[b], mu, *C});
                        double fs = 0;
                        for (std::size_t a = 0; a < free[b].size(); ++a) {
                            implied[free[b][a]] += mu[a];
                            fs += mu[a];
                        }
                        implied[S.pivots[b]] += static_cast<double>(totals[b]) - fs;
                    }
                    ++rep.hypotheses_assembled;
                    bool keep = true;
                    if (!cfg.paranoid) {
                        Eigen::VectorXd d = full_es.eigenvectors().transpose() * (implied - full.mean);
                        for (int z = 0; z < k && keep; ++z) {
                            double lam = std::max(0.0, full_es.eigenvalues()[z]);
                            keep = std::abs(d[z]) <= 3 * cfg.eps * std::sqrt(lam) + 1e-6;
                        }
                    }
                    if (keep) {
                        StructuralDecomposition sd{BlockGaussian(k, std::move(blocks)), sp};
                        hyps.emplace_back(GaussianPlusSparse{std::move(sd)}, "pmd guess " + std::to_string(hyps.size()));
                    } else {
                        ++rep.hypotheses_pruned;
                    }
                    std::size_t b = 0;
                    for (; b < nb; ++b) {
                        if (++pos[b] < opts[b].size()) break;
                        pos[b] = 0;
                    }
                    if (b == nb) break;
                }
            }
        }
    }
    if (hyps.empty()) {
        rep.notes.push_back("no hypothesis survived; falling back to the empirical distribution");
        hyps.emplace_back(TabulatedPmf{empirical_pmf(samples)}, "empirical");
    }
    auto xs = draw.many(tournament_draws(hyps.size(), cfg.tournament_eps(), cfg.delta));
    auto t = fast_tournament(xs, hyps, cfg.tournament_eps(), cfg.delta, rng);
    rep.tournament = t.log;
    if (t.winner) res.hypothesis = hyps[*t.winner];
    res.candidates = std::move(hyps);
    return res;
}

std::size_t heavy_sample_count(int l, double eps, double delta) {
    return static_cast<std::size_t>(std::ceil(2 * (l + std::log(1 / delta)) / (eps * eps)));
}

std::size_t dkw_sample_count(double eps, double delta) {
    return static_cast<std::size_t>(std::ceil(std::log(2 / delta) / (2 * eps * eps)));
}

double iqr_denominator() { return 2 * std::sqrt(2.0) * boost::math::erf_inv(0.5); }

MedianIqrFit median_iqr_fit(std::vector<double> s) {
    if (s.size() < 4) throw InvalidArgument("median_iqr_fit: need at least 4 samples");
    std::sort(s.begin(), s.end());
    auto q = [&](double p) {
        double h = (static_cast<double>(s.size()) - 1) * p;
        auto lo = static_cast<std::size_t>(std::floor(h));
        std::size_t hi = std::min(lo + 1, s.size() - 1);
        return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
    };
    return {q(0.5), (q(0.75) - q(0.25)) / iqr_denominator()};
}

CdfVerdict empirical_cdf_check(const std::vector<Point>& samples, const SparsePmf& reference, double eps) {
    CdfVerdict v;
    v.distance = kolmogorov_distance_1d(empirical_pmf(samples), reference);
    v.threshold = eps;
    v.pass = v.distance <= eps;
    return v;
}

Hypothesis learn_heavy(const std::vector<Point>& samples, int l, int k, const LearnConfig& cfg) {
    if (l < 1 || l > std::max(1, k - 1)) throw InvalidArgument("learn_heavy: l must lie in [1, k-1]");
    if (samples.size() < 4) throw InvalidArgument("learn_heavy: need at least 4 samples");
    std::vector<double> residue(l, 0.0);
    std::vector<double> z;
    z.reserve(samples.size());
    for (const auto& p : samples) {
        std::int64_t x = p[0];
        std::int64_t r = ((x % l) + l) % l;
        residue[r] += 1;
        z.push_back(static_cast<double>((x - r) / l));
    }
    for (auto& r : residue) r /= static_cast<double>(samples.size());
    auto fit = median_iqr_fit(std::move(z));
    (void)cfg;
    return Hypothesis(SiirvForm{l, fit.mu, fit.sigma * fit.sigma, residue}, "heavy l=" + std::to_string(l));
}

Hypothesis learn_sparse(const std::vector<Point>& samples, int k, const LearnConfig& cfg, LearnReport* report) {
    if (samples.empty()) throw InvalidArgument("learn_sparse: no samples");
    const double m = static_cast<double>(samples.size());
    double mean = 0, var = 0;
    for (const auto& p : samples) mean += value_of(p);
    mean /= m;
    for (const auto& p : samples) var += (value_of(p) - mean) * (value_of(p) - mean);
    var = samples.size() > 1 ? var / (m - 1) : 0.0;
    const SparsePmf emp = empirical_pmf(samples);

    // Non-deterministic grid rows; deterministic rows only shift the sum.
    std::vector<std::vector<double>> rows;
    for (auto& r : grid_rows(k, cfg.siirv_granularity))
        if (*std::max_element(r.begin(), r.end()) < 1.0 - 1e-12) rows.push_back(std::move(r));
    const int rmax = cfg.siirv_rows_max > 0 ? cfg.siirv_rows_max : (k <= 2 ? 3 : (k == 3 ? 2 : 1));
    const int homogeneous_max = 40;

    std::vector<SparsePmf> cands;
    std::set<std::vector<std::pair<std::int64_t, std::int64_t>>> seen;
    auto add = [&](const ParamMatrix& pm) {
        SparsePmf p = pm.n() > 0 ? siirv_pmf_exact(pm) : SparsePmf::point_mass({0});
        std::vector<std::pair<std::int64_t, std::int64_t>> key;
        for (const auto& [x, q] : p.entries()) key.emplace_back(x[0], std::llround(q * 1e12));
        if (seen.insert(std::move(key)).second) cands.push_back(std::move(p));
    };
    add(ParamMatrix(0, k, {}));
    std::vector<std::vector<double>> cur;
    for (int r = 1; r <= rmax; ++r)
        multisets(rows, r, 0, cur, [&] { add(ParamMatrix::from_rows(cur, k)); });
    for (const auto& row : rows)
        for (int r = rmax + 1; r <= homogeneous_max; ++r) add(ParamMatrix::from_rows(std::vector(r, row), k));

    // Shifts near the empirical mean, ranked by Kolmogorov distance.
    const double slack = 1.0 + 3.0 * std::sqrt(var / m);
    std::vector<std::pair<double, SparsePmf>> ranked;
    for (const auto& c : cands) {
        const double cm = c.mean()[0];
        const double centre = mean - cm;
        auto lo = static_cast<std::int64_t>(std::ceil(centre - std::min<double>(slack, cfg.shift_window)));
        auto hi = static_cast<std::int64_t>(std::floor(centre + std::min<double>(slack, cfg.shift_window)));
        for (auto s = lo; s <= hi; ++s) {
            SparsePmf shifted = c.map(1, [s](const Point& x) { return Point{x[0] + s}; });
            ranked.emplace_back(kolmogorov_distance_1d(emp, shifted), std::move(shifted));
        }
    }
    if (ranked.empty()) return Hypothesis(TabulatedPmf{SparsePmf::point_mass({std::llround(mean)})}, "sparse");
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (ranked.size() > cfg.sparse_gate) ranked.resize(cfg.sparse_gate);
    std::vector<Hypothesis> hyps;
    for (auto& [d, p] : ranked) hyps.emplace_back(TabulatedPmf{std::move(p)}, "sparse");
    Rng rng(cfg.seed ^ 0x51ab5eULL);
    auto t = fast_tournament(samples, hyps, cfg.eps, cfg.delta, rng);
    if (report) report->notes.push_back("learn_sparse: " + std::to_string(cands.size()) + " candidate shapes, " +
                                        std::to_string(hyps.size()) + " after gate");
    return hyps[t.winner.value_or(0)];
}

LearnResult learn_siirv(const SampleOracle& oracle, int k, const LearnConfig& cfg) {
    cfg.validate();
    if (k < 2) throw InvalidArgument("learn_siirv: k must be >= 2");
    LearnResult res;
    auto& rep = res.report;
    rep.kind = "siirv";
    Draws draw{oracle, rep};
    Rng rng(cfg.seed);

    const std::size_t ms = std::max(dkw_sample_count(cfg.eps, cfg.delta),
                                    tournament_draws(cfg.sparse_gate, cfg.eps, cfg.delta));
    auto sparse_samples = draw.many(ms);
    rep.first_sample = sparse_samples.front();
    res.candidates.push_back(learn_sparse(sparse_samples, k, cfg, &rep));
    const double threshold = cfg.siirv_variance_threshold > 0 ? cfg.siirv_variance_threshold
                                                              : static_cast<double>(k * k) / cfg.eps;
    for (int l = 1; l <= k - 1; ++l) {
        auto s = draw.many(heavy_sample_count(l, cfg.eps, cfg.delta));
        auto h = learn_heavy(s, l, k, cfg);
        const auto& f = std::get<SiirvForm>(h.form());
        if (f.variance * l * l < threshold)
            rep.notes.push_back("learn_heavy l=" + std::to_string(l) + ": fitted variance below threshold");
        res.candidates.push_back(std::move(h));
    }
    auto xs = draw.many(tournament_draws(res.candidates.size(), cfg.tournament_eps(), cfg.delta));
    auto t = fast_tournament(xs, res.candidates, cfg.tournament_eps(), cfg.delta, rng);
    rep.tournament = t.log;
    rep.hypotheses_assembled = res.candidates.size();
    if (t.winner) res.hypothesis = res.candidates[*t.winner];
    return res;
}

}  // namespace pmdlab
