#include "pmdlab/selection.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

namespace pmdlab {

namespace {

Verdict decide(double sx, double s1, double s2, double eps) {
    // E[s] = 2 P(W) - 1 when no ties, so the 3 eps draw band doubles.
    if (std::abs(s1 - s2) <= 6 * eps) return Verdict::Draw;
    double d1 = std::abs(s1 - sx), d2 = std::abs(sx - s2);
    if (d1 < d2) return Verdict::First;
    if (d2 < d1) return Verdict::Second;
    return Verdict::Draw;
}

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

Verdict scheffe_compare(const Hypothesis& h1, const Hypothesis& h2, const std::vector<Point>& x_samples,
                        const std::vector<Point>& h1_samples, const std::vector<Point>& h2_samples, double eps,
                        ContestRecord* record) {
    if (x_samples.empty() || h1_samples.empty() || h2_samples.empty())
        throw InvalidArgument("scheffe_compare: sample sets must be nonempty");
    auto mean_sign = [&](const std::vector<Point>& s) {
        double acc = 0;
        for (const auto& x : s) acc += sign(h1.pmf_at(x) - h2.pmf_at(x));
        return acc / static_cast<double>(s.size());
    };
    ContestRecord r;
    r.stat_x = mean_sign(x_samples);
    r.stat_1 = mean_sign(h1_samples);
    r.stat_2 = mean_sign(h2_samples);
    r.verdict = decide(r.stat_x, r.stat_1, r.stat_2, eps);
    if (record) *record = r;
    return r.verdict;
}

std::size_t tournament_draws(std::size_t n, double eps, double delta) {
    double N = static_cast<double>(std::max<std::size_t>(n, 1));
    return static_cast<std::size_t>(std::ceil(std::log(6 * N * N / delta) / (2 * eps * eps)));
}

std::size_t tournament_budget(std::size_t n, double eps, double delta) {
    double N = static_cast<double>(std::max<std::size_t>(n, 1));
    return static_cast<std::size_t>(std::ceil(2 * (1 + std::log(1 / delta)) * (1 + std::log(N)) / (eps * eps)));
}

TournamentResult fast_tournament(const std::vector<Point>& x_samples, const std::vector<Hypothesis>& hypotheses,
                                 double eps, double delta, Rng& rng) {
    if (!(eps > 0 && eps < 1) || !(delta > 0 && delta < 1))
        throw InvalidArgument("fast_tournament: eps and delta must lie in (0,1)");
    TournamentResult res;
    const std::size_t N = hypotheses.size();
    auto& log = res.log;
    log.hypotheses = N;
    log.eps = eps;
    log.delta = delta;
    log.budget = tournament_budget(N, eps, delta);
    log.scores.assign(N, 0.0);
    if (N == 0) return res;
    if (N == 1) {
        res.winner = 0;
        return res;
    }
    if (x_samples.empty()) throw InvalidArgument("fast_tournament: no samples from the unknown distribution");
    const std::size_t m = tournament_draws(N, eps, delta);
    log.draws_per_hypothesis = m;
    log.x_samples_used = std::min(m, x_samples.size());

    // Pool every sample point once; pmf values are memoized per (hypothesis, point).
    std::unordered_map<Point, std::size_t, PointHash> ids;
    auto intern = [&](const Point& p) { return ids.try_emplace(p, ids.size()).first->second; };
    std::vector<std::size_t> xs;
    for (std::size_t i = 0; i < log.x_samples_used; ++i) xs.push_back(intern(x_samples[i]));
    std::vector<std::vector<std::size_t>> hs(N);
    for (std::size_t h = 0; h < N; ++h)
        for (std::size_t i = 0; i < m; ++i) hs[h].push_back(intern(hypotheses[h].sample(rng)));
    std::vector<Point> points(ids.size());
    for (const auto& [p, id] : ids) points[id] = p;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> memo(N, std::vector<double>(points.size(), nan));
    auto pmf = [&](std::size_t h, std::size_t id) {
        double& v = memo[h][id];
        if (std::isnan(v)) {
            v = hypotheses[h].pmf_at(points[id]);
            ++log.pmf_evaluations;
        }
        return v;
    };

    std::vector<int> losses(N, 0);
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = a + 1; b < N; ++b) {
            auto mean_sign = [&](const std::vector<std::size_t>& s) {
                double acc = 0;
                for (auto id : s) acc += sign(pmf(a, id) - pmf(b, id));
                return acc / static_cast<double>(s.size());
            };
            ContestRecord r{a, b, mean_sign(xs), mean_sign(hs[a]), mean_sign(hs[b]), Verdict::Draw};
            r.verdict = decide(r.stat_x, r.stat_1, r.stat_2, eps);
            if (r.verdict == Verdict::First) {
                log.scores[a] += 1;
                ++losses[b];
            } else if (r.verdict == Verdict::Second) {
                log.scores[b] += 1;
                ++losses[a];
            }
            log.contests.push_back(r);
        }
    bool all_lose = true;
    for (std::size_t h = 0; h < N; ++h) all_lose = all_lose && 2 * losses[h] > static_cast<int>(N - 1);
    if (all_lose) return res;
    std::size_t best = 0;
    for (std::size_t h = 1; h < N; ++h)
        if (log.scores[h] > log.scores[best]) best = h;
    res.winner = best;
    return res;
}

}  // namespace pmdlab
