#pragma once

#include <optional>
#include <vector>

#include "pmdlab/hypothesis.hpp"

namespace pmdlab {

enum class Verdict { First, Second, Draw };

struct ContestRecord {
    std::size_t first = 0, second = 0;
    // Empirical means of sign(h1 - h2) under X, h1 and h2.
    double stat_x = 0, stat_1 = 0, stat_2 = 0;
    Verdict verdict = Verdict::Draw;
};

/// Scheffe test on W = {h1 > h2}, evaluated through s(x) = sign(h1(x) - h2(x)) so that
/// swapping the hypotheses swaps the verdict. Draw when the hypotheses' W-masses differ by at most 3 eps.
Verdict scheffe_compare(const Hypothesis& h1, const Hypothesis& h2, const std::vector<Point>& x_samples,
                        const std::vector<Point>& h1_samples, const std::vector<Point>& h2_samples, double eps,
                        ContestRecord* record = nullptr);

/// Draws per hypothesis: ceil(ln(6 N^2 / delta) / (2 eps^2)).
std::size_t tournament_draws(std::size_t n_hypotheses, double eps, double delta);
/// Reported budget ceil(2 (1 + ln(1/delta)) (1 + ln N) / eps^2); always >= tournament_draws.
std::size_t tournament_budget(std::size_t n_hypotheses, double eps, double delta);

struct TournamentLog {
    std::size_t hypotheses = 0;
    std::size_t draws_per_hypothesis = 0;
    std::size_t budget = 0;
    std::size_t x_samples_used = 0;
    std::size_t pmf_evaluations = 0;
    double eps = 0, delta = 0;
    std::vector<ContestRecord> contests;
    std::vector<double> scores;
};

struct TournamentResult {
    std::optional<std::size_t> winner;  // empty: failure
    TournamentLog log;
    bool failed() const { return !winner.has_value(); }
};

/// Round-robin Scheffe tournament. Highest score wins, ties to the lowest index.
TournamentResult fast_tournament(const std::vector<Point>& x_samples, const std::vector<Hypothesis>& hypotheses,
                                 double eps, double delta, Rng& rng);

}  // namespace pmdlab
