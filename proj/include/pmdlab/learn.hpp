#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pmdlab/hypothesis.hpp"
#include "pmdlab/selection.hpp"

namespace pmdlab {

/// Draws one sample from the unknown distribution.
using SampleOracle = std::function<Point()>;

/// Oracle backed by a hypothesis and a seeded generator.
SampleOracle make_oracle(Hypothesis h, std::uint64_t seed);

struct LearnConfig {
    double eps = 0.1;
    double delta = 0.1;
    std::uint64_t seed = 1;
    double tournament_divisor = 4;     // final tournaments run at eps / tournament_divisor

    // PMD learner
    int sparse_cap = 10;               // bound on sparse rows (theory: t k^2)
    std::size_t moment_samples = 0;    // 0: max(500, min(1e6, ceil(40 k^4 / eps^2)))
    double sparse_granularity = 0.5;   // grid for sparse-component rows
    int sparse_rows_max = 1;           // sparse candidates use at most this many rows
    double psd_eps_prime = 0.25;       // projection-grid accuracy of the PSD cover (0: formula value)
    double mean_step = 0;              // in units of sqrt(lambda); 0: eps / k
    double mean_half_width = 0;        // in units of sqrt(lambda); 0: eps
    bool paranoid = false;             // disable mean pruning

    // SIIRV learner
    double siirv_granularity = 0.1;
    int siirv_rows_max = 0;            // 0: 3 for k = 2, 2 for k = 3, 1 above
    int shift_window = 50;
    std::size_t sparse_gate = 40;      // candidates kept after the Kolmogorov gate
    double siirv_variance_threshold = 0;  // 0: desk value k^2 / eps

    double tournament_eps() const { return eps / tournament_divisor; }
    void validate() const;
    std::size_t resolved_moment_samples(int k) const;
    /// Theory-mode variance threshold 15 (k^18 / eps^6) log^2(1/eps), for reporting.
    double theory_variance_threshold(int k) const;
};

struct LearnReport {
    std::string kind;
    Point first_sample;
    std::size_t samples_drawn = 0;
    std::size_t moment_samples = 0;
    std::size_t structures = 0;
    std::size_t structures_skipped = 0;
    std::size_t hypotheses_assembled = 0;
    std::size_t hypotheses_pruned = 0;
    std::vector<std::string> notes;
    TournamentLog tournament;
};

struct LearnResult {
    std::optional<Hypothesis> hypothesis;  // empty: tournament failure
    std::vector<Hypothesis> candidates;
    LearnReport report;
};

LearnResult learn_pmd(const SampleOracle& oracle, int k, const LearnConfig& cfg);

LearnResult learn_siirv(const SampleOracle& oracle, int k, const LearnConfig& cfg);
/// Shifted sparse-SIIRV search followed by an internal tournament on `samples`.
Hypothesis learn_sparse(const std::vector<Point>& samples, int k, const LearnConfig& cfg,
                        LearnReport* report = nullptr);
/// l * round(N(mu, sigma^2)) + residue, fitted from floor(x / l) and x mod l.
Hypothesis learn_heavy(const std::vector<Point>& samples, int l, int k, const LearnConfig& cfg);
/// Samples used by learn_heavy: ceil(2 (l + ln(1/delta)) / eps^2).
std::size_t heavy_sample_count(int l, double eps, double delta);

struct MedianIqrFit {
    double mu = 0;
    double sigma = 0;
};
/// Median and IQR / (2 sqrt(2) erfinv(1/2)) with type-7 quantiles.
MedianIqrFit median_iqr_fit(std::vector<double> samples);
double iqr_denominator();

struct CdfVerdict {
    double distance = 0;
    double threshold = 0;
    bool pass = false;
};
/// Kolmogorov distance between the empirical cdf and a 1-D reference pmf against eps.
CdfVerdict empirical_cdf_check(const std::vector<Point>& samples, const SparsePmf& reference, double eps);
/// DKW sample size ceil(ln(2/delta) / (2 eps^2)).
std::size_t dkw_sample_count(double eps, double delta);

}  // namespace pmdlab
