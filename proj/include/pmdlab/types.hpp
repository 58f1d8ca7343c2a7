#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace pmdlab {

using Point = std::vector<std::int64_t>;
using Rng = std::mt19937_64;

struct PointHash {
    std::size_t operator()(const Point& p) const noexcept;
};

/// Lattice-point cap for exact oracles. Reads PMDLAB_SUPPORT_CAP, default 1e7.
std::size_t support_cap();

/// The n x k parameter matrix of a PMD. Rows are CRV probability vectors.
class ParamMatrix {
public:
    ParamMatrix() = default;
    ParamMatrix(int n, int k, std::vector<double> entries);
    static ParamMatrix from_rows(const std::vector<std::vector<double>>& rows, int k = -1);

    int n() const { return n_; }
    int k() const { return k_; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * k_ + j]; }
    std::span<const double> row(int i) const {
        return {data_.data() + static_cast<std::size_t>(i) * k_, static_cast<std::size_t>(k_)};
    }
    const std::vector<double>& data() const { return data_; }
    std::vector<std::vector<double>> rows() const;

    /// Rows selected by index, in the given order.
    ParamMatrix select(const std::vector<int>& idx) const;
    /// Vertical concatenation; both operands must share k.
    ParamMatrix stack(const ParamMatrix& other) const;

    bool operator==(const ParamMatrix& o) const = default;

private:
    int n_ = 0;
    int k_ = 1;
    std::vector<double> data_;
};

/// Truncated-CRV parameters: k-1 visible columns plus an implied invisible mass.
class GmdParams {
public:
    GmdParams() = default;
    GmdParams(int n, int d, std::vector<double> visible);
    /// Drops column `invisible` of a PMD matrix.
    static GmdParams from_pmd(const ParamMatrix& pm, int invisible);

    int n() const { return n_; }
    int dims() const { return d_; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * d_ + j]; }
    double invisible(int i) const;
    std::span<const double> row(int i) const {
        return {data_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)};
    }
    /// The PMD obtained by appending the invisible mass as the last column.
    ParamMatrix to_pmd() const;

private:
    int n_ = 0;
    int d_ = 0;
    std::vector<double> data_;
};

/// Finite lattice-supported pmf. Entries are kept sorted by point.
class SparsePmf {
public:
    static constexpr double kPruneBelow = 1e-15;
    static constexpr double kMassTolerance = 1e-9;

    SparsePmf() = default;
    /// Validates mass within `mass_tolerance` of 1 (pass infinity for sub-measures).
    SparsePmf(int dims, std::vector<std::pair<Point, double>> entries,
              double mass_tolerance = kMassTolerance);
    static SparsePmf point_mass(const Point& x);
    static SparsePmf measure(int dims, std::vector<std::pair<Point, double>> entries);

    int dims() const { return dims_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<std::pair<Point, double>>& entries() const { return entries_; }
    double at(const Point& x) const;
    double total_mass() const;
    double pruned_mass() const { return pruned_mass_; }
    double mass_tolerance() const { return mass_tolerance_; }
    std::vector<double> mean() const;

    /// Pushforward under a map of lattice points.
    template <class F>
    SparsePmf map(int out_dims, F&& f) const {
        std::vector<std::pair<Point, double>> out;
        out.reserve(entries_.size());
        for (const auto& [x, p] : entries_) out.emplace_back(f(x), p);
        return SparsePmf(out_dims, std::move(out), mass_tolerance_);
    }

private:
    int dims_ = 0;
    std::vector<std::pair<Point, double>> entries_;
    double pruned_mass_ = 0.0;
    double mass_tolerance_ = kMassTolerance;
};

}  // namespace pmdlab
