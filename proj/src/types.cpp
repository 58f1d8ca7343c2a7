#include "pmdlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "pmdlab/errors.hpp"

namespace pmdlab {

std::size_t PointHash::operator()(const Point& p) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto v : p) {
        h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

std::size_t support_cap() {
    if (const char* env = std::getenv("PMDLAB_SUPPORT_CAP")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v >= 1) return static_cast<std::size_t>(v);
    }
    return 10'000'000;
}

ParamMatrix::ParamMatrix(int n, int k, std::vector<double> entries)
    : n_(n), k_(k), data_(std::move(entries)) {
    if (n < 0 || k < 1) throw InvalidArgument("ParamMatrix: need n >= 0 and k >= 1");
    if (data_.size() != static_cast<std::size_t>(n) * k)
        throw InvalidArgument("ParamMatrix: entry count does not match n*k");
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int j = 0; j < k; ++j) {
            double v = (*this)(i, j);
            if (!(v >= 0.0 && v <= 1.0))
                throw InvalidArgument("ParamMatrix: entry outside [0,1] in row " + std::to_string(i));
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw InvalidArgument("ParamMatrix: row " + std::to_string(i) + " does not sum to 1");
    }
}

ParamMatrix ParamMatrix::from_rows(const std::vector<std::vector<double>>& rows, int k) {
    if (rows.empty() && k < 1) throw InvalidArgument("ParamMatrix: k unknown for empty matrix");
    int kk = rows.empty() ? k : static_cast<int>(rows.front().size());
    if (k >= 1 && kk != k) throw InvalidArgument("ParamMatrix: row width differs from k");
    std::vector<double> data;
    data.reserve(rows.size() * kk);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != kk) throw InvalidArgument("ParamMatrix: ragged rows");
        data.insert(data.end(), r.begin(), r.end());
    }
    return ParamMatrix(static_cast<int>(rows.size()), kk, std::move(data));
}

std::vector<std::vector<double>> ParamMatrix::rows() const {
    std::vector<std::vector<double>> out(n_);
    for (int i = 0; i < n_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
}

ParamMatrix ParamMatrix::select(const std::vector<int>& idx) const {
    std::vector<double> data;
    data.reserve(idx.size() * k_);
    for (int i : idx) {
        auto r = row(i);
        data.insert(data.end(), r.begin(), r.end());
    }
    return ParamMatrix(static_cast<int>(idx.size()), k_, std::move(data));
}

ParamMatrix ParamMatrix::stack(const ParamMatrix& other) const {
    if (other.k_ != k_) throw InvalidArgument("ParamMatrix::stack: k mismatch");
    std::vector<double> data = data_;
    data.insert(data.end(), other.data_.begin(), other.data_.end());
    return ParamMatrix(n_ + other.n_, k_, std::move(data));
}

GmdParams::GmdParams(int n, int d, std::vector<double> visible)
    : n_(n), d_(d), data_(std::move(visible)) {
    if (n < 0 || d < 0) throw InvalidArgument("GmdParams: negative size");
    if (data_.size() != static_cast<std::size_t>(n) * d)
        throw InvalidArgument("GmdParams: entry count does not match n*d");
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            double v = (*this)(i, j);
            if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("GmdParams: entry outside [0,1]");
        }
        if (invisible(i) < -1e-12) throw InvalidArgument("GmdParams: row sum exceeds 1");
    }
}

GmdParams GmdParams::from_pmd(const ParamMatrix& pm, int invisible) {
    if (invisible < 0 || invisible >= pm.k()) throw InvalidArgument("GmdParams: bad invisible column");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(pm.n()) * (pm.k() - 1));
    for (int i = 0; i < pm.n(); ++i)
        for (int j = 0; j < pm.k(); ++j)
            if (j != invisible) v.push_back(pm(i, j));
    return GmdParams(pm.n(), pm.k() - 1, std::move(v));
}

double GmdParams::invisible(int i) const {
    double s = 0;
    for (double v : row(i)) s += v;
    return 1.0 - s;
}

ParamMatrix GmdParams::to_pmd() const {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(n_) * (d_ + 1));
    for (int i = 0; i < n_; ++i) {
        double s = 0;
        for (double x : row(i)) {
            v.push_back(x);
            s += x;
        }
        v.push_back(std::max(0.0, 1.0 - s));
    }
    return ParamMatrix(n_, d_ + 1, std::move(v));
}

SparsePmf::SparsePmf(int dims, std::vector<std::pair<Point, double>> entries, double mass_tolerance)
    : dims_(dims), mass_tolerance_(mass_tolerance) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    entries_.reserve(entries.size());
    for (auto& e : entries) {
        if (static_cast<int>(e.first.size()) != dims)
            throw InvalidArgument("SparsePmf: point dimension mismatch");
        if (!entries_.empty() && entries_.back().first == e.first)
            entries_.back().second += e.second;
        else
            entries_.push_back(std::move(e));
    }
    std::vector<std::pair<Point, double>> kept;
    kept.reserve(entries_.size());
    for (auto& e : entries_) {
        if (std::isnan(e.second) || e.second < -1e-12)
            throw InvalidArgument("SparsePmf: negative or NaN probability");
        if (e.second < kPruneBelow)
            pruned_mass_ += std::max(0.0, e.second);
        else
            kept.push_back(std::move(e));
    }
    entries_ = std::move(kept);
    if (std::isfinite(mass_tolerance_)) {
        double m = total_mass();
        if (std::abs(m + pruned_mass_ - 1.0) > mass_tolerance_)
            throw InvalidArgument("SparsePmf: total mass " + std::to_string(m) + " is not 1");
    }
}

SparsePmf SparsePmf::point_mass(const Point& x) {
    return SparsePmf(static_cast<int>(x.size()), {{x, 1.0}});
}

SparsePmf SparsePmf::measure(int dims, std::vector<std::pair<Point, double>> entries) {
    return SparsePmf(dims, std::move(entries), std::numeric_limits<double>::infinity());
}

double SparsePmf::at(const Point& x) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                               [](const auto& e, const Point& v) { return e.first < v; });
    if (it != entries_.end() && it->first == x) return it->second;
    return 0.0;
}

double SparsePmf::total_mass() const {
    double s = 0;
    for (const auto& e : entries_) s += e.second;
    return s;
}

std::vector<double> SparsePmf::mean() const {
    std::vector<double> m(dims_, 0.0);
    for (const auto& [x, p] : entries_)
        for (int j = 0; j < dims_; ++j) m[j] += p * static_cast<double>(x[j]);
    return m;
}

}  // namespace pmdlab
