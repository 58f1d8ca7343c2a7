#include "pmdlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace pmdlab {

namespace {

double binomial_coefficient(int n, int r) {
    if (r < 0 || r > n) return 0;
    double c = 1;
    for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
    return c;
}

double sum_tolerance(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
    return a + b;
}

}  // namespace

std::int64_t round_half_even(double v) { return static_cast<std::int64_t>(std::nearbyint(v)); }

SparsePmf pmd_pmf_exact(const ParamMatrix& pm) {
    const int n = pm.n(), k = pm.k();
    if (k == 1 || n == 0) {
        Point x(k, 0);
        x[k - 1] = n;
        return SparsePmf::point_mass(x);
    }
    const double cap = static_cast<double>(support_cap());
    if (binomial_coefficient(n + k - 1, k - 1) > cap)
        throw SupportCapExceeded("pmd_pmf_exact: simplex support exceeds cap (n=" + std::to_string(n) +
                                 ", k=" + std::to_string(k) + ")");

    // Dense table over the first k-1 coordinates; the last one is implied.
    const int d = k - 1;
    std::vector<int> bound(d, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            if (pm(i, j) > 0) ++bound[j];
    std::vector<std::size_t> stride(d);
    double box = 1;
    for (int j = d - 1; j >= 0; --j) {
        stride[j] = static_cast<std::size_t>(box);
        box *= bound[j] + 1;
    }
    if (box > 4 * cap) throw SupportCapExceeded("pmd_pmf_exact: table exceeds cap");
    std::vector<double> table(static_cast<std::size_t>(box), 0.0);
    table[0] = 1.0;

    std::vector<int> coord(d);
    std::vector<int> used(d, 0);  // rows so far with nonzero entry per coordinate
    for (int i = 0; i < n; ++i) {
        auto r = pm.row(i);
        for (int j = 0; j < d; ++j)
            if (r[j] > 0) ++used[j];
        // Walk cells in decreasing linear order so sources are still old values.
        for (std::size_t L = table.size(); L-- > 0;) {
            std::size_t rem = L;
            bool reachable = true;
            for (int j = 0; j < d; ++j) {
                coord[j] = static_cast<int>(rem / stride[j]);
                rem %= stride[j];
                if (coord[j] > used[j]) reachable = false;
            }
            if (!reachable) continue;
            double v = r[d] * table[L];
            for (int j = 0; j < d; ++j)
                if (coord[j] > 0 && r[j] > 0) v += r[j] * table[L - stride[j]];
            table[L] = v;
        }
    }

    std::vector<std::pair<Point, double>> out;
    for (std::size_t L = 0; L < table.size(); ++L) {
        if (table[L] <= 0) continue;
        Point x(k);
        std::size_t rem = L;
        std::int64_t s = 0;
        for (int j = 0; j < d; ++j) {
            x[j] = static_cast<std::int64_t>(rem / stride[j]);
            rem %= stride[j];
            s += x[j];
        }
        if (s > n) continue;
        x[d] = n - s;
        out.emplace_back(std::move(x), table[L]);
    }
    return SparsePmf(k, std::move(out));
}

SparsePmf siirv_pmf_exact(const ParamMatrix& pm) {
    const int n = pm.n(), k = pm.k();
    std::vector<double> f(static_cast<std::size_t>(k - 1) * n + 1, 0.0);
    f[0] = 1.0;
    std::size_t top = 0;
    for (int i = 0; i < n; ++i) {
        auto r = pm.row(i);
        top += k - 1;
        for (std::size_t v = top + 1; v-- > 0;) {
            double s = 0;
            for (int j = 0; j < k; ++j)
                if (v >= static_cast<std::size_t>(j) && r[j] > 0) s += r[j] * f[v - j];
            f[v] = s;
        }
    }
    std::vector<std::pair<Point, double>> out;
    for (std::size_t v = 0; v < f.size(); ++v)
        if (f[v] > 0) out.push_back({Point{static_cast<std::int64_t>(v)}, f[v]});
    return SparsePmf(1, std::move(out));
}

int crv_sample(std::span<const double> row, Rng& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double u = U(rng);
    int last = -1;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] <= 0) continue;
        last = static_cast<int>(j);
        if (u < row[j]) return last;
        u -= row[j];
    }
    return last;
}

Point pmd_sample(const ParamMatrix& pm, Rng& rng) {
    Point x(pm.k(), 0);
    for (int i = 0; i < pm.n(); ++i) ++x[crv_sample(pm.row(i), rng)];
    return x;
}

double tv_distance(const SparsePmf& p, const SparsePmf& q) {
    if (p.dims() != q.dims()) throw InvalidArgument("tv_distance: dimension mismatch");
    const auto& a = p.entries();
    const auto& b = q.entries();
    double s = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            s += a[i++].second;
        } else if (i == a.size() || b[j].first < a[i].first) {
            s += b[j++].second;
        } else {
            s += std::abs(a[i++].second - b[j++].second);
        }
    }
    return std::min(1.0, 0.5 * s);
}

double kolmogorov_distance_1d(const SparsePmf& p, const SparsePmf& q) {
    if (p.dims() != 1 || q.dims() != 1) throw InvalidArgument("kolmogorov_distance_1d: dims must be 1");
    const auto& a = p.entries();
    const auto& b = q.entries();
    double fa = 0, fb = 0, best = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        std::int64_t x;
        if (j == b.size() || (i < a.size() && a[i].first[0] <= b[j].first[0]))
            x = a[i].first[0];
        else
            x = b[j].first[0];
        while (i < a.size() && a[i].first[0] == x) fa += a[i++].second;
        while (j < b.size() && b[j].first[0] == x) fb += b[j++].second;
        best = std::max(best, std::abs(fa - fb));
    }
    return best;
}

SparsePmf convolve(const SparsePmf& p, const SparsePmf& q) {
    if (p.dims() != q.dims()) throw InvalidArgument("convolve: dimension mismatch");
    const std::size_t cap = support_cap();
    std::unordered_map<Point, double, PointHash> acc;
    acc.reserve(std::min<std::size_t>(p.size() * q.size(), cap));
    Point z(p.dims());
    for (const auto& [x, px] : p.entries()) {
        for (const auto& [y, py] : q.entries()) {
            for (int j = 0; j < p.dims(); ++j) z[j] = x[j] + y[j];
            acc[z] += px * py;
        }
        if (acc.size() > cap) throw SupportCapExceeded("convolve: support exceeds cap");
    }
    std::vector<std::pair<Point, double>> out(acc.begin(), acc.end());
    return SparsePmf(p.dims(), std::move(out), sum_tolerance(p.mass_tolerance(), q.mass_tolerance()));
}

Eigen::MatrixXd crv_covariance(std::span<const double> row) {
    const int d = static_cast<int>(row.size());
    Eigen::MatrixXd S(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) S(i, j) = (i == j) ? row[i] * (1.0 - row[i]) : -row[i] * row[j];
    return S;
}

SparsePmf empirical_pmf(const std::vector<Point>& samples) {
    if (samples.empty()) throw InvalidArgument("empirical_pmf: no samples");
    const double w = 1.0 / static_cast<double>(samples.size());
    std::vector<std::pair<Point, double>> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.emplace_back(s, w);
    return SparsePmf(static_cast<int>(samples.front().size()), std::move(out));
}

}  // namespace pmdlab
