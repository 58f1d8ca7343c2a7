#include "pmdlab/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmdlab/lattice.hpp"

namespace pmdlab {

int heaviest_coordinate(std::span<const double> row) {
    int best = 0;
    for (int j = 1; j < static_cast<int>(row.size()); ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

RoundingPlan plan_rounding_pass(const ParamMatrix& pm, int x, int y, double c) {
    RoundingPlan plan;
    plan.x = x;
    plan.y = y;
    for (int i = 0; i < pm.n(); ++i) {
        double v = pm(i, x);
        if (v > 0 && v < c && heaviest_coordinate(pm.row(i)) == y) {
            plan.group.push_back(i);
            plan.mass_before += v;
        }
    }
    auto keep = static_cast<std::size_t>(std::floor(plan.mass_before / c + 1e-12));
    keep = std::min(keep, plan.group.size());
    std::vector<int> order = plan.group;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pm(a, x) > pm(b, x); });
    plan.retained.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(plan.retained.begin(), plan.retained.end());
    plan.mass_after = static_cast<double>(keep) * c;
    return plan;
}

ParamMatrix apply_rounding_pass(const ParamMatrix& pm, const RoundingPlan& plan, double c) {
    if (plan.group.empty()) return pm;
    std::vector<double> d = pm.data();
    const int k = pm.k();
    for (int i : plan.group) {
        bool keep = std::binary_search(plan.retained.begin(), plan.retained.end(), i);
        double old = d[static_cast<std::size_t>(i) * k + plan.x];
        double now = keep ? c : 0.0;
        double* row = d.data() + static_cast<std::size_t>(i) * k;
        row[plan.x] = now;
        row[plan.y] += old - now;
        // y absorbs the difference; recompute it from the rest so the row stays inside [0,1].
        double rest = 0;
        for (int j = 0; j < k; ++j)
            if (j != plan.y) rest += row[j];
        row[plan.y] = std::clamp(1.0 - rest, 0.0, 1.0);
    }
    return ParamMatrix(pm.n(), k, std::move(d));
}

ParamMatrix round_parameters(const ParamMatrix& pm, double c, std::vector<RoundingPlan>* passes) {
    const int k = pm.k();
    if (!(c > 0) || c > 1.0 / (2.0 * k) + 1e-15)
        throw InvalidArgument("round_parameters: need 0 < c <= 1/(2k), got " + std::to_string(c));
    ParamMatrix cur = pm;
    for (int x = 0; x < k; ++x)
        for (int y = 0; y < k; ++y) {
            if (x == y) continue;
            auto plan = plan_rounding_pass(cur, x, y, c);
            if (plan.group.empty()) continue;
            cur = apply_rounding_pass(cur, plan, c);
            if (passes) passes->push_back(std::move(plan));
        }
    return cur;
}

int fork_sample(std::span<const double> row, int x, int y, Rng& rng) {
    const int k = static_cast<int>(row.size());
    const double rx = row[x], ry = row[y];
    const double tol = 1e-12;
    if (x == y || rx > 1.0 / k + tol || rx + ry < 1.0 / k - tol)
        throw PreconditionViolation("fork_sample: need rho(x) <= 1/k and rho(x) + rho(y) >= 1/k");
    std::uniform_real_distribution<double> U(0.0, 1.0);
    if (U(rng) < 1.0 / k) return U(rng) < k * rx ? x : y;
    // Remaining branch: e_y w.p. k/(k-1)(rx+ry-1/k), e_j w.p. k/(k-1) rho(j) for j != x,y.
    std::vector<double> w(k, 0.0);
    const double scale = static_cast<double>(k) / (k - 1);
    for (int j = 0; j < k; ++j)
        if (j != x && j != y) w[j] = scale * row[j];
    w[y] = std::max(0.0, scale * (rx + ry - 1.0 / k));
    return crv_sample(w, rng);
}

}  // namespace pmdlab
