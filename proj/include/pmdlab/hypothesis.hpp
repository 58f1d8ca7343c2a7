#pragma once

#include <memory>
#include <string>
#include <variant>

#include "pmdlab/gaussian.hpp"
#include "pmdlab/types.hpp"

namespace pmdlab {

/// A block Gaussian convolved with a PMD on few rows.
struct StructuralDecomposition {
    BlockGaussian gaussian;
    ParamMatrix sparse;
};

/// Sum over the sparse support y of sparse(y) * gaussian(x - y).
double hybrid_pmf_at(const StructuralDecomposition& sd, const Point& x);
SparsePmf tabulate_decomposition(const StructuralDecomposition& sd, double tail_sd = 8.0);

struct ExactPmd {
    ParamMatrix pm;
};
struct GaussianPlusSparse {
    StructuralDecomposition sd;
};
/// scale * round(N(mean, variance)) + R with R ~ residue on {0..scale-1}, independent.
struct SiirvForm {
    int scale = 1;
    double mean = 0;
    double variance = 0;
    std::vector<double> residue{1.0};
};
struct TabulatedPmf {
    SparsePmf pmf;
};

class Hypothesis {
public:
    using Form = std::variant<ExactPmd, GaussianPlusSparse, SiirvForm, TabulatedPmf>;

    explicit Hypothesis(Form form, std::string label = {});

    int dims() const { return dims_; }
    const Form& form() const { return form_; }
    const std::string& label() const { return label_; }
    std::string tag() const;

    double pmf_at(const Point& x) const;
    Point sample(Rng& rng) const;
    /// Enumerable pmf (tails of Gaussian parts cut at 8 sd).
    SparsePmf tabulate() const;

private:
    struct Cache;
    Form form_;
    std::string label_;
    int dims_ = 0;
    std::shared_ptr<const Cache> cache_;
};

}  // namespace pmdlab
