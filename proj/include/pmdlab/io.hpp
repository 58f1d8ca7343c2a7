#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pmdlab/decomposition.hpp"
#include "pmdlab/hypothesis.hpp"
#include "pmdlab/learn.hpp"
#include "pmdlab/selection.hpp"

namespace pmdlab {

/// Every JSON document carries this value under "schema".
inline constexpr const char* kSchema = "pmdlab/1";

// JSON text for each artifact. Parsers throw InvalidArgument on malformed input.
std::string to_json(const ParamMatrix& pm);
std::string to_json(const SparsePmf& pmf);
std::string to_json(const StructuralDecomposition& sd);
std::string to_json(const Hypothesis& h);
std::string to_json(const TournamentLog& log);
/// Decomposition plus ledger; `measured_tv` is included when given.
std::string to_json(const DecompositionResult& r, std::optional<double> measured_tv = std::nullopt);
/// Learner report; `log_path` names the file holding the tournament log, if any.
std::string to_json(const LearnReport& r, const std::string& log_path = {});

ParamMatrix parse_param_matrix(const std::string& text);
SparsePmf parse_sparse_pmf(const std::string& text);
StructuralDecomposition parse_decomposition(const std::string& text);
Hypothesis parse_hypothesis(const std::string& text);

/// A matrix or pmf document; matrices are materialized with the exact DP.
SparsePmf parse_distribution(const std::string& text);

/// One lattice point per line, comma-separated integers. A non-numeric first line is a header.
std::vector<Point> read_samples_csv(std::istream& in);
void write_samples_csv(std::ostream& out, const std::vector<Point>& samples);

/// One JSON-lines manifest record.
std::string manifest_line(std::size_t index, const ParamMatrix& pm);
std::string manifest_line(std::size_t index, const BlockGaussian& bg);

std::string read_text_file(const std::string& path);

}  // namespace pmdlab
