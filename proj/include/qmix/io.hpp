#pragma once

#include <string>
#include <vector>

#include "qmix/bayes.hpp"
#include "qmix/hermitian.hpp"

namespace qmix {

/// Operators read from a mixture or POVM document.
///
/// Grammar (JSON):
///   { "dim": d,
///     "components" | "elements": [ op, ... ],
///     "labels": [ "name", ... ]            (optional) }
///   op := { "re": [[...], ...], "im": [[...], ...] }   (im optional)
///       | { "bloch": [x, y, z], "weight": w }         (qubits; w optional, default 1)
/// A Bloch entry stands for w (I + x sx + y sy + z sz) / 2.
struct OperatorDocument {
  Index dim = 0;
  std::vector<HermitianMatrix> operators;
  std::vector<std::string> labels;
};

/// Throws ParseError naming the source, the line/column for syntax errors
/// and the field path (e.g. components[1].re[0][2]) for content errors.
OperatorDocument parse_operator_document(const std::string& text, const std::string& list_key,
                                         const std::string& source = "<input>");

std::vector<DensityMatrix> read_mixture_file(const std::string& path);
Povm read_povm_file(const std::string& path);
std::string read_text_file(const std::string& path);

}  // namespace qmix
