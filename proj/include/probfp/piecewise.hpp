#pragma once

#include <functional>
#include <span>
#include <vector>

#include "probfp/density.hpp"

namespace probfp {

struct RefineOptions {
  double rel_tol = 1e-10;
  // Absolute floor for the tolerance scale.
  double abs_floor = 0.0;
  // Pieces whose estimated mass error is below this are accepted.
  double mass_tol = 1e-15;
  // Pieces narrower than this are never split (0: derived from the span).
  double min_width = 0.0;
  std::size_t max_pieces = 4096;
  bool adaptive = true;
};

// Fills out[j] with the function at nodes[j]; nodes lie in [a, b] and the
// evaluator may assume the function is smooth on the open piece.
using PieceEvaluator =
    std::function<void(double a, double b, std::span<const double> nodes, std::span<double> out)>;

// Builds pieces between consecutive sorted breakpoints, splitting adaptively.
// When the breakpoints alone exceed max_pieces, neighbouring intervals are
// merged into mass-preserving constant pieces.
std::vector<Density::Piece> build_pieces(std::vector<double> breakpoints, const PieceEvaluator& eval,
                                         const RefineOptions& opts, bool* cap_hit);

// Sorts, removes duplicates and points closer than `eps` to their predecessor.
void sort_unique(std::vector<double>& v, double eps = 0.0);

}  // namespace probfp
