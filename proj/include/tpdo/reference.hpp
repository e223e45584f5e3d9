#pragma once

// Serial, deliberately naive implementations kept as oracles for the optimized paths.

#include "tpdo/symbol_dsl.hpp"
#include "tpdo/torus.hpp"

namespace tpdo::reference {

/// Op(p) f by the defining double sum, with e^{2 pi i x.xi} evaluated directly.
GridFunction apply_pdo(const dsl::Symbol& p, const GridFunction& f);

/// Maximal function over the same ball family as tpdo::maximal_function, testing every
/// (centre, point) pair by its geodesic distance.
GridFunction maximal_function(const GridFunction& f);

}  // namespace tpdo::reference
