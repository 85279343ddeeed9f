#pragma once

#include "discfill/structures.hpp"

namespace discfill::presets {

/// The standard structure: a = b = 0, graphs are holomorphic.
TriangularStructure flat();

/// Bump perturbation with operator norm exactly `amplitude` (< 1) supported
/// in {|z| < 1/2, 1/4 < |w| < 3/4}. Mildly asymmetric in z.
TriangularStructure bump(double amplitude = 0.3);

/// Rotation-symmetric bump: the structure is invariant under w ↦ e^{iσ}w,
/// so disc families satisfy w^{t,τ+σ} = e^{iσ} w^{t,τ}.
TriangularStructure bump_rotation_symmetric(double amplitude = 0.3);

/// Bump with independently chosen |a| and |b| peaks (operator norm
/// √(a² + b²) must stay below 1); used for taming-margin stress runs.
TriangularStructure bump_weighted(double a_amplitude, double b_amplitude);

/// Support box of the bump presets in ℝ⁴ (for taming scans).
Box4 bump_support_box();

/// Product Hartogs model with radius profile dipping by `dip` near |z| = 1.
HartogsModel hartogs(double dip = 0.25, double delta = 0.3);

}  // namespace discfill::presets
