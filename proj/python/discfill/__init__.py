"""Pseudoholomorphic disc filling and symplectic non-squeezing experiments.

The heavy lifting lives in the _discfill extension; this package re-exports
its public surface.
"""

from _discfill import (  # noqa: F401
    PolarGrid,
    annulus_grid,
    attach_disc,
    cauchy_green,
    clipped_area,
    d_z,
    d_zbar,
    disc_grid,
    integrate,
    is_tamed,
    lelong_check,
    rh_upper_estimate,
    run_continuation,
    run_squeeze,
    solve_beltrami,
    winding_number,
    __version__,
)

__all__ = [
    "PolarGrid",
    "annulus_grid",
    "attach_disc",
    "cauchy_green",
    "clipped_area",
    "d_z",
    "d_zbar",
    "disc_grid",
    "integrate",
    "is_tamed",
    "lelong_check",
    "rh_upper_estimate",
    "run_continuation",
    "run_squeeze",
    "solve_beltrami",
    "winding_number",
    "__version__",
]
