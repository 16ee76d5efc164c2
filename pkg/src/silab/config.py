"""Default tolerances and run parameters.

All defaults live here; CLI flags and config files override them through
:func:`Tolerances.replace`.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    sym_tol: float = 1e-9          # symplecticity of a single matrix / symmetry of B
    path_tol: float = 1e-7         # symplecticity drift along a path (relative)
    rank_tol: float = 1e-7         # singular values below rank_tol*|M| count as kernel
    refine_window: float = 1e-10   # crossing time window, relative to the period
    unit_circle_tol: float = 1e-7  # |lambda| within this of 1 counts as unit-circle spectrum
    breakpoint_tol: float = 1e-4   # looser modulus window for index-profile breakpoints
    angle_tol: float = 1e-5        # eigen-angles closer than this are one angle
    mean_tol: float = 1e-2
    surface_tol: float = 1e-8
    orbit_tol: float = 1e-6
    grad_tol: float = 1e-9
    sym_orbit_tol: float = 1e-6
    elliptic_tol: float = 1e-6

    def replace(self, **changes) -> "Tolerances":
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        new = dataclasses.replace(self, **changes)
        for f in dataclasses.fields(new):
            if getattr(new, f.name) <= 0:
                raise ValueError(f"tolerance {f.name} must be positive")
        return new


DEFAULT_TOLERANCES = Tolerances()

DEFAULT_ALPHA = 1.5
DEFAULT_STEPS = 4096
DEFAULT_MODES = 64
DEFAULT_SEED_COUNT = 200


def worker_count(requested: int | None = None) -> int:
    """Worker threads for parallel loops, capped by the SIL_THREADS variable."""
    import os

    cap = os.environ.get("SIL_THREADS")
    n = requested or os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, int(n))
