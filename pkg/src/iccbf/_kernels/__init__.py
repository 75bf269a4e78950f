"""Simulation-kernel backends.

Two interchangeable implementations of the hot closed-loop kernels live here:
`pure` (always available, plain Python + numpy) and `_fast` (Cython, built by
setup.py when a compiler is present).  `get_backend` picks one:

    ICCBF_BACKEND=auto      compiled when importable, else pure (default)
    ICCBF_BACKEND=pure      force the pure kernels
    ICCBF_BACKEND=compiled  force the compiled kernels; ImportError if missing

The selected backend is wrapped so calls outside the compiled kernels' limits
(chain order above `_fast.MAXN`, halfspace input dimension other than 2, more
than `_fast.MAXP` hyperplanes) silently fall back to the pure implementation;
the two agree bit-for-bit on the floor and box problems and to solver
tolerance on halfspaces.
"""

from __future__ import annotations

import logging
import os
from types import SimpleNamespace

from . import pure

log = logging.getLogger("iccbf.kernels")

try:
    from . import _fast
except ImportError:  # pragma: no cover - depends on the build environment
    _fast = None

__all__ = ["pure", "compiled_available", "get_backend", "backend_name"]


def compiled_available() -> bool:
    return _fast is not None


def _compiled_namespace():
    """Compiled kernels with automatic per-call fallback outside their limits."""

    def simulate_floor(x0, x1_lower, gamma, eps, u_lo, u_hi, nom, dt, nsteps, integrator):
        if x0.shape[0] > _fast.MAXN:
            return pure.simulate_floor(x0, x1_lower, gamma, eps, u_lo, u_hi,
                                       nom, dt, nsteps, integrator)
        return _fast.simulate_floor(x0, x1_lower, gamma, eps, u_lo, u_hi,
                                    nom, dt, nsteps, integrator)

    def simulate_box(x0, bounds_lo, bounds_hi, lower_gamma, lower_eps,
                     upper_gamma, upper_eps, u_lo, u_hi, nom, dt, nsteps, integrator):
        if x0.shape[0] > _fast.MAXN:
            return pure.simulate_box(x0, bounds_lo, bounds_hi, lower_gamma, lower_eps,
                                     upper_gamma, upper_eps, u_lo, u_hi,
                                     nom, dt, nsteps, integrator)
        return _fast.simulate_box(x0, bounds_lo, bounds_hi, lower_gamma, lower_eps,
                                  upper_gamma, upper_eps, u_lo, u_hi,
                                  nom, dt, nsteps, integrator)

    def simulate_halfspaces(x0, directions, offsets, gamma, eps, u_ball,
                            include_top_margin, nom, dt, nsteps, integrator):
        if (directions.shape[1] != _fast.HALFSPACE_INPUT_DIM
                or directions.shape[0] > _fast.MAXP
                or gamma.shape[1] > _fast.MAXN):
            return pure.simulate_halfspaces(x0, directions, offsets, gamma, eps, u_ball,
                                            include_top_margin, nom, dt, nsteps, integrator)
        return _fast.simulate_halfspaces(x0, directions, offsets, gamma, eps, u_ball,
                                         include_top_margin, nom, dt, nsteps, integrator)

    return SimpleNamespace(
        name="compiled",
        simulate_floor=simulate_floor,
        simulate_box=simulate_box,
        simulate_halfspaces=simulate_halfspaces,
    )


_PURE = SimpleNamespace(
    name="pure",
    simulate_floor=pure.simulate_floor,
    simulate_box=pure.simulate_box,
    simulate_halfspaces=pure.simulate_halfspaces,
)


def get_backend(name: str | None = None):
    """Resolve a backend by name; None reads ICCBF_BACKEND (default auto)."""
    if name is None:
        name = os.environ.get("ICCBF_BACKEND", "auto")
    name = name.strip().lower()
    if name == "pure":
        return _PURE
    if name == "compiled":
        if _fast is None:
            raise ImportError(
                "ICCBF_BACKEND=compiled but the compiled kernels are not built; "
                "reinstall with a C compiler or use ICCBF_BACKEND=pure")
        return _compiled_namespace()
    if name == "auto":
        if _fast is None:
            log.debug("compiled kernels unavailable, using pure backend")
            return _PURE
        return _compiled_namespace()
    raise ValueError(f"unknown backend {name!r}: expected auto, pure, or compiled")


def backend_name(name: str | None = None) -> str:
    """Name of the backend `get_backend(name)` resolves to."""
    return get_backend(name).name
