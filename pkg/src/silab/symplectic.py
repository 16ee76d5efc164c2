"""Symplectic matrices, linear Hamiltonian systems and sampled symplectic paths.

Coordinates are ordered ``(p_1, ..., p_n, q_1, ..., q_n)`` and the standard
structure is ``J = [[0, -I], [I, 0]]``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .config import DEFAULT_TOLERANCES
from .errors import DimensionError, DomainError, IntegrationAccuracyError, UnsupportedInputError

__all__ = [
    "standard_J",
    "validate_symplectic",
    "symplectic_defect",
    "LinearSystem",
    "SymplecticPath",
    "integrate_fundamental",
    "iterate_path",
    "linearize_orbit",
    "rotation_path",
]


def standard_J(n: int) -> np.ndarray:
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def _half_dim(M: np.ndarray) -> int:
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {M.shape}")
    d = M.shape[-1]
    if d % 2:
        raise DimensionError(f"symplectic matrices need even dimension, got {d}")
    return d // 2


def symplectic_defect(M) -> np.ndarray:
    """Elementwise max of ``|M^T J M - J|`` (broadcast over leading axes)."""
    M = np.asarray(M, dtype=float)
    J = standard_J(_half_dim(M))
    D = np.swapaxes(M, -1, -2) @ J @ M - J
    return np.abs(D).max(axis=(-2, -1))


def validate_symplectic(M, tol: float = DEFAULT_TOLERANCES.sym_tol) -> bool:
    """True iff ``M^T J M = J`` holds to ``tol`` in the max-entry norm."""
    M = np.asarray(M, dtype=float)
    _half_dim(M)
    return bool(symplectic_defect(M) <= tol)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """``x' = J B(t) x`` with ``B`` symmetric and ``tau``-periodic.

    ``B`` must be vectorized: it maps a 1-D array of times to an array of
    shape ``(len(t), 2n, 2n)``.  ``delta`` is a certified lower bound
    ``B(t) >= delta I`` when ``positive_definite`` is set (0 means unknown,
    measured on samples at integration time).
    """

    n: int
    tau: float
    B: Callable[[np.ndarray], np.ndarray]
    positive_definite: bool = False
    delta: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if not self.tau > 0:
            raise DomainError("period tau must be positive")

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.asarray(self.B(t), dtype=float)
        if out.shape != (t.size, 2 * self.n, 2 * self.n):
            raise DimensionError(
                f"generator returned shape {out.shape}, expected {(t.size, 2 * self.n, 2 * self.n)}"
            )
        return out

    def restricted(self, tau: float) -> "LinearSystem":
        """Same generator on a different period (e.g. half a symmetric period)."""
        return LinearSystem(self.n, tau, self.B, self.positive_definite, self.delta, self.label)

    @classmethod
    def constant(cls, B, tau: float, label: str = "") -> "LinearSystem":
        B = np.array(B, dtype=float)
        n = _half_dim(B)
        if np.abs(B - B.T).max() > DEFAULT_TOLERANCES.sym_tol:
            raise UnsupportedInputError("generator must be symmetric")
        lam = float(np.linalg.eigvalsh(B).min())
        B.setflags(write=False)

        def gen(t):
            return np.broadcast_to(B, (np.size(t),) + B.shape)

        return cls(n, float(tau), gen, positive_definite=lam > 0, delta=max(lam, 0.0), label=label)

    @classmethod
    def trigonometric(cls, B0, cos_terms, sin_terms, tau: float, label: str = "") -> "LinearSystem":
        """``B(t) = B0 + sum_k C_k cos(2 pi k t/tau) + S_k sin(2 pi k t/tau)``.

        The positivity margin is certified as
        ``lambda_min(B0) - sum_k (|C_k|_2 + |S_k|_2)``.
        """
        B0 = np.array(B0, dtype=float)
        n = _half_dim(B0)
        C = np.array(cos_terms, dtype=float).reshape(-1, 2 * n, 2 * n)
        S = np.array(sin_terms, dtype=float).reshape(-1, 2 * n, 2 * n)
        if C.shape[0] != S.shape[0]:
            raise DimensionError("cos_terms and sin_terms must have the same length")
        for mat in (B0, *C, *S):
            if np.abs(mat - mat.T).max() > DEFAULT_TOLERANCES.sym_tol:
                raise UnsupportedInputError("generator terms must be symmetric")
        margin = float(np.linalg.eigvalsh(B0).min())
        margin -= sum(np.linalg.norm(m, 2) for m in (*C, *S))
        k = np.arange(1, C.shape[0] + 1)
        w = 2.0 * math.pi / tau

        def gen(t):
            t = np.asarray(t, dtype=float)
            phase = np.outer(t, k) * w
            return (
                B0
                + np.einsum("tk,kij->tij", np.cos(phase), C)
                + np.einsum("tk,kij->tij", np.sin(phase), S)
            )

        return cls(n, float(tau), gen, positive_definite=margin > 0, delta=max(margin, 0.0), label=label)

    @classmethod
    def from_function(cls, f, n: int, tau: float, positive_definite=False, delta=0.0, label="") -> "LinearSystem":
        """Wrap a scalar callable ``t -> (2n, 2n) array``."""

        def gen(t):
            return np.stack([np.asarray(f(float(s)), dtype=float) for s in np.atleast_1d(t)])

        return cls(n, float(tau), gen, positive_definite, delta, label)

    @classmethod
    def random_positive(cls, rng: np.random.Generator, n: int, tau: float = 1.0, modes: int = 2,
                        scale: float = 3.0, margin: float = 0.1) -> "LinearSystem":
        """Random trigonometric generator with certified ``B(t) >= margin I``."""
        d = 2 * n

        def sym(a):
            return 0.5 * (a + a.T)

        C = np.array([sym(rng.normal(size=(d, d))) for _ in range(modes)])
        S = np.array([sym(rng.normal(size=(d, d))) for _ in range(modes)])
        amp = rng.uniform(0.2, 1.0)
        C *= amp / (1.0 + np.arange(modes))[:, None, None]
        S *= amp / (1.0 + np.arange(modes))[:, None, None]
        G = rng.normal(size=(d, d))
        B0 = G @ G.T * (scale / d)
        osc = sum(np.linalg.norm(m, 2) for m in (*C, *S))
        shift = max(0.0, margin + osc - np.linalg.eigvalsh(B0).min())
        B0 = B0 + shift * np.eye(d)
        return cls.trigonometric(B0, C, S, tau, label=f"random-n{n}")


@dataclass(frozen=True, eq=False)
class SymplecticPath:
    """A sampled path ``gamma: [0, tau] -> Sp(2n)`` on a uniform grid.

    Paths produced by :func:`integrate_fundamental` carry their generator and
    can be evaluated between grid points by one partial RK4 step.  Iterated
    paths carry their base path and evaluate through
    ``gamma(t - j tau) gamma(tau)^j``.
    """

    n: int
    tau: float
    times: np.ndarray
    mats: np.ndarray
    system: LinearSystem | None = None
    base: "SymplecticPath | None" = None
    reps: int = 1
    interpolation: str = "rk4"
    _powers: tuple = field(default=(), repr=False)

    @property
    def end(self) -> np.ndarray:
        return self.mats[-1]

    @property
    def steps(self) -> int:
        return self.mats.shape[0] - 1

    @property
    def dim(self) -> int:
        return 2 * self.n

    def drift(self) -> float:
        scale = np.maximum(1.0, np.einsum("kij,kij->k", self.mats, self.mats) / self.dim)
        return float((symplectic_defect(self.mats) / scale).max())

    def at(self, t) -> np.ndarray:
        """Evaluate the path at arbitrary times in ``[0, tau]`` (vectorized)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.interpolation == "iterate":
            base = self.base
            j = np.clip(np.floor(t / base.tau + 1e-15).astype(int), 0, self.reps - 1)
            s = np.clip(t - j * base.tau, 0.0, base.tau)
            G = base.at(s)
            P = np.stack(self._powers)[j]
            return G @ P
        if self.interpolation != "rk4" or self.system is None:
            raise UnsupportedInputError("path has no generator; cannot evaluate off the grid")
        h = self.tau / self.steps
        i = np.clip(np.floor(t / h).astype(int), 0, self.steps - 1)
        s = np.clip(t - self.times[i], 0.0, None)
        t0 = self.times[i]
        A = self.generator_at(np.concatenate([t0, t0 + 0.5 * s, t0 + s]))
        k = t.size
        P = kernels.step_propagators(A[:k], A[k:2 * k], A[2 * k:], s)
        return P @ self.mats[i]

    def generator_at(self, t) -> np.ndarray:
        """``J B(t)`` for the underlying (periodically extended) system."""
        if self.interpolation == "iterate":
            return self.base.generator_at(np.mod(t, self.base.tau))
        if self.system is None:
            raise UnsupportedInputError("path has no generator")
        return standard_J(self.n) @ self.system(t)

    @property
    def root(self) -> "SymplecticPath":
        """The non-iterated path this one is built from."""
        return self if self.base is None else self.base.root

    @property
    def positive_definite(self) -> bool:
        root = self.root
        return root.system is not None and root.system.positive_definite


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def integrate_fundamental(sys: LinearSystem, steps: int = 4096, tol=DEFAULT_TOLERANCES) -> SymplecticPath:
    """Fundamental solution ``gamma_B`` of ``x' = J B(t) x`` by classical RK4.

    No symplectic projection is applied; the drift of ``M^T J M`` from ``J``
    is measured and an :class:`IntegrationAccuracyError` is raised when it
    exceeds ``tol.path_tol``.
    """
    steps = int(steps)
    if steps < 16:
        raise DomainError("steps must be at least 16")
    n, tau = sys.n, sys.tau
    h = tau / steps
    stage_t = np.linspace(0.0, tau, 2 * steps + 1)
    Bs = sys(stage_t)
    asym = np.abs(Bs - np.swapaxes(Bs, 1, 2)).max()
    if asym > tol.sym_tol:
        raise UnsupportedInputError(f"generator not symmetric (defect {asym:.2e})")
    if sys.positive_definite:
        lam = np.linalg.eigvalsh(Bs).min()
        if lam <= 0 or lam < sys.delta - tol.sym_tol:
            raise UnsupportedInputError(
                f"generator flagged positive definite but min eigenvalue {lam:.3e} < delta {sys.delta:.3e}"
            )
    speed = np.linalg.norm(Bs, ord=2, axis=(1, 2)).max() if n <= 4 else np.abs(Bs).sum(axis=2).max()
    if speed * h > math.pi / 8:
        warnings.warn(
            f"step {h:.3g} lets eigen-angles move up to {speed * h:.3g} rad per step (> pi/8); "
            "increase steps", RuntimeWarning, stacklevel=2)
    JB = standard_J(n) @ Bs
    mats = kernels.rk4_fundamental(JB, h, np.eye(2 * n))
    times = np.linspace(0.0, tau, steps + 1)
    path = SymplecticPath(n, tau, _freeze(times), _freeze(mats), system=sys)
    drift = path.drift()
    if drift > tol.path_tol:
        raise IntegrationAccuracyError(
            f"symplecticity drift {drift:.2e} exceeds {tol.path_tol:.1e}; use more steps than {steps}"
        )
    return path


def iterate_path(gamma: SymplecticPath, m: int) -> SymplecticPath:
    """The iteration path on ``[0, m tau]``: ``gamma(t - j tau) gamma(tau)^j``."""
    m = int(m)
    if m < 1:
        raise DomainError("iteration count must be positive")
    if m == 1:
        return gamma
    M = gamma.end
    powers = [np.eye(gamma.dim)]
    for _ in range(m):
        powers.append(powers[-1] @ M)
    body = gamma.mats[:-1]
    mats = np.concatenate([body @ powers[j] for j in range(m)] + [powers[m][None]], axis=0)
    times = np.concatenate(
        [gamma.times[:-1] + j * gamma.tau for j in range(m)] + [np.array([m * gamma.tau])]
    )
    return SymplecticPath(
        gamma.n, m * gamma.tau, _freeze(times), _freeze(mats), system=None, base=gamma,
        reps=m, interpolation="iterate", _powers=tuple(_freeze(p) for p in powers),
    )


def rotation_path(n: int, tau: float, frequencies=None, steps: int = 4096) -> SymplecticPath:
    """Fundamental solution of ``B = diag(w_1..w_n, w_1..w_n)``; ``e^{tJ}`` by default."""
    w = np.ones(n) if frequencies is None else np.asarray(frequencies, dtype=float)
    B = np.diag(np.concatenate([w, w]))
    return integrate_fundamental(LinearSystem.constant(B, tau, label="rotation"), steps)


def linearize_orbit(body, orbit, alpha: float, samples: int | None = None) -> LinearSystem:
    """Linearized system ``y' = J H''(x(t)) y`` along a closed characteristic.

    The orbit is taken in its ``H = j^alpha`` parametrization (period
    ``tau_alpha``), evaluated by trigonometric interpolation.
    """
    from .orbits import alpha_parametrization

    if not 1.0 < alpha < 2.0:
        raise DomainError("alpha must lie in (1, 2)")
    curve = alpha_parametrization(body, orbit, alpha, samples=samples)
    pts = curve(np.linspace(0.0, curve.period, 64, endpoint=False))
    if np.linalg.norm(pts, axis=1).min() < 1e-12:
        raise DomainError("orbit passes through the origin")
    from .bodies import hamiltonian_hessian

    def gen(t):
        x = curve(np.mod(t, curve.period))
        return hamiltonian_hessian(body, alpha, x)

    Hs = gen(np.linspace(0.0, curve.period, 257))
    lam = float(np.linalg.eigvalsh(Hs).min())
    return LinearSystem(body.n, curve.period, gen, positive_definite=lam > 0,
                        delta=0.5 * lam if lam > 0 else 0.0, label="orbit-linearization")
