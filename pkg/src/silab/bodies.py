"""Convex bodies through their gauge functions.

Two families are supported:

``ellipsoid``
    ``j(x) = sqrt(1/2 * sum_k (p_k^2 + q_k^2) / r_k^2)``.
``perturbed``
    ``j(x) = j_E(x) * (1 + eps * p(x / |x|))`` where ``p`` is a polynomial
    given by monomial terms.  With every term of even total degree the body is
    centrally symmetric, and with every exponent even each coordinate plane
    stays invariant under the characteristic flow.

Points are arrays whose last axis has length ``2n`` in the ordering
``(p_1, ..., p_n, q_1, ..., q_n)``.  All evaluators broadcast over leading
axes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import DEFAULT_ALPHA
from .errors import DimensionError, DomainError, SingularityError, UnsupportedInputError

_ZERO = 1e-300


@dataclass(frozen=True)
class Monomial:
    coeff: float
    powers: tuple[int, ...]

    @property
    def degree(self) -> int:
        return int(sum(self.powers))


@dataclass(frozen=True)
class Perturbation:
    epsilon: float
    terms: tuple[Monomial, ...] = ()

    @property
    def even(self) -> bool:
        return all(t.degree % 2 == 0 for t in self.terms)

    @property
    def plane_preserving(self) -> bool:
        return all(all(k % 2 == 0 for k in t.powers) for t in self.terms)


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A compact convex body containing the origin, described by its gauge.

    Parameters
    ----------
    n : int
        Half dimension.
    radii : tuple of float
        Ellipsoid radii ``r_1..r_n``; the base ellipsoid for perturbed bodies.
    kind : {"ellipsoid", "perturbed"}
    perturbation : Perturbation, optional
        Required when ``kind == "perturbed"``.
    alpha : float
        Default exponent of ``H = j^alpha`` carried with the body file.
    """

    n: int
    radii: tuple[float, ...]
    kind: str = "ellipsoid"
    perturbation: Perturbation | None = None
    alpha: float = DEFAULT_ALPHA
    _d: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or len(self.radii) != self.n:
            raise DimensionError(f"expected {self.n} radii, got {len(self.radii)}")
        if any(not (r > 0 and math.isfinite(r)) for r in self.radii):
            raise DomainError("radii must be positive and finite")
        if self.kind not in ("ellipsoid", "perturbed"):
            raise UnsupportedInputError(f"unknown body kind {self.kind!r}")
        if self.kind == "perturbed":
            if self.perturbation is None:
                raise DomainError("perturbed body needs a perturbation")
            for t in self.perturbation.terms:
                if len(t.powers) != 2 * self.n or any(k < 0 for k in t.powers):
                    raise DimensionError(f"monomial powers must be {2 * self.n} non-negative integers")
        if not 1.0 < self.alpha < 2.0:
            raise DomainError("alpha must lie in (1, 2)")
        r2 = np.asarray(self.radii, dtype=float) ** 2
        object.__setattr__(self, "_d", np.concatenate([1.0 / r2, 1.0 / r2]))

    # ------------------------------------------------------------------ basics
    @classmethod
    def ellipsoid(cls, radii, alpha: float = DEFAULT_ALPHA) -> "ConvexBody":
        radii = tuple(float(r) for r in radii)
        return cls(len(radii), radii, alpha=alpha)

    @classmethod
    def perturbed(cls, radii, epsilon: float, terms, alpha: float = DEFAULT_ALPHA,
                  check: bool = True) -> "ConvexBody":
        """Perturbed ellipsoid; ``terms`` is a list of ``(coeff, powers)`` pairs."""
        radii = tuple(float(r) for r in radii)
        mons = tuple(Monomial(float(c), tuple(int(k) for k in p)) for c, p in terms)
        body = cls(len(radii), radii, "perturbed", Perturbation(float(epsilon), mons), alpha)
        if check:
            body.check_convex()
        return body

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def symmetric(self) -> bool:
        return self.kind == "ellipsoid" or self.perturbation.even

    @property
    def plane_preserving(self) -> bool:
        return self.kind == "ellipsoid" or self.perturbation.plane_preserving

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionError(f"points must have last axis {self.dim}, got {x.shape[-1]}")
        return x

    # ------------------------------------------------------------- ellipsoid part
    def _ell(self, x):
        d = self._d
        dx = d * x
        j = np.sqrt(0.5 * np.sum(x * dx, axis=-1))
        return j, dx

    def _ell_all(self, x, order: int):
        j, dx = self._ell(x)
        js = np.maximum(j, _ZERO)[..., None]
        g = dx / (2.0 * js)
        if order < 2:
            return j, g, None
        h = np.diag(self._d) / (2.0 * js[..., None]) - dx[..., :, None] * dx[..., None, :] / (4.0 * js[..., None] ** 3)
        return j, g, h

    # ------------------------------------------------------------ perturbation
    def _pert_all(self, x, order: int):
        """``p(x/|x|)`` with gradient and Hessian in ``x``."""
        rho = np.sum(x * x, axis=-1)
        dim = self.dim
        val = np.zeros(x.shape[:-1])
        grad = np.zeros(x.shape)
        hess = np.zeros(x.shape + (dim,)) if order >= 2 else None
        eye = np.eye(dim)
        for t in self.perturbation.terms:
            k = np.asarray(t.powers)
            d = t.degree
            pw = x ** k
            m = t.coeff * np.prod(pw, axis=-1)
            # first derivatives of the monomial
            dm = np.empty(x.shape)
            for i in range(dim):
                if k[i] == 0:
                    dm[..., i] = 0.0
                    continue
                rest = np.prod(np.delete(pw, i, axis=-1), axis=-1)
                dm[..., i] = t.coeff * k[i] * x[..., i] ** (k[i] - 1) * rest
            s0 = rho ** (-d / 2.0)
            s1 = rho ** (-d / 2.0 - 1.0)
            val = val + m * s0
            grad = grad + dm * s0[..., None] - d * (m * s1)[..., None] * x
            if order >= 2:
                ddm = np.zeros(x.shape + (dim,))
                for i in range(dim):
                    for l in range(i, dim):
                        kk = k.copy()
                        c = t.coeff
                        c *= kk[i]
                        kk[i] -= 1
                        c *= kk[l]
                        kk[l] -= 1
                        if c == 0:
                            continue
                        ddm[..., i, l] = c * np.prod(x ** kk, axis=-1)
                        ddm[..., l, i] = ddm[..., i, l]
                s2 = rho ** (-d / 2.0 - 2.0)
                xo = x[..., :, None] * x[..., None, :]
                cross = dm[..., :, None] * x[..., None, :]
                hess = (hess + ddm * s0[..., None, None]
                        - d * s1[..., None, None] * (cross + np.swapaxes(cross, -1, -2))
                        - d * (m * s1)[..., None, None] * eye
                        + d * (d + 2) * (m * s2)[..., None, None] * xo)
        return val, grad, hess

    # ------------------------------------------------------------------ gauge
    def _all(self, x, order: int):
        j, g, h = self._ell_all(x, order)
        if self.kind == "ellipsoid":
            return j, g, h
        eps = self.perturbation.epsilon
        p, dp, ddp = self._pert_all(x, order)
        f = 1.0 + eps * p
        J = j * f
        G = g * f[..., None] + eps * j[..., None] * dp
        if order < 2:
            return J, G, None
        outer = g[..., :, None] * dp[..., None, :]
        H = (h * f[..., None, None] + eps * (outer + np.swapaxes(outer, -1, -2))
             + eps * j[..., None, None] * ddp)
        return J, G, H

    def gauge(self, x) -> np.ndarray:
        x = self._check(x)
        if self.kind == "ellipsoid":
            return self._ell(x)[0]
        return self._all(x, 0)[0]

    def _nonzero(self, x):
        x = self._check(x)
        if np.any(np.linalg.norm(x, axis=-1) < 1e-12):
            raise SingularityError("gauge derivatives are undefined at the origin")
        return x

    def gauge_grad(self, x) -> np.ndarray:
        return self._all(self._nonzero(x), 1)[1]

    def gauge_hess(self, x) -> np.ndarray:
        return self._all(self._nonzero(x), 2)[2]

    def gauge_all(self, x, order: int = 2):
        """``(j, grad j, hess j)`` in one pass (``hess`` is None when ``order < 2``)."""
        return self._all(self._nonzero(x), order)

    def check_convex(self, samples: int = 2000, seed: int = 0) -> float:
        """Smallest eigenvalue of the Hessian of ``j^2/2`` over random unit directions.

        Raises
        ------
        DomainError
            If the sampled minimum is not positive (the body is not strongly
            convex).
        """
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((samples, self.dim))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        j, g, h = self._all(x, 2)
        q = j[:, None, None] * h + g[:, :, None] * g[:, None, :]
        lo = float(np.linalg.eigvalsh(q).min())
        if not lo > 0:
            raise DomainError(f"perturbation destroys convexity (min curvature {lo:.3e})")
        return lo

    # ---------------------------------------------------------------- polar
    def _polar_point(self, y, iters: int = 50):
        """Solve ``grad(j^2/2)(x) = y``; then ``j_polar(y) = j(x)``, grad = ``x/j(x)``."""
        y = np.asarray(y, dtype=float)
        x = 2.0 * y / self._d
        if self.kind == "ellipsoid":
            return x
        for _ in range(iters):
            j, g, h = self._all(x, 2)
            F = j[..., None] * g - y
            Q = j[..., None, None] * h + g[..., :, None] * g[..., None, :]
            step = np.linalg.solve(Q, F[..., None])[..., 0]
            x = x - step
            scale = np.maximum(np.linalg.norm(x, axis=-1), 1e-30)
            if np.all(np.linalg.norm(step, axis=-1) <= 1e-15 * scale):
                break
        return x

    def polar_gauge(self, y) -> np.ndarray:
        """Support-type gauge ``sup {<x, y> : j(x) <= 1}``."""
        y = self._check(y)
        if self.kind == "ellipsoid":
            return np.sqrt(2.0 * np.sum(y * y / self._d, axis=-1))
        small = np.linalg.norm(y, axis=-1) < 1e-300
        ys = np.where(small[..., None], 1.0, y)
        x = self._polar_point(ys)
        out = self.gauge(x)
        return np.where(small, 0.0, out)

    def polar_point(self, y) -> np.ndarray:
        """The boundary point ``x/j(x)`` at which ``y`` is an outer normal."""
        y = self._check(y)
        x = self._polar_point(y)
        return x / self.gauge(x)[..., None]

    # ----------------------------------------------------------------- IO
    def to_dict(self) -> dict:
        d = {"n": self.n, "kind": self.kind, "radii": list(self.radii), "alpha": self.alpha}
        if self.perturbation is not None:
            d["perturbation"] = {
                "epsilon": self.perturbation.epsilon,
                "terms": [{"coeff": t.coeff, "powers": list(t.powers)} for t in self.perturbation.terms],
            }
        return d

    @classmethod
    def from_dict(cls, d: dict, check: bool = True) -> "ConvexBody":
        if not isinstance(d, dict):
            raise DomainError("body specification must be a JSON object")
        for key in ("n", "kind", "radii"):
            if key not in d:
                raise DomainError(f"body specification is missing field '{key}'")
        try:
            n = int(d["n"])
            radii = tuple(float(r) for r in d["radii"])
            alpha = float(d.get("alpha", DEFAULT_ALPHA))
        except (TypeError, ValueError) as exc:
            raise DomainError(f"malformed body field: {exc}") from exc
        if len(radii) != n:
            raise DimensionError(f"field 'radii' has {len(radii)} entries, expected n={n}")
        kind = d["kind"]
        if kind == "ellipsoid":
            return cls(n, radii, alpha=alpha)
        if kind == "perturbed":
            p = d.get("perturbation")
            if not isinstance(p, dict) or "epsilon" not in p or "terms" not in p:
                raise DomainError("field 'perturbation' needs 'epsilon' and 'terms'")
            try:
                terms = [(float(t["coeff"]), [int(k) for k in t["powers"]]) for t in p["terms"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise DomainError(f"malformed field 'perturbation.terms': {exc}") from exc
            body = cls(n, radii, "perturbed",
                       Perturbation(float(p["epsilon"]),
                                    tuple(Monomial(c, tuple(k)) for c, k in terms)), alpha)
            if check:
                body.check_convex()
            return body
        raise UnsupportedInputError(f"field 'kind' must be 'ellipsoid' or 'perturbed', got {kind!r}")

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "ConvexBody":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)


def standard_perturbation(n: int, epsilon: float) -> list[tuple[float, list[int]]]:
    """Default even, plane-preserving quartic perturbation ``sum_k p_k^2 q_k^2 + p_1^4``."""
    terms = []
    for k in range(n):
        pw = [0] * (2 * n)
        pw[k] = 2
        pw[n + k] = 2
        terms.append((1.0, pw))
    pw = [0] * (2 * n)
    pw[0] = 4
    terms.append((0.5, pw))
    return terms


# ------------------------------------------------------------------ Hamiltonian
def _alpha_ok(alpha):
    if not 1.0 < alpha < 2.0:
        raise DomainError("alpha must lie in (1, 2)")


def hamiltonian(body: ConvexBody, alpha: float, x) -> np.ndarray:
    """``H(x) = j(x)^alpha``."""
    _alpha_ok(alpha)
    return body.gauge(x) ** alpha


def hamiltonian_grad(body: ConvexBody, alpha: float, x) -> np.ndarray:
    _alpha_ok(alpha)
    j, g, _ = body.gauge_all(x, 1)
    return alpha * (j ** (alpha - 1.0))[..., None] * g


def hamiltonian_hessian(body: ConvexBody, alpha: float, x) -> np.ndarray:
    """``alpha j^{alpha-1} hess j + alpha (alpha-1) j^{alpha-2} grad j grad j^T``."""
    _alpha_ok(alpha)
    j, g, h = body.gauge_all(x, 2)
    a = (alpha * j ** (alpha - 1.0))[..., None, None]
    b = (alpha * (alpha - 1.0) * j ** (alpha - 2.0))[..., None, None]
    return a * h + b * (g[..., :, None] * g[..., None, :])


def fenchel_conjugate(body: ConvexBody, alpha: float, y) -> np.ndarray:
    """Legendre transform of ``j^alpha``.

    Along the ray through the maximizer the supremum is
    ``max_s (s j°(y) - s^alpha)``, which gives
    ``H*(y) = (alpha - 1) alpha^{-beta} j°(y)^beta`` with ``beta = alpha/(alpha-1)``.
    """
    _alpha_ok(alpha)
    beta = alpha / (alpha - 1.0)
    return (alpha - 1.0) * alpha ** (-beta) * body.polar_gauge(y) ** beta


def conjugate_grad(body: ConvexBody, alpha: float, y) -> np.ndarray:
    """``grad H*(y)``, the maximizer ``x`` of ``<x, y> - H(x)``."""
    _alpha_ok(alpha)
    y = body._check(y)
    nrm = np.linalg.norm(y, axis=-1)
    small = nrm < 1e-300
    ys = np.where(small[..., None], 1.0, y)
    x = body._polar_point(ys)
    jx = body.gauge(x)
    jp = jx  # polar gauge value equals j at the solution of grad(j^2/2) = y
    s = (jp / alpha) ** (1.0 / (alpha - 1.0))
    out = s[..., None] * x / jx[..., None]
    return np.where(small[..., None], 0.0, out)
