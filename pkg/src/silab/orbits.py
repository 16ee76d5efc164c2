"""Closed characteristics and the dual action functional.

Two time parametrizations of the same orbit appear throughout:

* the *surface* parametrization solves ``x' = J N(x)`` with ``N`` the outward
  unit normal, so ``x`` moves at unit speed and the period is the length;
* the *alpha* parametrization solves ``x' = J grad H(x)`` with
  ``H = j^alpha``; on the surface ``|x'| = alpha |grad j(x)|``.

Loops of the dual problem live on ``[0, 1]`` and are stored by their
positive Fourier modes ``c_j`` (``j = 1..K``) with
``u(t) = 2 Re sum_j c_j exp(2 pi i j t)``.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.sparse.linalg import LinearOperator, minres

from .bodies import (ConvexBody, conjugate_grad, fenchel_conjugate, hamiltonian,
                     hamiltonian_grad, hamiltonian_hessian)
from .config import DEFAULT_ALPHA, DEFAULT_MODES, DEFAULT_TOLERANCES, Tolerances, worker_count
from .curves import PeriodicCurve, reparametrize
from .errors import (ClassificationError, DomainError, NotASolutionError, ResolutionError,
                     UnsupportedInputError)
from .symplectic import standard_J

TWO_PI = 2.0 * math.pi


class ResonanceWarning(UserWarning):
    """The ellipsoid has rationally dependent frequencies."""


# --------------------------------------------------------------------- orbits
@dataclass(frozen=True, eq=False)
class ClosedCharacteristic:
    """A closed characteristic in the surface parametrization.

    Attributes
    ----------
    body : ConvexBody
    curve : PeriodicCurve
        Samples of ``x`` over one period ``tau``.
    minimal_period : bool
        Whether ``tau`` is known to be the minimal period.
    period_evidence : str
        How the minimal period was established.
    symmetry_class : str or None
        ``"symmetric"``, ``"asymmetric"`` or None when not classified.
    """

    body: ConvexBody
    curve: PeriodicCurve
    minimal_period: bool = True
    period_evidence: str = ""
    symmetry_class: str | None = None
    label: str = ""

    @property
    def tau(self) -> float:
        return self.curve.period

    @property
    def x(self) -> np.ndarray:
        return self.curve.samples

    @property
    def n(self) -> int:
        return self.body.n

    @property
    def action(self) -> float:
        return action(self)

    def __call__(self, t) -> np.ndarray:
        return self.curve(t)

    def velocity(self) -> np.ndarray:
        return self.curve.derivative_samples(1)

    def residual(self) -> float:
        """Sup norm of ``x' - J N(x)`` at the samples."""
        g = self.body.gauge_grad(self.x)
        nrm = g / np.linalg.norm(g, axis=1, keepdims=True)
        J = standard_J(self.n)
        return float(np.max(np.linalg.norm(self.velocity() - nrm @ J.T, axis=1)))

    def surface_error(self) -> float:
        return float(np.max(np.abs(self.body.gauge(self.x) - 1.0)))

    def negated(self) -> "ClosedCharacteristic":
        return ClosedCharacteristic(self.body, PeriodicCurve(self.tau, -self.x), self.minimal_period,
                                    self.period_evidence, self.symmetry_class, self.label + "(-)")

    def shifted(self, s: float) -> "ClosedCharacteristic":
        return ClosedCharacteristic(self.body, self.curve.resample(self.curve.n_samples, s),
                                    self.minimal_period, self.period_evidence, self.symmetry_class,
                                    self.label)

    def with_class(self, cls: str) -> "ClosedCharacteristic":
        return ClosedCharacteristic(self.body, self.curve, self.minimal_period,
                                    self.period_evidence, cls, self.label)

    def iterate_curve(self, m: int) -> PeriodicCurve:
        reps = np.concatenate([self.x] * m)
        return PeriodicCurve(m * self.tau, reps)


def action(x: ClosedCharacteristic) -> float:
    """``A = 1/2 int_0^tau (-J x') . x dt`` by the periodic trapezoid rule."""
    J = standard_J(x.n)
    v = x.velocity()
    integrand = -np.sum((v @ J.T) * x.x, axis=1)
    return float(0.5 * x.tau * integrand.mean())


def resonant_pairs(radii, max_den: int = 50, tol: float = 1e-9) -> list[tuple[int, int, Fraction]]:
    """Pairs whose squared radius ratio is rational with denominator <= max_den.

    Planar orbit ``k`` turns the transverse plane ``j`` by ``r_k^2/r_j^2``
    revolutions per period, so resonance is decided on squared ratios.
    """
    out = []
    r = [float(v) for v in radii]
    for a in range(len(r)):
        for b in range(a + 1, len(r)):
            q = (r[a] / r[b]) ** 2
            f = Fraction(q).limit_denominator(max_den)
            if abs(q - float(f)) <= tol * max(1.0, q):
                out.append((a, b, f))
    return out


def ellipsoid_characteristics(body_or_radii, samples: int = 256, warn: bool = True) -> list[ClosedCharacteristic]:
    """The ``n`` planar circles of an ellipsoid, sorted by period.

    In plane ``k`` the surface is the circle of radius ``R = sqrt(2) r_k``
    and ``x(t) = R (cos(t/R), sin(t/R))`` solves ``x' = J N(x)`` with period
    ``2 pi R``.
    """
    body = body_or_radii if isinstance(body_or_radii, ConvexBody) else ConvexBody.ellipsoid(body_or_radii)
    if body.kind != "ellipsoid":
        raise UnsupportedInputError("analytic characteristics exist only for ellipsoids")
    n = body.n
    if warn:
        for a, b, f in resonant_pairs(body.radii):
            warnings.warn(f"resonant ellipsoid: (r_{a + 1}/r_{b + 1})^2 = {f}; "
                          "orbit families are reported by representatives only",
                          ResonanceWarning, stacklevel=2)
    out = []
    for k in np.argsort(body.radii, kind="stable"):
        R = math.sqrt(2.0) * body.radii[k]
        tau = TWO_PI * R
        t = np.arange(samples) * (tau / samples)
        x = np.zeros((samples, 2 * n))
        x[:, k] = R * np.cos(t / R)
        x[:, n + k] = R * np.sin(t / R)
        out.append(ClosedCharacteristic(body, PeriodicCurve(tau, x), True,
                                        "analytic planar circle", "symmetric", f"plane-{k + 1}"))
    return out


def alpha_parametrization(body: ConvexBody, orbit: ClosedCharacteristic, alpha: float = DEFAULT_ALPHA,
                          samples: int | None = None) -> PeriodicCurve:
    """The orbit as a solution of ``x' = J grad j^alpha`` (period ``tau_alpha``)."""
    if not 1.0 < alpha < 2.0:
        raise DomainError("alpha must lie in (1, 2)")
    x = orbit.x
    speed = alpha * np.linalg.norm(body.gauge_grad(x), axis=1)
    return reparametrize(orbit.curve, 1.0 / speed, samples)


def from_alpha_curve(body: ConvexBody, curve: PeriodicCurve, alpha: float, samples: int | None = None,
                     **kw) -> ClosedCharacteristic:
    speed = alpha * np.linalg.norm(body.gauge_grad(curve.samples), axis=1)
    return ClosedCharacteristic(body, reparametrize(curve, speed, samples), **kw)


def classify_symmetry(body: ConvexBody, x: ClosedCharacteristic, tol: Tolerances = DEFAULT_TOLERANCES,
                      shifts: int = 256, require_symmetric_body: bool = True) -> str:
    """``"symmetric"`` when ``x(t + tau/2) = -x(t)``, ``"asymmetric"`` when the
    orbits of ``x`` and ``-x`` stay apart.

    Raises
    ------
    ClassificationError
        When neither distance is decisive.
    """
    if require_symmetric_body and not body.symmetric:
        raise UnsupportedInputError("symmetry classes are defined for centrally symmetric bodies")
    c = x.curve
    t = c.times
    half = float(np.max(np.linalg.norm(c(t + 0.5 * x.tau) + x.x, axis=1)))
    if half <= tol.sym_orbit_tol:
        return "symmetric"
    # distance between the point sets O(x) and O(-x), sampled then refined
    pts = x.x
    fine = c(np.arange(8 * len(pts)) * (x.tau / (8 * len(pts))))
    d = np.linalg.norm(pts[:, None, :] + fine[None, :, :], axis=2)
    i, k = np.unravel_index(int(np.argmin(d)), d.shape)
    s0 = np.array([t[i], k * x.tau / (8 * len(pts))])
    res = minimize(lambda st: float(np.sum((c(st[:1]) + c(st[1:])) ** 2)), s0, method="Nelder-Mead",
                   options={"xatol": 1e-12 * x.tau, "fatol": 1e-30, "maxiter": 400})
    shift_dist = math.sqrt(min(float(res.fun), float(d.min()) ** 2))
    if shift_dist > 10.0 * tol.sym_orbit_tol + 1e-3 * math.sqrt(np.mean(np.sum(pts ** 2, axis=1))) / len(pts):
        return "asymmetric"
    raise ClassificationError(
        f"orbit is neither half-period symmetric ({half:.3e}) nor separated from its "
        f"negative ({shift_dist:.3e})", half_period_distance=half, shift_distance=shift_dist)


# ----------------------------------------------------------------- dual loops
@dataclass(frozen=True, eq=False)
class DualLoop:
    """Mean-zero loop on ``[0, 1]`` given by Fourier modes ``c_1..c_K``."""

    alpha: float
    coeffs: np.ndarray  # (K, 2n) complex

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[1] % 2:
            raise DomainError("coefficients must have shape (K, 2n)")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return self.coeffs.shape[0]

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.coeffs.real.ravel(), self.coeffs.imag.ravel()])

    @classmethod
    def from_vector(cls, alpha: float, v: np.ndarray, K: int, dim: int) -> "DualLoop":
        h = K * dim
        return cls(alpha, (v[:h] + 1j * v[h:]).reshape(K, dim))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        j = np.arange(1, self.K + 1)
        ph = np.exp(TWO_PI * 1j * np.multiply.outer(t, j))
        return 2.0 * (ph @ self.coeffs).real

    def primitive_coeffs(self) -> np.ndarray:
        """Modes of ``Pi u``: the mean-zero antiderivative."""
        j = np.arange(1, self.K + 1)[:, None]
        return self.coeffs / (TWO_PI * 1j * j)

    def shifted(self, s: float) -> "DualLoop":
        j = np.arange(1, self.K + 1)[:, None]
        return DualLoop(self.alpha, self.coeffs * np.exp(TWO_PI * 1j * j * s))

    def norm(self) -> float:
        return float(np.sqrt(2.0 * np.sum(np.abs(self.coeffs) ** 2)))


def _synth(c: np.ndarray, L: int) -> np.ndarray:
    """Real samples of ``2 Re sum c_j e^{2 pi i j t}`` at ``t = i/L``."""
    K, d = c.shape
    spec = np.zeros((L // 2 + 1, d), dtype=complex)
    spec[1:K + 1] = c * L
    return np.fft.irfft(spec, n=L, axis=0)


def _analyze(f: np.ndarray, K: int) -> np.ndarray:
    """Modes ``1..K`` of ``mean(f e^{-2 pi i j t})`` from uniform samples."""
    L = len(f)
    return np.fft.rfft(f, axis=0)[1:K + 1] / L


class DualFunctional:
    """``f(u) = int_0^1 1/2 (J u, Pi u) + H*(-J u) dt`` on ``K`` Fourier modes.

    The quadratic part is exact in Fourier space,
    ``-sum_j a_j . J b_j / (pi j)`` with ``c_j = a_j + i b_j``; the conjugate
    term uses the periodic trapezoid rule on ``L >= 8K`` points.
    """

    def __init__(self, body: ConvexBody, alpha: float = DEFAULT_ALPHA, K: int = DEFAULT_MODES,
                 L: int | None = None):
        if not 1.0 < alpha < 2.0:
            raise DomainError("alpha must lie in (1, 2)")
        self.body = body
        self.alpha = alpha
        self.K = int(K)
        self.dim = body.dim
        L = L or 8 * self.K
        self.L = int(2 ** math.ceil(math.log2(max(L, 8 * self.K))))
        self.J = standard_J(body.n)
        self.jj = np.arange(1, self.K + 1)[:, None]

    # layout helpers
    def coeffs(self, v) -> np.ndarray:
        h = self.K * self.dim
        return (v[:h] + 1j * v[h:]).reshape(self.K, self.dim)

    def flatten(self, c) -> np.ndarray:
        return np.concatenate([c.real.ravel(), c.imag.ravel()])

    def loop(self, v) -> DualLoop:
        return DualLoop(self.alpha, self.coeffs(v))

    def _quad(self, c):
        a, b = c.real, c.imag
        return float(-np.sum(np.einsum("ji,ji->j", a, b @ self.J.T) / (math.pi * self.jj[:, 0])))

    def _ys(self, c, L=None):
        u = _synth(c, L or self.L)
        return -u @ self.J.T

    def value(self, v, L: int | None = None) -> float:
        c = self.coeffs(v)
        y = self._ys(c, L)
        return self._quad(c) + float(np.mean(fenchel_conjugate(self.body, self.alpha, y)))

    def value_and_grad(self, v):
        c = self.coeffs(v)
        y = self._ys(c)
        val = self._quad(c) + float(np.mean(fenchel_conjugate(self.body, self.alpha, y)))
        g = conjugate_grad(self.body, self.alpha, y)
        G = 1j * (c @ self.J.T) / (math.pi * self.jj) + 2.0 * (_analyze(g, self.K) @ self.J.T)
        return val, self.flatten(G)

    def grad(self, v) -> np.ndarray:
        return self.value_and_grad(v)[1]

    def hessian_operator(self, v) -> LinearOperator:
        """Hessian-vector products at ``v`` using ``hess H* = (hess H)^{-1}``."""
        c = self.coeffs(v)
        y = self._ys(c)
        x = conjugate_grad(self.body, self.alpha, y)
        Q = np.linalg.inv(hamiltonian_hessian(self.body, self.alpha, x))
        J = self.J

        def mv(w):
            w = np.asarray(w).ravel()
            dc = self.coeffs(w)
            du = _synth(dc, self.L)
            dg = np.einsum("tij,tj->ti", Q, -du @ J.T)
            dG = 1j * (dc @ J.T) / (math.pi * self.jj) + 2.0 * (_analyze(dg, self.K) @ J.T)
            return self.flatten(dG)

        n = 2 * self.K * self.dim
        return LinearOperator((n, n), matvec=mv, dtype=float)

    def check_quadrature(self, v, tol: float = 1e-8) -> float:
        """Relative change of the value when the grid is doubled."""
        a = self.value(v)
        b = self.value(v, L=2 * self.L)
        rel = abs(a - b) / max(1.0, abs(b))
        if rel > tol:
            raise ResolutionError(f"dual action changes by {rel:.2e} under grid doubling; raise K or L")
        return rel


def dual_action(body: ConvexBody, alpha: float, u: DualLoop, L: int | None = None,
                check: bool = True) -> float:
    """Value of the dual action functional at ``u``."""
    F = DualFunctional(body, alpha, u.K, L)
    v = u.vector
    if check:
        F.check_quadrature(v)
    return F.value(v)


def critical_value(alpha: float, action_value: float, m: int = 1) -> float:
    """``-(1 - alpha/2) (2 m A / alpha)^{-alpha/(2-alpha)}``."""
    return -(1.0 - alpha / 2.0) * (2.0 * m * action_value / alpha) ** (-alpha / (2.0 - alpha))


# ------------------------------------------------------------- conversions
def characteristic_to_u(x: ClosedCharacteristic, m: int = 1, alpha: float = DEFAULT_ALPHA,
                        K: int = DEFAULT_MODES) -> DualLoop:
    """Critical loop ``u = d/dt z`` of ``z(t) = (m tau)^{-1/(2-alpha)} x(m tau t)``.

    Here ``(tau, x)`` is the alpha parametrization, so
    ``u(t) = (m tau)^{(1-alpha)/(2-alpha)} x'(m tau t)``.
    """
    if m < 1:
        raise DomainError("m must be positive")
    curve = alpha_parametrization(x.body, x, alpha)
    tau = curve.period
    L = int(2 ** math.ceil(math.log2(8 * K)))
    t = np.arange(L) / L
    u = (m * tau) ** ((1.0 - alpha) / (2.0 - alpha)) * curve(m * tau * t, derivative=1)
    return DualLoop(alpha, _analyze(u, K))


@dataclass(frozen=True)
class Reconstruction:
    orbit: ClosedCharacteristic
    m: int
    energy: float
    xi: np.ndarray
    residual: float
    closure: float


def _detect_multiplicity(c: np.ndarray, rel: float = 1e-7) -> int:
    amp = np.linalg.norm(c, axis=1)
    sig = np.nonzero(amp > rel * amp.max())[0] + 1
    return int(reduce(math.gcd, sig.tolist())) if len(sig) else 1


def u_to_characteristic(body: ConvexBody, alpha: float, u: DualLoop, samples: int = 256,
                        tol: float = 1e-6) -> Reconstruction:
    """Rebuild the closed characteristic behind a critical loop.

    ``z = Pi u + xi`` with ``xi`` the mean of ``grad H*(-J u) - Pi u``; the
    energy ``h = H(z)`` fixes ``x(s) = h^{-1/alpha} z(h^{(2-alpha)/alpha} s)``.

    Raises
    ------
    NotASolutionError
        If ``z`` does not solve the Hamiltonian equation within ``tol``.
    """
    K = u.K
    J = standard_J(body.n)
    L = int(2 ** math.ceil(math.log2(8 * K)))
    c = u.coeffs
    pc = u.primitive_coeffs()
    Pu = _synth(pc, L)
    g = conjugate_grad(body, alpha, -_synth(c, L) @ J.T)
    xi = np.mean(g - Pu, axis=0)
    z = Pu + xi
    scale = float(np.max(np.linalg.norm(z, axis=1)))
    if scale < 1e-14:
        raise NotASolutionError("loop is trivial")
    res = float(np.max(np.linalg.norm(z - g, axis=1))) / scale
    if res > tol:
        raise NotASolutionError(f"z = Pi u + xi misses grad H*(-J u) by {res:.2e} (relative)")
    h = float(np.mean(hamiltonian(body, alpha, z)))
    m = _detect_multiplicity(c)
    # closure check of the 1/m-shift, done exactly in Fourier space
    j = np.arange(1, K + 1)[:, None]
    closure = float(np.max(np.abs(pc * (np.exp(TWO_PI * 1j * j / m) - 1.0)))) / max(np.abs(pc).max(), 1e-300)
    if closure > 1e-6:
        raise ResolutionError(f"mode-gcd multiplicity {m} fails the closure test ({closure:.2e})")
    tau_a = h ** ((alpha - 2.0) / alpha) / m
    s = np.arange(samples) * (tau_a / samples)
    tt = h ** ((2.0 - alpha) / alpha) * s
    ph = np.exp(TWO_PI * 1j * np.multiply.outer(tt, j[:, 0]))
    zs = 2.0 * (ph @ pc).real + xi
    xs = h ** (-1.0 / alpha) * zs
    curve = PeriodicCurve(tau_a, xs)
    orbit = from_alpha_curve(body, curve, alpha, samples, minimal_period=True,
                             period_evidence=f"gcd of significant modes = {m}; closure {closure:.1e}")
    return Reconstruction(orbit, m, h, xi, res, closure)


# ------------------------------------------------------------ critical points
@dataclass
class SeedOutcome:
    seed: int
    converged: bool
    loop: DualLoop | None
    grad_norm: float
    value: float
    message: str = ""


def _newton(F: DualFunctional, v, tol: float, max_iter: int = 40):
    val, g = F.value_and_grad(v)
    gn = float(np.linalg.norm(g))
    for _ in range(max_iter):
        if gn <= tol:
            break
        H = F.hessian_operator(v)
        step, _info = minres(H, -g, rtol=1e-13, maxiter=2000) if _minres_has_rtol() else minres(H, -g, tol=1e-13, maxiter=2000)
        lam = 1.0
        while lam > 1e-4:
            v_new = v + lam * step
            val_new, g_new = F.value_and_grad(v_new)
            gn_new = float(np.linalg.norm(g_new))
            if gn_new < gn:
                break
            lam *= 0.5
        else:
            break
        v, val, g, gn = v_new, val_new, g_new, gn_new
    return v, val, gn


_MINRES_RTOL = None


def _minres_has_rtol() -> bool:
    global _MINRES_RTOL
    if _MINRES_RTOL is None:
        import inspect

        _MINRES_RTOL = "rtol" in inspect.signature(minres).parameters
    return _MINRES_RTOL


def polish(F: DualFunctional, v, tol: float = DEFAULT_TOLERANCES.grad_tol, descent: bool = True,
           max_iter: int = 3000):
    """First-order descent (L-BFGS) followed by Newton-MINRES polishing."""
    if descent:
        res = minimize(F.value_and_grad, v, jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": 1e-10, "ftol": 1e-15, "maxcor": 30})
        v = res.x
    # aim well below the acceptance threshold; stop early only on stagnation
    v, val, gn = _newton(F, v, 1e-4 * tol)
    return v, val, gn


def random_seed_loop(rng: np.random.Generator, body: ConvexBody, alpha: float, K: int,
                     modes: int = 3) -> DualLoop:
    c = np.zeros((K, body.dim), dtype=complex)
    for j in range(1, min(modes, K) + 1):
        c[j - 1] = (rng.standard_normal(body.dim) + 1j * rng.standard_normal(body.dim)) / j ** 2
    return DualLoop(alpha, 0.2 * c)


def find_critical_points(body: ConvexBody, alpha: float = DEFAULT_ALPHA, K: int = DEFAULT_MODES,
                         seeds=(), tol: Tolerances = DEFAULT_TOLERANCES, descent: bool = True,
                         workers: int | None = None) -> tuple[list[DualLoop], list[SeedOutcome]]:
    """Critical loops of the dual functional reached from ``seeds``.

    Each seed is polished independently; converged loops are then reduced
    to one representative per time-shift class (and per sign for symmetric
    bodies).
    """
    F = DualFunctional(body, alpha, K)

    def run(args):
        i, seed = args
        v0 = seed.vector if isinstance(seed, DualLoop) else np.asarray(seed, dtype=float)
        try:
            v, val, gn = polish(F, v0, tol.grad_tol, descent)
        except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            return SeedOutcome(i, False, None, math.inf, math.nan, str(exc))
        ok = gn <= tol.grad_tol and np.linalg.norm(v) > 1e-8
        return SeedOutcome(i, bool(ok), F.loop(v) if ok else None, gn, val,
                           "" if ok else f"gradient norm {gn:.2e} above {tol.grad_tol:.0e}")

    items = list(enumerate(seeds))
    nw = worker_count(workers)
    if nw > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            outcomes = list(ex.map(run, items))
    else:
        outcomes = [run(a) for a in items]
    loops = dedup_loops([o.loop for o in outcomes if o.converged], body.symmetric)
    return loops, outcomes


def loop_distance(a: DualLoop, b: DualLoop, shifts: int = 256, allow_sign: bool = False) -> float:
    """Normalized L2 distance minimized over time shifts (and sign)."""
    K = min(a.K, b.K)
    ca, cb = a.coeffs[:K], b.coeffs[:K]
    s = np.arange(shifts) / shifts
    j = np.arange(1, K + 1)
    ph = np.exp(TWO_PI * 1j * np.outer(s, j))
    best = math.inf
    for sign in ((1.0, -1.0) if allow_sign else (1.0,)):
        diff = ca[None] - sign * cb[None] * ph[:, :, None]
        d = np.sqrt(np.sum(np.abs(diff) ** 2, axis=(1, 2)))
        k = int(np.argmin(d))
        # refine the best shift with a few Newton-free golden steps
        lo, hi = s[k] - 1.0 / shifts, s[k] + 1.0 / shifts
        for _ in range(40):
            m1, m2 = lo + (hi - lo) * 0.382, lo + (hi - lo) * 0.618
            f1 = np.linalg.norm(ca - sign * cb * np.exp(TWO_PI * 1j * j * m1)[:, None])
            f2 = np.linalg.norm(ca - sign * cb * np.exp(TWO_PI * 1j * j * m2)[:, None])
            lo, hi = (lo, m2) if f1 < f2 else (m1, hi)
        best = min(best, float(np.linalg.norm(ca - sign * cb * np.exp(TWO_PI * 1j * j * lo)[:, None])))
    return best / max(np.linalg.norm(ca), 1e-300)


def dedup_loops(loops, symmetric: bool, threshold: float = 1e-4) -> list[DualLoop]:
    reps: list[DualLoop] = []
    for u in loops:
        if u is None:
            continue
        if all(loop_distance(r, u, allow_sign=symmetric) > threshold for r in reps):
            reps.append(u)
    return reps


def orbit_distance(a: ClosedCharacteristic, b: ClosedCharacteristic, allow_sign: bool = False) -> float:
    """Distance between two closed characteristics up to time shift (relative)."""
    if abs(a.tau - b.tau) > 1e-6 * max(a.tau, b.tau):
        return math.inf
    N = max(a.curve.n_samples, b.curve.n_samples)
    ta = a.curve.resample(N).samples
    ca = np.fft.fft(ta, axis=0)
    best = math.inf
    for sign in ((1.0, -1.0) if allow_sign else (1.0,)):
        cb = np.fft.fft(sign * b.curve.resample(N).samples, axis=0)
        # circular cross-correlation over all sample shifts at once
        corr = np.fft.ifft(np.sum(ca * np.conj(cb), axis=1)).real
        k = int(np.argmax(corr))
        dt = b.tau / N
        tgrid = np.arange(N) * dt

        def dist(s, sign=sign):
            return float(np.max(np.linalg.norm(ta - sign * b.curve(tgrid - s), axis=1)))

        res = minimize_scalar(dist, bounds=((k - 1) * dt, (k + 1) * dt), method="bounded",
                              options={"xatol": 1e-12 * b.tau})
        best = min(best, dist(k * dt), float(res.fun))
    scale = float(np.max(np.linalg.norm(ta, axis=1)))
    return best / scale


@dataclass
class FinderResult:
    orbits: list[ClosedCharacteristic]
    loops: list[DualLoop]
    multiplicities: list[int]
    outcomes: list[SeedOutcome]
    failures: list[str] = field(default_factory=list)


def analytic_seeds(body: ConvexBody, alpha: float, K: int) -> list[DualLoop]:
    """Loops of the planar circles of the underlying ellipsoid."""
    base = ConvexBody.ellipsoid(body.radii, alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResonanceWarning)
        return [characteristic_to_u(x, 1, alpha, K) for x in ellipsoid_characteristics(base, warn=False)]


def find_orbits(body: ConvexBody, alpha: float = DEFAULT_ALPHA, K: int = DEFAULT_MODES,
                seed_count: int = 200, rng_seed: int = 0, use_analytic: bool = True,
                tol: Tolerances = DEFAULT_TOLERANCES, workers: int | None = None,
                samples: int = 256) -> FinderResult:
    """Seed sweep for closed characteristics, one representative per geometric orbit.

    Random seeds are first driven downhill and then polished; analytic seeds
    (the ellipsoid's planar circles) go straight to Newton polishing since
    they sit near saddle points.
    """
    rng = np.random.default_rng(rng_seed)
    rand = [random_seed_loop(rng, body, alpha, K) for _ in range(seed_count)]
    loops_r, out_r = find_critical_points(body, alpha, K, rand, tol, True, workers)
    loops_a, out_a = [], []
    if use_analytic:
        loops_a, out_a = find_critical_points(body, alpha, K, analytic_seeds(body, alpha, K), tol,
                                              False, workers)
        for o in out_a:
            o.seed += seed_count
    orbits, mults, kept, failures = [], [], [], []
    for u in loops_a + loops_r:
        try:
            rec = u_to_characteristic(body, alpha, u, samples)
        except (NotASolutionError, ResolutionError) as exc:
            failures.append(str(exc))
            continue
        x = rec.orbit
        if any(orbit_distance(x, y, allow_sign=body.symmetric) < 1e-4 for y in orbits):
            continue
        orbits.append(x)
        mults.append(rec.m)
        kept.append(u)
    order = np.argsort([x.action for x in orbits], kind="stable")
    orbits = [orbits[i] for i in order]
    labelled = []
    for i, x in enumerate(orbits):
        cls = None
        if body.symmetric:
            try:
                cls = classify_symmetry(body, x, tol)
            except ClassificationError as exc:
                failures.append(str(exc))
        labelled.append(ClosedCharacteristic(body, x.curve, x.minimal_period, x.period_evidence,
                                             cls, f"orbit-{i + 1}"))
    return FinderResult(labelled, [kept[i] for i in order], [mults[i] for i in order],
                        out_r + out_a, failures)
