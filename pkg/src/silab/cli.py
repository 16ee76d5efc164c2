"""Command line interface ``sil``.

Exit codes: 0 pass, 2 invalid input, 3 numerical or internal failure,
4 inconclusive verdict.  Reports are written as JSON (plus CSV tables and
plot-data columns) into ``--out``; wall time goes to ``timing.json``.
"""
from __future__ import annotations

import cmath
import functools
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import click
import numpy as np

from . import report
from .bodies import ConvexBody
from .config import (
    DEFAULT_ALPHA,
    DEFAULT_MODES,
    DEFAULT_SEED_COUNT,
    DEFAULT_TOLERANCES,
    Tolerances,
)
from .errors import DomainError, InputError, NumericalError
from .index import IndexProfile, OmegaGrid, mean_index, omega_index
from .orbits import ellipsoid_characteristics, find_orbits
from .splitting import SplittingProfile, splitting_numbers
from .symplectic import LinearSystem, integrate_fundamental, linearize_orbit

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_INCONCLUSIVE = 0, 2, 3, 4


@dataclass
class RunConfig:
    body: str | None = None
    system: str | None = None
    alpha: float = DEFAULT_ALPHA
    K: int = DEFAULT_MODES
    steps: int = 2048
    m_max: int = 20
    k_max: int = 20
    N_max: int = 10_000
    seed_count: int = DEFAULT_SEED_COUNT
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out: str = "sil-out"

    def tol(self) -> Tolerances:
        try:
            return DEFAULT_TOLERANCES.replace(**self.tolerances)
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError(f"field 'tolerances': {exc}") from exc

    def hashed(self) -> dict:
        """Configuration as embedded in reports (the output directory excluded)."""
        d = asdict(self)
        d.pop("out")
        return d


def _load_config(path: str | None, overrides: dict) -> RunConfig:
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise DomainError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"config has unknown field(s): {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = RunConfig(**data)
    for name in ("K", "steps", "m_max", "k_max", "N_max", "seed_count"):
        if int(getattr(cfg, name)) < 1:
            raise DomainError(f"field '{name}' must be a positive integer")
    if not 1.0 < float(cfg.alpha) < 2.0:
        raise DomainError("field 'alpha' must lie in (1, 2)")
    cfg.tol()
    return cfg


def _parse_tols(items) -> dict:
    out = {}
    for it in items or ():
        if "=" not in it:
            raise DomainError(f"--tol expects NAME=VALUE, got {it!r}")
        k, v = it.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise DomainError(f"--tol {k}: {exc}") from exc
    return out


def _parse_omega(text: str) -> complex:
    text = text.strip().lower()
    if text.startswith("theta="):
        return cmath.exp(1j * float(text[6:]))
    try:
        return complex(text.replace("i", "j")) if text not in ("i", "j") else 1j
    except ValueError as exc:
        raise DomainError(f"cannot parse omega {text!r}") from exc


def _load_json(path: str, what: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DomainError(f"{what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"{what} {path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise DomainError(f"{what} {path}: expected a JSON object")
    return data


def _matrix_field(d: dict, key: str, n: int | None = None):
    if key not in d:
        raise DomainError(f"system specification is missing field '{key}'")
    try:
        a = np.array(d[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"field '{key}' is not a numeric matrix") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
        raise DomainError(f"field '{key}' must be a square matrix of even size, got shape {a.shape}")
    if n is not None and a.shape[0] != 2 * n:
        raise DomainError(f"field '{key}' has size {a.shape[0]} but field 'n' = {n} needs {2 * n}")
    return a


def _declared_n(d: dict) -> int | None:
    if "n" not in d:
        return None
    try:
        n = int(d["n"])
    except (TypeError, ValueError) as exc:
        raise DomainError("field 'n' must be an integer") from exc
    if n < 1:
        raise DomainError("field 'n' must be positive")
    return n


def _terms(d: dict, key: str, shape, count: int) -> np.ndarray:
    try:
        a = np.array(d.get(key, []), dtype=float)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"field '{key}' is not a list of numeric matrices") from exc
    if a.size == 0:
        return np.zeros((count, *shape))
    if a.ndim != 3 or a.shape[1:] != shape:
        raise DomainError(f"field '{key}' must be a list of {shape[0]}x{shape[1]} matrices")
    return a


def load_system(path: str, cfg: RunConfig):
    """System specification: constant ``B``, trigonometric ``B(t)`` or a body orbit."""
    d = _load_json(path, "system")
    if "body" in d:
        body_ref = Path(path).parent / d["body"] if isinstance(d["body"], str) else None
        body = ConvexBody.from_dict(d["body"]) if isinstance(d["body"], dict) else ConvexBody.load(body_ref)
        k = int(d.get("orbit", 0))
        alpha = float(d.get("alpha", cfg.alpha))
        if body.kind == "ellipsoid":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                orbits = ellipsoid_characteristics(body, warn=False)
        else:
            orbits = find_orbits(body, alpha, cfg.K, cfg.seed_count, cfg.seed, tol=cfg.tol()).orbits
        if not 0 <= k < len(orbits):
            raise DomainError(f"field 'orbit' = {k} but only {len(orbits)} orbit(s) are available")
        return linearize_orbit(body, orbits[k], alpha)
    if "tau" not in d:
        raise DomainError("system specification is missing field 'tau'")
    try:
        tau = float(d["tau"])
    except (TypeError, ValueError) as exc:
        raise DomainError("field 'tau' must be a number") from exc
    if not tau > 0:
        raise DomainError("field 'tau' must be positive")
    n = _declared_n(d)
    if "B" in d:
        return LinearSystem.constant(_matrix_field(d, "B", n), tau, label=Path(path).stem)
    if "B0" in d:
        B0 = _matrix_field(d, "B0", n)
        count = max(len(d.get("cos", []) or []), len(d.get("sin", []) or []))
        cos = _terms(d, "cos", B0.shape, count)
        sin = _terms(d, "sin", B0.shape, count)
        if len(cos) != len(sin):
            raise DomainError("fields 'cos' and 'sin' must list the same number of harmonics")
        return LinearSystem.trigonometric(B0, cos, sin, tau, label=Path(path).stem)
    raise DomainError("system specification needs field 'B', 'B0' or 'body'")


def _body(cfg: RunConfig) -> ConvexBody:
    if not cfg.body:
        raise DomainError("a body specification (--body) is required")
    body = ConvexBody.load(cfg.body)
    return body


def _emit(cfg: RunConfig, name: str, kind: str, result: dict, started: float) -> Path:
    out = Path(cfg.out)
    path = report.write_json(out / f"{name}.json", report.envelope(kind, cfg.hashed(), cfg.seed, result))
    timing_path = out / "timing.json"
    timing = {}
    if timing_path.exists():
        try:
            timing = json.loads(timing_path.read_text())
        except json.JSONDecodeError:
            timing = {}
    timing[name] = round(time.perf_counter() - started, 3)
    report.write_json(timing_path, timing)
    return path


def _guard(fn):
    """Map package exceptions to exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except InputError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        except NumericalError as exc:
            click.echo(f"numerical error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        sys.exit(code or EXIT_OK)

    return wrapper


def common(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="JSON run configuration; flags override it."),
        click.option("--out", default=None, help="Output directory."),
        click.option("--seed", type=int, default=None, help="RNG seed."),
        click.option("--alpha", type=float, default=None, help="Exponent of H = j^alpha, in (1, 2)."),
        click.option("--steps", type=int, default=None, help="Integration steps per period."),
        click.option("--tol", "tols", multiple=True, help="Tolerance override NAME=VALUE."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _cfg(config_path, tols, **flags) -> RunConfig:
    over = dict(flags)
    t = _parse_tols(tols)
    cfg = _load_config(config_path, over)
    if t:
        cfg.tolerances = {**cfg.tolerances, **t}
        cfg.tol()
    return cfg


@click.group()
@click.option("--threads", type=int, default=None, help="Worker threads (also capped by SIL_THREADS).")
@click.pass_context
def main(ctx, threads):
    """Symplectic index laboratory."""
    ctx.obj = {"threads": threads}


def _index_payload(pair):
    return {
        "i": pair.index,
        "nu": pair.nullity,
        "low_confidence": pair.low_confidence,
        "crossings": [{"t": c.t, "multiplicity": c.multiplicity, "low_confidence": c.low_confidence}
                      for c in pair.crossings],
    }


@main.command("index")
@click.option("--system", "system_path", required=True, type=click.Path(dir_okay=False))
@click.option("--omega", "omegas", multiple=True, help="Unit-circle point: 1, -1, 0.6+0.8j or theta=ANGLE.")
@click.option("--mean", "want_mean", is_flag=True, help="Also compute the mean index.")
@common
@_guard
def cmd_index(system_path, omegas, want_mean, config_path, out, seed, alpha, steps, tols):
    """omega-indices of the fundamental solution of a linear system."""
    t0 = time.perf_counter()
    cfg = _cfg(config_path, tols, system=system_path, out=out, seed=seed, alpha=alpha, steps=steps)
    tol = cfg.tol()
    path = integrate_fundamental(load_system(system_path, cfg), cfg.steps, tol)
    result = {"n": path.n, "tau": path.tau}
    omegas = omegas or (() if want_mean else ("1",))
    per = []
    for text in omegas:
        w = _parse_omega(text)
        pair = omega_index(path, w, tol)
        per.append({"omega": w, **_index_payload(pair)})
    if len(per) == 1:
        result.update(per[0])
    elif per:
        result["points"] = per
    if want_mean:
        mi = mean_index(path, OmegaGrid.uniform(4096), tol=tol)
        result.update({"mean": mi.value, "quadrature": mi.quadrature, "limit": mi.limit, "k_limit": mi.k_limit})
    _emit(cfg, "index", "index", result, t0)
    summary = {k: v for k, v in result.items() if k in ("i", "nu", "mean")}
    if "points" in result:
        summary["points"] = [{"omega": p["omega"], "i": p["i"], "nu": p["nu"]} for p in result["points"]]
    click.echo(report.dumps(summary).strip())


@main.command("mean-index")
@click.option("--system", "system_path", required=True, type=click.Path(dir_okay=False))
@click.option("--resolution", type=int, default=4096)
@click.option("--k-limit", type=int, default=None)
@common
@_guard
def cmd_mean(system_path, resolution, k_limit, config_path, out, seed, alpha, steps, tols):
    """Mean index by quadrature and by the iterate limit."""
    t0 = time.perf_counter()
    cfg = _cfg(config_path, tols, system=system_path, out=out, seed=seed, alpha=alpha, steps=steps)
    tol = cfg.tol()
    path = integrate_fundamental(load_system(system_path, cfg), cfg.steps, tol)
    prof = IndexProfile(path, tol)
    mi = mean_index(path, OmegaGrid.uniform(resolution), k_limit, tol, profile=prof)
    result = {"mean": mi.value, "quadrature": mi.quadrature, "limit": mi.limit, "k_limit": mi.k_limit,
              "exact_integral": prof.integral()}
    _emit(cfg, "mean_index", "mean-index", result, t0)
    report.write_plot_data(Path(cfg.out) / "mean_index_ratios.dat",
                           {"k": list(range(1, mi.k_limit + 1)), "i_k_over_k": [float(r) for r in mi.ratios]})
    click.echo(report.dumps(result).strip())


@main.command("splitting")
@click.option("--system", "system_path", required=True, type=click.Path(dir_okay=False))
@click.option("--omega", "omegas", multiple=True, help="Points to evaluate; default: every eigen-angle.")
@click.option("--eps", type=float, default=None)
@common
@_guard
def cmd_splitting(system_path, omegas, eps, config_path, out, seed, alpha, steps, tols):
    """Splitting numbers of the end matrix."""
    t0 = time.perf_counter()
    cfg = _cfg(config_path, tols, system=system_path, out=out, seed=seed, alpha=alpha, steps=steps)
    tol = cfg.tol()
    path = integrate_fundamental(load_system(system_path, cfg), cfg.steps, tol)
    rows = []
    if omegas:
        for text in omegas:
            p = splitting_numbers(path, _parse_omega(text), eps, tol)
            rows.append(p)
    else:
        rows = [p for _, p in SplittingProfile(path, tol)]
    result = {"pairs": [{"omega": p.omega, "angle": math.atan2(p.omega.imag, p.omega.real) % (2 * math.pi),
                         "s_plus": p.s_plus, "s_minus": p.s_minus, "nullity": p.nullity, "eps": p.eps}
                        for p in rows]}
    _emit(cfg, "splitting", "splitting", result, t0)
    click.echo(report.dumps(result).strip())


@main.command("bott-check")
@click.option("--cases", type=int, default=50)
@click.option("--m", "m_max", type=int, default=6)
@common
@_guard
def cmd_bott(cases, m_max, config_path, out, seed, alpha, steps, tols):
    """Bott splitting identity and iterated-index routes on a random convex suite."""
    from .suites import random_suite, run_bott_suite

    t0 = time.perf_counter()
    cfg = _cfg(config_path, tols, out=out, seed=seed, alpha=alpha, steps=steps if steps else 1024,
               m_max=m_max)
    tol = cfg.tol()
    suite = random_suite(cfg.seed, cases, steps=cfg.steps, tol=tol)
    rep = run_bott_suite(suite, m_max, tol)
    rows = [(r.case, r.m, r.angle, *r.lhs, *r.rhs, r.equal) for r in rep.bott]
    report.write_csv(Path(cfg.out) / "bott_table.csv",
                     ["case", "m", "angle", "lhs_plus", "lhs_minus", "rhs_plus", "rhs_minus", "equal"], rows)
    result = {
        "cases": cases,
        "m_max": m_max,
        "rows": len(rows),
        "bott_equal": rep.bott_ok,
        "iterated_equal": rep.iterated_ok,
        "lower_bound": rep.lower_bound_ok,
        "splitting_bounds": rep.splitting_bounds_ok,
        "krein_bound": rep.krein_ok,
        "lemma41": rep.lemma41_ok,
        "passed": rep.passed,
        "mismatches": [[r.case, r.m, r.angle, list(r.lhs), list(r.rhs)] for r in rep.bott if not r.equal],
    }
    _emit(cfg, "bott_check", "bott-check", result, t0)
    click.echo(f"{len(rows)} identities checked; all equal: {rep.bott_ok}; iterated routes agree: {rep.iterated_ok}")
    return EXIT_OK if rep.passed else EXIT_NUMERICAL


@main.command("find-orbits")
@click.option("--body", "body_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seeds", "seed_count", type=int, default=None)
@click.option("--modes", "K", type=int, default=None)
@common
@click.pass_context
@_guard
def cmd_find(ctx, body_path, seed_count, K, config_path, out, seed, alpha, steps, tols):
    """Closed characteristics from a seed sweep of the dual functional."""
    t0 = time.perf_counter()
    cfg = _cfg(config_path, tols, body=body_path, out=out, seed=seed, alpha=alpha, steps=steps,
               seed_count=seed_count, K=K)
    body = _body(cfg)
    res = find_orbits(body, cfg.alpha, cfg.K, cfg.seed_count, cfg.seed, tol=cfg.tol(),
                      workers=ctx.obj.get("threads"))
    result = {
        "count": len(res.orbits),
        "orbits": [{"label": x.label, "tau": x.tau, "action": x.action, "symmetry_class": x.symmetry_class,
                    "residual": float(x.residual()), "surface_error": float(x.surface_error()),
                    "multiplicity": m, "minimal_period_evidence": x.period_evidence}
                   for x, m in zip(res.orbits, res.multiplicities)],
        "seeds_converged": sum(o.converged for o in res.outcomes),
        "seeds_total": len(res.outcomes),
        "failures": res.failures,
    }
    _emit(cfg, "orbits", "find-orbits", result, t0)
    click.echo(f"{len(res.orbits)} geometrically distinct closed characteristic(s)")


def _verify(ctx, body_path, cfg):
    from .pipeline import run_verification

    body = _body(cfg)
    return run_verification(body, cfg.alpha, cfg.K, cfg.seed_count, cfg.seed, cfg.steps, cfg.m_max,
                            cfg.k_max, cfg.N_max, cfg.tol(), ctx.obj.get("threads"))


@main.command("verify")
@click.option("--body", "body_path", required=True, type=click.Path(dir_okay=False))
@click.option("--nmax", "N_max", type=int, default=None)
@click.option("--kmax", "k_max", type=int, default=None)
@click.option("--mmax", "m_max", type=int, default=None)
@click.option("--seeds", "seed_count", type=int, default=None)
@click.option("--modes", "K", type=int, default=None)
@common
@click.pass_context
@_guard
def cmd_verify(ctx, body_path, N_max, k_max, m_max, seed_count, K, config_path, out, seed, alpha, steps, tols):
    """Full pipeline: orbits, index intervals, covering, jumps and the count verdict."""
    t0 = time.perf_counter()
    cfg = _cfg(config_path, tols, body=body_path, out=out, seed=seed, alpha=alpha, steps=steps,
               N_max=N_max, k_max=k_max, m_max=m_max, seed_count=seed_count, K=K)
    run = _verify(ctx, body_path, cfg)
    payload = run.payload()
    outdir = Path(cfg.out)
    _emit(cfg, "verify", "verify", payload, t0)
    rows = [(d.label, iv.m, iv.lo, iv.hi) for d, k in zip(run.datas, range(len(run.datas)))
            for iv in run.intervals[k]]
    report.write_csv(outdir / "intervals.csv", ["orbit", "m", "i", "i_plus_nu"], rows)
    for k, d in enumerate(run.datas):
        ivs = run.intervals[k]
        report.write_plot_data(outdir / f"index_vs_iterate_{d.label}.dat",
                               {"m": [iv.m for iv in ivs], "i": [iv.lo for iv in ivs],
                                "i_plus_nu": [iv.hi for iv in ivs]})
    n = body.n if (body := run.body) else 0
    report.write_plot_data(outdir / "levels.dat",
                           {"k": list(range(1, cfg.k_max + 1)),
                            "level": [2 * k - 2 + n for k in range(1, cfg.k_max + 1)]})
    cr = run.count
    click.echo(f"verdict: {cr.verdict}; total = q1 + 2 q2 = {cr.total} (n = {cr.n})")
    for w in run.warnings:
        click.echo(f"warning: {w}", err=True)
    return EXIT_OK if cr.passed else EXIT_INCONCLUSIVE


@main.command("jump-search")
@click.option("--body", "body_path", required=True, type=click.Path(dir_okay=False))
@click.option("--nmax", "N_max", type=int, default=None)
@click.option("--seeds", "seed_count", type=int, default=None)
@click.option("--modes", "K", type=int, default=None)
@click.option("--limit", type=int, default=None, help="Stop after this many certificates.")
@common
@click.pass_context
@_guard
def cmd_jump(ctx, body_path, N_max, seed_count, K, limit, config_path, out, seed, alpha, steps, tols):
    """Common index jump certificates for the orbits of a body."""
    from .pipeline import find_and_prepare
    from .verifier import index_jump_search, recheck_certificate

    t0 = time.perf_counter()
    cfg = _cfg(config_path, tols, body=body_path, out=out, seed=seed, alpha=alpha, steps=steps,
               N_max=N_max, seed_count=seed_count, K=K)
    body = _body(cfg)
    tol = cfg.tol()
    _, datas = find_and_prepare(body, cfg.alpha, cfg.K, cfg.seed_count, cfg.seed, cfg.steps, tol,
                                ctx.obj.get("threads"))
    sym = [d for d in datas if d.symmetry_class == "symmetric"]
    asym = [d for d in datas if d.symmetry_class == "asymmetric"]
    entries = sym + asym + [d.doubled() for d in asym]
    q1, q2 = len(sym), len(asym)
    certs = index_jump_search(entries, cfg.N_max, pairs=[(q1 + j, q1 + q2 + j) for j in range(q2)],
                              tol=tol, limit=limit)
    result = {
        "entries": [d.label for d in entries],
        "mean_indices": [d.mean for d in entries],
        "count": len(certs),
        "certificates": [{"N": c.N, "m": list(c.m), "valid": c.valid, "doubling": c.doubling_ok,
                          "equality_elliptic": [list(e) for e in c.elliptic],
                          "recheck": recheck_certificate(c, entries)} for c in certs],
    }
    _emit(cfg, "jump_search", "jump-search", result, t0)
    click.echo(f"{len(certs)} certificate(s) with N <= {cfg.N_max}")
    return EXIT_OK if certs else EXIT_INCONCLUSIVE


if __name__ == "__main__":  # pragma: no cover
    main()
