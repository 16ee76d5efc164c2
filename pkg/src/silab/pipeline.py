"""End-to-end verification run: orbits, index data, covering, jumps, count."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .bodies import ConvexBody
from .config import DEFAULT_ALPHA, DEFAULT_MODES, DEFAULT_SEED_COUNT, DEFAULT_TOLERANCES, Tolerances
from .orbits import ResonanceWarning, find_orbits, resonant_pairs
from .verifier import (
    CountReport,
    CoveringReport,
    IncompleteOrbitSetWarning,
    count_theorem_check,
    covering_injection_check,
    index_intervals,
    index_jump_search,
    prepare_orbit,
    recheck_certificate,
    symmetric_halfpath_check,
)

__all__ = ["VerificationRun", "run_verification", "find_and_prepare"]


@dataclass
class VerificationRun:
    body: ConvexBody
    alpha: float
    orbits: list
    datas: list
    intervals: dict
    covering: CoveringReport
    certificates: list
    count: CountReport
    halfpath: dict
    warnings: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def payload(self, max_certificates: int = 20) -> dict:
        orbit_rows = []
        for k, (x, d) in enumerate(zip(self.orbits, self.datas)):
            ivs = self.intervals[k]
            orbit_rows.append({
                "label": d.label,
                "tau": x.tau,
                "action": x.action,
                "symmetry_class": x.symmetry_class,
                "residual": float(x.residual()),
                "mean_index": d.mean,
                "splitting_at_one": list(d.splitting.at(1.0).as_tuple()),
                "halfpath_defect": self.halfpath.get(k),
                "iterates": [{"m": iv.m, "i": iv.lo, "nu": iv.nullity} for iv in ivs],
            })
        certs = [{
            "N": c.N,
            "m": list(c.m),
            "conditions": [dict(ch) for ch in c.checks],
            "equality_elliptic": [list(e) for e in c.elliptic],
            "doubling": [list(t) for t in c.doubling],
            "recheck": recheck_certificate(c, self._entries()),
        } for c in self.certificates[:max_certificates]]
        cr = self.count
        return {
            "body": self.body.to_dict(),
            "alpha": self.alpha,
            "orbits": orbit_rows,
            "covering": {
                "k_max": self.covering.k_max,
                "covered": self.covering.covered,
                "injective": self.covering.injective,
                "uncovered": self.covering.uncovered,
                "matching": {str(k): list(v) for k, v in self.covering.matching.items()},
            },
            "certificates_found": len(self.certificates),
            "certificates": certs,
            "count": {
                "n": cr.n, "q1": cr.q1, "q2": cr.q2, "total": cr.total,
                "verdict": cr.verdict,
                "certificate_N": cr.certificate.N if cr.certificate else None,
                "injection_table": {str(s): list(v) for s, v in cr.injection.items()},
                "checks": cr.checks,
                "diagnostics": cr.diagnostics,
            },
            "warnings": self.warnings,
            "failures": self.failures,
        }

    def _entries(self):
        sym = [d for d in self.datas if d.symmetry_class == "symmetric"]
        asym = [d for d in self.datas if d.symmetry_class == "asymmetric"]
        return sym + asym + [d.doubled() for d in asym]


def find_and_prepare(body: ConvexBody, alpha: float = DEFAULT_ALPHA, K: int = DEFAULT_MODES,
                     seed_count: int = DEFAULT_SEED_COUNT, seed: int = 0, steps: int = 2048,
                     tol: Tolerances = DEFAULT_TOLERANCES, workers: int | None = None):
    res = find_orbits(body, alpha, K, seed_count, seed, tol=tol, workers=workers)
    datas = [prepare_orbit(body, x, alpha, steps, tol) for x in res.orbits]
    return res, datas


def run_verification(body: ConvexBody, alpha: float = DEFAULT_ALPHA, K: int = DEFAULT_MODES,
                     seed_count: int = DEFAULT_SEED_COUNT, seed: int = 0, steps: int = 2048,
                     m_max: int = 20, k_max: int = 20, N_max: int = 10_000,
                     tol: Tolerances = DEFAULT_TOLERANCES, workers: int | None = None) -> VerificationRun:
    """Seed sweep followed by every index-level check on the orbits found."""
    notes = []
    pairs = resonant_pairs(body.radii)
    if pairs:
        notes.append("resonant radii: " + ", ".join(f"r{a + 1}^2/r{b + 1}^2 = {f}" for a, b, f in pairs))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res, datas = find_and_prepare(body, alpha, K, seed_count, seed, steps, tol, workers)
        intervals = {k: index_intervals(body, alpha, d, m_max, tol, orbit_id=k) for k, d in enumerate(datas)}
        covering = covering_injection_check(datas, k_max)
        halfpath = {}
        for k, d in enumerate(datas):
            hp = symmetric_halfpath_check(body, alpha, d, tol=tol)
            halfpath[k] = hp.defect if hp.applicable else None
            if hp.applicable and not hp.holds:
                notes.append(f"{d.label}: half-period identity fails (defect {hp.defect:.2e})")
        sym = [d for d in datas if d.symmetry_class == "symmetric"]
        asym = [d for d in datas if d.symmetry_class == "asymmetric"]
        entries = sym + asym + [d.doubled() for d in asym]
        q1, q2 = len(sym), len(asym)
        certs = index_jump_search(entries, N_max, pairs=[(q1 + j, q1 + q2 + j) for j in range(q2)], tol=tol)
        count = count_theorem_check(datas, N_max, tol)
    for w in caught:
        if issubclass(w.category, (ResonanceWarning, IncompleteOrbitSetWarning, RuntimeWarning)):
            msg = str(w.message)
            if msg not in notes:
                notes.append(msg)
    return VerificationRun(body, alpha, res.orbits, datas, intervals, covering, certs, count, halfpath,
                           notes, list(res.failures))
