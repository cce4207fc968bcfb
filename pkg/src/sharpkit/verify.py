"""Randomized property suites used as acceptance evidence.

Each suite draws one instance per trial from a generator seeded by
``(seed, trial)``, so a failing trial can be replayed on its own.
"""

from __future__ import annotations

import dataclasses
import time

import numpy as np

from . import channel as ch
from . import linalg, monotones, preorder
from .config import DEFAULT, Tolerances
from .povm import (Povm, computational_basis, extend_to_programmable, random_povm, random_sharp_povm,
                   random_trivial_povm)

SLACK = 1e-7


@dataclasses.dataclass
class SuiteReport:
    name: str
    trials: int
    failures: list = dataclasses.field(default_factory=list)  # (trial seed, summary, violation)
    runtime: float = 0.0
    tolerances: dict = dataclasses.field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "trials": self.trials,
            "passed": self.passed,
            "failures": [{"seed": list(s), "instance": i, "violation": v} for s, i, v in self.failures],
            "runtime": self.runtime,
            "tolerances": self.tolerances,
        }


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return linalg.rng_from(np.random.SeedSequence([seed, trial]))


def _pick(rng, options) -> int:
    return int(options[rng.integers(len(options))])


# planted instances --------------------------------------------------------------

def plant_instance(kind: str, dims, seed, max_mu: float = 0.9):
    """A pair (p, q) whose convertibility is known by construction.

    ``dims`` is ``(d_A, d_B, N)``. Convertible: q is a random fuzzification
    of a random p. Not convertible: (f(p), p) with mu(f) <= ``max_mu`` and p
    of measurement robustness at least 0.05; the fuzzification scales the
    measurement robustness by at most mu, which is a monotone, so no free
    operation can undo it.
    """
    da, db, n = dims
    rng = linalg.rng_from(seed)
    if kind == preorder.CONVERTIBLE:
        p = random_povm(da, n, rng)
        f = ch.random_fuzzifying(da, db, n, rng)
        return p, f(p), preorder.CONVERTIBLE
    if kind != preorder.NOT_CONVERTIBLE:
        raise ValueError(f"unknown instance kind {kind!r}")
    # p lives on d_B here so that the pair reads (d_A-system, d_B-system)
    while True:
        p = random_povm(db, n, rng) if rng.uniform() < 0.7 else random_sharp_povm(db, min(n, db), rng)
        if p.outcomes != n:
            p = random_povm(db, n, rng)
        if monotones.measurement_robustness_closed_form(p) >= 0.05:
            break
    g = ch.random_fuzzifying(db, da, n, rng)
    mu = rng.uniform(0.05, max_mu)
    f = ch.FuzzifyingOperation(g.channel, mu, g.dist)
    return f(p), p, preorder.NOT_CONVERTIBLE


def _dims(rng, dims) -> tuple[int, int, int]:
    return _pick(rng, dims["dims"]), _pick(rng, dims["dims"]), _pick(rng, dims["outcomes"])


# suites -------------------------------------------------------------------------

def _blackwell(rng, dims, tol):
    shape = _dims(rng, dims)
    kind = preorder.CONVERTIBLE if rng.uniform() < 0.5 else preorder.NOT_CONVERTIBLE
    p, q, truth = plant_instance(kind, shape, rng)
    v = preorder.is_sharper(p, q, tol)
    summary = f"{truth} pair dims={shape}"
    if v.status != truth:
        return summary, f"verdict {v.status} (violation {v.violation:.3g})"
    if truth == preorder.CONVERTIBLE:
        ev = preorder.always_more_tunable(p, q, trials=2, seed=rng, tol=tol)
        if ev.violation_found:
            return summary, f"monotone violated by {ev.worst_gap:.3g}"
        return None
    margin = preorder.verify_witness(p, q, v.witness.reference, tol)
    if margin < tol.witness_margin:
        return summary, f"witness margin {margin:.3g} on recheck"
    return None


def _monotone(rng, dims, tol):
    da, db, n = _dims(rng, dims)
    dr = _pick(rng, dims["dims"])
    p = random_povm(da, n, rng)
    f = ch.random_fuzzifying(da, db, n, rng)
    z = random_povm(dr, n, rng)
    before = monotones.tuning_degree(p, z, check_bounds=False, tol=tol).value
    after = monotones.tuning_degree(f(p), z, check_bounds=False, tol=tol).value
    if after > before + SLACK:
        return f"dims=({da},{db},{n}) d_R={dr}", after - before
    return None


def _corollary_bounds(rng, dims, tol):
    da, _, n = _dims(rng, dims)
    dr = _pick(rng, dims["dims"])
    p = random_povm(da, n, rng)
    z = random_povm(dr, n, rng)
    value = monotones.tuning_degree(p, z, check_bounds=False, tol=tol).value
    lower = monotones.trivial_tuning_degree(z)
    upper = monotones.optimal_guessing(z, tol).value
    worst = max(lower - SLACK - value, value - upper - SLACK)
    if worst > 0:
        return f"dims=({da},{n}) d_R={dr}", worst
    return None


def _pgm_sandwich(rng, dims, tol):
    d, _, n = _dims(rng, dims)
    p = random_povm(d, n, rng)
    auto = monotones.autotuning(p)
    corr = monotones.uniform_correlation(p, p)
    worst = max(corr - auto, 2 * auto - 1 - corr)
    if worst > SLACK:
        return f"dim={d} outcomes={n}", worst
    return None


def _sharp_construction(rng, dims, tol):
    da = _pick(rng, dims["dims"])
    db = _pick(rng, dims["dims"])
    n = min(_pick(rng, dims["outcomes"]), da)
    p = random_sharp_povm(da, n, rng)
    if n > 1 and rng.uniform() < 0.3:
        # a target with a zero element
        rest = random_povm(db, n - 1, rng).elements
        k = int(rng.integers(n))
        q = Povm(np.insert(rest, k, np.zeros((db, db)), axis=0))
    else:
        q = random_povm(db, n, rng)
    v = ch.sharp_isometry(p, q)
    iso = float(np.max(np.abs(v.conj().T @ v - np.eye(db))))
    mapped = ch.apply(ch.preprocess_from_sharp(p, q), p.elements)
    err = float(np.max(np.abs(mapped - q.elements)))
    if iso > 1e-10 or err > 1e-9:
        return f"dims=({da},{db},{n})", max(iso, err)
    return None


def _lpsr_roundtrip(rng, dims, tol):
    da, db, n = _dims(rng, dims)
    saturate = rng.uniform() < 0.3
    op = ch.random_lpsr(da, db, n, rng, randomness=int(rng.integers(1, 4)), saturate=saturate)
    p = random_povm(da, n, rng)
    slot0 = ch.apply_lpsr(op, extend_to_programmable(p)).base
    via = ch.fuzzify_elements(ch.lpsr_to_fuzzifying(op), p.elements)
    err = float(np.max(np.abs(slot0.elements - via)))
    if err > 1e-9:
        return f"dims=({da},{db},{n}) saturate={saturate}", err
    return None


def _robustness(rng, dims, tol):
    d, _, n = _dims(rng, dims)
    p = random_povm(d, n, rng)
    sdp_value = monotones.measurement_robustness_sdp(p, tol)
    closed = monotones.measurement_robustness_closed_form(p)
    f = ch.random_fuzzifying(d, _pick(rng, dims["dims"]), n, rng)
    after = monotones.measurement_robustness_closed_form(f(p))
    rep = monotones.tunability_robustness(p, refs=1, seed=rng, seesaw=1, tol=tol)
    worst = max(abs(sdp_value - closed), after - closed, rep.lower - rep.upper, rep.upper - closed)
    if worst > SLACK:
        return f"dim={d} outcomes={n}", worst
    return None


def _endpoints(rng, dims, tol):
    d = _pick(rng, dims["dims"])
    if rng.uniform() < 0.5:
        p = random_trivial_povm(d, _pick(rng, dims["outcomes"]), rng)
        target = 0.0
    else:
        u = linalg.random_unitary(d, rng)
        p = Povm(np.einsum("ij,xjk,lk->xil", u, computational_basis(d).elements, u.conj()))
        target = d - 1.0
    rep = monotones.tunability_robustness(p, refs=1, seed=rng, tol=tol)
    worst = max(abs(rep.lower - target), abs(rep.upper - target))
    if worst > 1e-6:
        return f"dim={d} target={target}", worst
    return None


SUITES = {
    "blackwell": _blackwell,
    "monotone": _monotone,
    "corollary_bounds": _corollary_bounds,
    "pgm_sandwich": _pgm_sandwich,
    "sharp_construction": _sharp_construction,
    "lpsr_roundtrip": _lpsr_roundtrip,
    "robustness": _robustness,
    "endpoints": _endpoints,
}
ALIASES = {"theorem1_construction": "sharp_construction"}
SUITE_NAMES = tuple(SUITES) + tuple(ALIASES)

DEFAULT_DIMS = {"dims": (2, 3), "outcomes": (2, 3)}


def run_suite(name: str, trials: int = 100, seed: int = 0, dims: dict | None = None,
              tol: Tolerances = DEFAULT) -> SuiteReport:
    """Run ``trials`` instances of suite ``name``.

    Solver failures propagate as :class:`~sharpkit.linalg.SolverFailure`
    with the trial seed added to the message.
    """
    key = ALIASES.get(name, name)
    if key not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    dims = DEFAULT_DIMS if dims is None else {**DEFAULT_DIMS, **dims}
    check = SUITES[key]
    report = SuiteReport(name, trials, tolerances=dataclasses.asdict(tol))
    start = time.perf_counter()
    for trial in range(trials):
        try:
            outcome = check(trial_rng(seed, trial), dims, tol)
        except linalg.SolverFailure as exc:
            raise linalg.SolverFailure(f"suite {name}, seed ({seed}, {trial}): {exc}") from exc
        if outcome is not None:
            report.failures.append(((seed, trial),) + tuple(outcome))
    report.runtime = time.perf_counter() - start
    return report
