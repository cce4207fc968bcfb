"""Decision procedures for the preprocessing, postprocessing and sharpness preorders.

Every verdict is checked after the solver returns: a positive answer carries
a transformation whose application is compared with the target, and a
negative answer for the sharpness preorder carries a reference POVM whose
tuning-degree gap is re-computed before it is handed out.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import channel as ch
from . import linalg, monotones, sdp
from .config import DEFAULT, Tolerances
from .povm import Povm, random_povm, validate

CONVERTIBLE = "convertible"
NOT_CONVERTIBLE = "not_convertible"
UNDECIDED = "undecided"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"

FULL_RANK = 1e-6  # min eigenvalue of a witness element relative to Tr Z^x / d


@dataclasses.dataclass(frozen=True)
class WitnessCertificate:
    """Reference Z with kappa*_u(P || Z) + margin = kappa_u(Q : Z)."""

    reference: Povm
    margin: float
    lhs: float             # upper bound on kappa*_u(P || Z) (primal value + gap)
    rhs: float             # kappa_u(Q : Z)
    beta: float
    violation: float       # phase-1 optimum the witness was built from


@dataclasses.dataclass(frozen=True)
class ConvertibilityVerdict:
    status: str
    transformation: ch.FuzzifyingOperation | None = None
    witness: WitnessCertificate | None = None
    residual: float = float("nan")
    violation: float = float("nan")

    @property
    def convertible(self) -> bool:
        return self.status == CONVERTIBLE


@dataclasses.dataclass(frozen=True)
class CleanerVerdict:
    """Outcome of the pre- and postprocessing tests.

    ``transformation`` is a unital CP map (preprocessing) or a column
    stochastic matrix ``mu[y, x]`` (postprocessing).
    """

    status: str
    transformation: object = None
    residual: float = float("nan")
    violation: float = float("nan")

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def _residual(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def _same_outcomes(p: Povm, q: Povm):
    if p.outcomes != q.outcomes:
        raise ValueError(f"outcome counts differ: {p.outcomes} vs {q.outcomes}")


# preprocessing ----------------------------------------------------------------

def is_preprocessing_cleaner(p: Povm, q: Povm, tol: Tolerances = DEFAULT) -> CleanerVerdict:
    """Is there a unital CP map E^dag with E^dag(P^x) = Q^x for all x?"""
    _same_outcomes(p, q)
    da, db = p.dim, q.dim
    prob = sdp.SdpProblem()
    J = prob.hermitian("J", da * db)
    names = []
    for x, (px, qx) in enumerate(zip(p, q)):
        kernel = np.kron(px.T, np.eye(db))
        expr = J.map(lambda s, k=kernel: linalg.partial_trace(k @ s, (da, db), "B"), db)
        prob.add_eq(f"match{x}", expr, qx)
        names.append(f"match{x}")
    res = sdp.feasibility(prob, names, tol)
    if res.status == sdp.INFEASIBLE:
        return CleanerVerdict(INFEASIBLE, violation=res.violation)
    # a sub-threshold slack still needs a map that passes verification
    chan = ch.unitalize(res.point["J"], da, db)
    residual = _residual(ch.apply(chan, p.elements), q.elements)
    if residual <= tol.convert_residual:
        return CleanerVerdict(FEASIBLE, chan, residual, res.violation)
    return CleanerVerdict(UNDECIDED, None, residual, res.violation)


# postprocessing ---------------------------------------------------------------

def is_postprocessing_cleaner(p: Povm, q: Povm, tol: Tolerances = DEFAULT) -> CleanerVerdict:
    """Is there a classical channel mu(y|x) with Q^y = sum_x mu(y|x) P^x?"""
    if p.dim != q.dim:
        raise ValueError(f"dimensions differ: {p.dim} vs {q.dim}")
    n, m = p.outcomes, q.outcomes
    prob = sdp.SdpProblem()
    mu = [[prob.scalar(f"mu{y}_{x}", nonneg=True) for x in range(n)] for y in range(m)]
    for x in range(n):
        prob.add_eq(f"column{x}", sum((mu[y][x] for y in range(1, m)), mu[0][x]), 1.0)
    names = []
    for y in range(m):
        expr = sum((mu[y][x] * p[x] for x in range(1, n)), mu[y][0] * p[0])
        prob.add_eq(f"outcome{y}", expr, q[y])
        names.append(f"outcome{y}")
    res = sdp.feasibility(prob, names, tol)
    if res.status == sdp.INFEASIBLE:
        return CleanerVerdict(INFEASIBLE, violation=res.violation)
    cond = np.array([[res.point[f"mu{y}_{x}"] for x in range(n)] for y in range(m)])
    cond = np.clip(cond, 0, None)
    cond = cond / cond.sum(axis=0, keepdims=True)
    residual = _residual(np.einsum("yx,xij->yij", cond, p.elements), q.elements)
    if residual <= tol.convert_residual:
        return CleanerVerdict(FEASIBLE, cond, residual, res.violation)
    return CleanerVerdict(UNDECIDED, None, residual, res.violation)


# sharpness preorder -------------------------------------------------------------

def sharper_problem(p: Povm, q: Povm) -> sdp.SdpProblem:
    """Constraints of Q^x = Tr_A[(P^x)^T (x) I) J] + w_x I with Tr_A J = mu I, mu + sum w = 1."""
    _same_outcomes(p, q)
    da, db, n = p.dim, q.dim, p.outcomes
    prob = sdp.SdpProblem()
    J = prob.hermitian("J", da * db)
    mu = prob.scalar("mu")
    w = [prob.scalar(f"w{x}", nonneg=True) for x in range(n)]
    prob.add_eq("unital", J.map(lambda s: linalg.partial_trace(s, (da, db), "B"), db) - mu * np.eye(db),
                np.zeros((db, db)))
    prob.add_eq("normalization", mu + sum(w[1:], w[0]), 1.0)
    for x, (px, qx) in enumerate(zip(p, q)):
        kernel = np.kron(px.T, np.eye(db))
        expr = J.map(lambda s, k=kernel: linalg.partial_trace(k @ s, (da, db), "B"), db) + w[x] * np.eye(db)
        prob.add_eq(f"match{x}", expr, qx)
    return prob


def is_sharper(p: Povm, q: Povm, tol: Tolerances = DEFAULT) -> ConvertibilityVerdict:
    """Decide whether some fuzzifying operation maps ``p`` to ``q``.

    Solves the proximity problem (smallest uniform slack on the matching
    constraints). Small slack: decode the operation and accept it only if
    applying it reproduces ``q`` to ``tol.convert_residual``. Slack at or
    above ``tol.margin``: build and verify a witness reference. Anything
    else is ``undecided``.
    """
    prob = sharper_problem(p, q)
    names = [f"match{x}" for x in range(p.outcomes)]
    res = sdp.feasibility(prob, names, tol)
    if res.status == sdp.INFEASIBLE:
        cert = extract_witness(p, q, res, tol)
        return ConvertibilityVerdict(NOT_CONVERTIBLE, witness=cert, violation=res.violation)
    pt = res.point
    op = monotones.decode_fuzzifying(pt["J"], pt["mu"], [pt[f"w{x}"] for x in range(p.outcomes)], p.dim, q.dim)
    residual = _residual(ch.fuzzify_elements(op, p.elements), q.elements)
    if residual <= tol.convert_residual:
        return ConvertibilityVerdict(CONVERTIBLE, transformation=op, residual=residual, violation=res.violation)
    return ConvertibilityVerdict(UNDECIDED, residual=residual, violation=res.violation)


def witness_beta(gammas: np.ndarray, floor: float = FULL_RANK) -> float:
    """Smallest beta with lambda_min(Z^x) >= floor * Tr Z^x / d for every x.

    With Z^x = I/N + G^x / beta this is linear in 1/beta, so the bound is
    explicit: beta >= N (floor Tr G^x / d - lambda_min G^x) / (1 - floor).
    """
    n, d = gammas.shape[0], gammas.shape[1]
    need = [n * (floor * np.trace(g).real / d - linalg.min_eigenvalue(g)) / (1 - floor) for g in gammas]
    scale = max(float(np.max(np.abs(gammas))), 1e-300)
    # tiny relative push so rounding cannot land exactly on the floor
    return max(max(need) * (1 + 1e-9), 1e-12 * scale)


def extract_witness(p: Povm, q: Povm, infeasibility: sdp.FeasibilityResult,
                    tol: Tolerances = DEFAULT) -> WitnessCertificate:
    """Full-rank reference Z separating ``q`` from every fuzzification of ``p``.

    Uses the multipliers M^x of the proximity problem: for every
    fuzzification E of ``p``, sum_x Tr[M^x (Q^x - E^x)] >= s*. Centering and
    rescaling, Z^x = I/N + (M^x - sum_y M^y / N) / beta, turns this into
    kappa_u(Q : Z) - kappa*_u(P || Z) = s* / (beta d_B).
    """
    if infeasibility.violation < tol.margin or not infeasibility.multipliers:
        raise ValueError(f"no separation to extract (violation {infeasibility.violation:.3g})")
    n, db = q.outcomes, q.dim
    gammas = np.array([infeasibility.multipliers[f"match{x}"] for x in range(n)])
    gammas = gammas - gammas.mean(axis=0)
    beta = witness_beta(gammas)
    elements = np.eye(db) / n + gammas / beta
    try:
        z = validate(elements, tol=1e-9)
    except ValueError as exc:
        raise linalg.SolverFailure(f"witness is not a POVM: {exc}") from exc
    for x, zx in enumerate(z):
        if linalg.min_eigenvalue(zx) < 0.99 * FULL_RANK * np.trace(zx).real / db:
            raise linalg.SolverFailure(f"witness element {x} is not full rank")
    rep = monotones.tuning_degree(p, z, check_bounds=False, tol=tol)
    lhs = rep.value + rep.gap
    rhs = monotones.uniform_correlation(q, z)
    margin = rhs - lhs
    if margin < tol.witness_margin:
        raise linalg.SolverFailure(
            f"witness failed verification: margin {margin:.3g} < {tol.witness_margin:.3g}")
    return WitnessCertificate(z, margin, lhs, rhs, beta, infeasibility.violation)


def verify_witness(p: Povm, q: Povm, z: Povm, tol: Tolerances = DEFAULT) -> float:
    """Independent recomputation of kappa_u(Q : Z) - kappa*_u(P || Z)."""
    rep = monotones.tuning_degree(p, z, check_bounds=False, tol=tol)
    return monotones.uniform_correlation(q, z) - (rep.value + rep.gap)


# tunability comparison ----------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class TunabilityEvidence:
    """One-sided evidence: a counterexample refutes, its absence proves nothing."""

    violation_found: bool
    counterexample: Povm | None
    trials: int
    worst_gap: float   # max over tested Z of kappa_u(Q : Z) - kappa*_u(P || Z)


def always_more_tunable(p: Povm, q: Povm, trials: int = 20, seed=0, references=None,
                        tol: Tolerances = DEFAULT) -> TunabilityEvidence:
    """Test kappa*_u(P || Z) >= kappa_u(Q : Z) - 1e-7 on sampled full-rank references.

    ``references`` replaces the random sample when given. The exact decision
    is :func:`is_sharper`; this only searches for a counterexample.
    """
    _same_outcomes(p, q)
    if references is None:
        rng = linalg.rng_from(seed)
        references = (random_povm(q.dim, q.outcomes, rng) for _ in range(trials))
    worst, checked = -np.inf, 0
    for z in references:
        checked += 1
        gap = monotones.uniform_correlation(q, z) - monotones.tuning_degree(p, z, check_bounds=False, tol=tol).value
        worst = max(worst, gap)
        if gap > monotones.BOUND_SLACK:
            return TunabilityEvidence(True, z, checked, worst)
    return TunabilityEvidence(False, None, checked, worst)
