"""Correlation-based sharpness measures.

All quantities are computed on the maximally mixed state of the reference
system unless a state is given explicitly. Tuning degrees and guessing
probabilities are SDP values certified by a duality gap; the tunability
robustness is reported as an interval because only its upper bound has a
closed form.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import channel as ch
from . import linalg, sdp
from .config import DEFAULT, Tolerances
from .povm import Povm, computational_basis, random_povm, validate

BOUND_SLACK = 1e-7


def _check_same(p: Povm, z: Povm, same_dim: bool = True):
    if p.outcomes != z.outcomes:
        raise ValueError(f"outcome counts differ: {p.outcomes} vs {z.outcomes}")
    if same_dim and p.dim != z.dim:
        raise ValueError(f"dimensions differ: {p.dim} vs {z.dim}")


def degree_of_correlation(p: Povm, z: Povm, rho, tol: float = 1e-9) -> float | None:
    """sum_x Tr[P^x Z^x rho], or None when P and Z are not jointly distributed in rho."""
    _check_same(p, z)
    rho = linalg.hermitian(rho)
    joint = np.einsum("xij,yjk,ki->xy", p.elements, z.elements, rho)
    if np.max(np.abs(joint.imag)) > tol or np.min(joint.real) < -tol:
        return None
    return float(np.trace(joint).real)


def uniform_correlation(p: Povm, z: Povm, cross_check: bool = True) -> float:
    """(1/d) sum_x Tr[P^x Z^x].

    With ``cross_check`` the value is recomputed as
    sum_x <Phi+| (P^x)^T (x) Z^x |Phi+> and the two must agree to 1e-10.
    """
    _check_same(p, z)
    value = float(np.einsum("xij,xji->", p.elements, z.elements).real) / p.dim
    if cross_check:
        phi = linalg.maximally_entangled(p.dim)
        other = sum(np.trace(np.kron(a.T, b) @ phi).real for a, b in zip(p, z))
        if abs(other - value) > 1e-10:
            raise linalg.SolverFailure(f"entangled-state form disagrees: {value} vs {other}")
    return value


def trivial_tuning_degree(z: Povm) -> float:
    """Tuning degree of any trivial POVM: (1/d_R) max_x Tr[Z^x]."""
    return float(np.max(np.einsum("xii->x", z.elements).real)) / z.dim


# guessing probability -------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class GuessingReport:
    value: float
    measurement: Povm
    certificate: np.ndarray     # Y with Y >= Z^x for all x; value = Tr[Y] / d
    dual_value: float
    gap: float


def optimal_guessing(z: Povm, tol: Tolerances = DEFAULT) -> GuessingReport:
    """max over POVMs Zt of (1/d) sum_x Tr[Zt^x Z^x], with an independent dual solve."""
    d = z.dim
    primal = sdp.SdpProblem()
    guesses = [primal.hermitian(f"Z{x}", d) for x in range(z.outcomes)]
    primal.add_eq("completeness", sum(guesses[1:], guesses[0]), np.eye(d))
    primal.maximize(sum((g.trace(zx) for g, zx in zip(guesses, z)), sdp.Expr.constant(0.0)) / d)
    ps = sdp.solve(primal, tol)
    if ps.status != sdp.OPTIMAL:
        raise linalg.SolverFailure(f"guessing primal: {ps.message or ps.status}")

    dual = sdp.SdpProblem()
    y = dual.hermitian("Y", d, psd=False)
    for x, zx in enumerate(z):
        dual.add_psd(f"dominates{x}", y - zx)
    dual.minimize(y.trace() / d)
    ds = sdp.solve(dual, tol)
    if ds.status != sdp.OPTIMAL:
        raise linalg.SolverFailure(f"guessing dual: {ds.message or ds.status}")

    gap = abs(ds.objective - ps.objective)
    if gap > tol.gap * (1 + abs(ps.objective)):
        raise linalg.SolverFailure(f"guessing primal/dual disagree by {gap:.3g}")
    measurement = validate(
        np.array([ps[f"Z{x}"] for x in range(z.outcomes)])
        + (np.eye(d) - sum(ps[f"Z{x}"] for x in range(z.outcomes))) / z.outcomes,
        tol=1e-7,
    )
    return GuessingReport(ps.objective, measurement, ds["Y"], ds.objective, gap)


# tuning degree --------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class TuningReport:
    value: float
    optimizer: ch.FuzzifyingOperation
    reference: Povm
    gap: float
    lower: float = float("nan")
    upper: float = float("nan")

    def __post_init__(self):
        if not np.isnan(self.lower) and self.value < self.lower - BOUND_SLACK:
            raise linalg.SolverFailure(f"tuning degree {self.value} below trivial bound {self.lower}")
        if not np.isnan(self.upper) and self.value > self.upper + BOUND_SLACK:
            raise linalg.SolverFailure(f"tuning degree {self.value} above guessing bound {self.upper}")


def tuning_problem(p: Povm, z: Povm) -> sdp.SdpProblem:
    """SDP over (J, mu, w): J Choi of mu E^dag on A (x) R, w_x = (1 - mu) p(x)."""
    _check_same(p, z, same_dim=False)
    da, dr, n = p.dim, z.dim, p.outcomes
    prob = sdp.SdpProblem()
    J = prob.hermitian("J", da * dr)
    mu = prob.scalar("mu")
    w = [prob.scalar(f"w{x}", nonneg=True) for x in range(n)]
    prob.add_eq("unital", J.map(lambda s: linalg.partial_trace(s, (da, dr), "B"), dr) - mu * np.eye(dr), np.zeros((dr, dr)))
    prob.add_eq("normalization", mu + sum(w[1:], w[0]), 1.0)
    payoff = J.trace(sum(np.kron(px.T, zx) for px, zx in zip(p, z)))
    trz = np.einsum("xii->x", z.elements).real
    for wx, t in zip(w, trz):
        payoff = payoff + wx * float(t)
    prob.maximize(payoff / dr)
    return prob


def decode_fuzzifying(J, mu: float, w, in_dim: int, out_dim: int) -> ch.FuzzifyingOperation:
    """Turn (J, mu, w) solver output into a valid fuzzifying operation."""
    n = len(w)
    mu = min(max(mu, 0.0), 1.0)
    if mu > 1e-9:
        channel = ch.unitalize(np.asarray(J) / mu, in_dim, out_dim)
    else:
        channel = ch.discard_dual(in_dim, out_dim)
    w = np.clip(np.asarray(w, dtype=float), 0, None)
    if 1 - mu > 1e-9 and w.sum() > 0:
        dist = w / w.sum()
    else:
        dist = np.full(n, 1 / n)
    return ch.FuzzifyingOperation(channel, mu, dist)


def tuning_degree(p: Povm, z: Povm, check_bounds: bool = True, tol: Tolerances = DEFAULT) -> TuningReport:
    """Largest uniform correlation between a fuzzification of ``p`` and ``z``."""
    prob = tuning_problem(p, z)
    sol = sdp.solve(prob, tol)
    if sol.status != sdp.OPTIMAL:
        raise linalg.SolverFailure(f"tuning degree: {sol.message or sol.status}")
    op = decode_fuzzifying(sol["J"], sol["mu"], [sol[f"w{x}"] for x in range(p.outcomes)], p.dim, z.dim)
    lower = upper = float("nan")
    if check_bounds:
        lower = trivial_tuning_degree(z)
        upper = optimal_guessing(z, tol).value
    return TuningReport(sol.objective, op, z, sol.gap, lower, upper)


def autotuning(p: Povm) -> float:
    return tuning_degree(p, p).value


# robustness -----------------------------------------------------------------

def measurement_robustness_sdp(p: Povm, tol: Tolerances = DEFAULT) -> float:
    """min sum_x s_x - 1 subject to s_x I >= P^x."""
    prob = sdp.SdpProblem()
    s = [prob.scalar(f"s{x}") for x in range(p.outcomes)]
    for x, (sx, px) in enumerate(zip(s, p)):
        prob.add_psd(f"dominates{x}", sx * np.eye(p.dim) - px)
    prob.minimize(sum(s[1:], s[0]) - 1.0)
    sol = sdp.solve(prob, tol)
    if sol.status != sdp.OPTIMAL:
        raise linalg.SolverFailure(f"measurement robustness: {sol.message or sol.status}")
    return sol.objective


def measurement_robustness_closed_form(p: Povm) -> float:
    return float(sum(linalg.max_eigenvalue(m) for m in p) - 1)


def measurement_robustness(p: Povm, tol: Tolerances = DEFAULT) -> float:
    """Robustness against trivial POVMs; SDP and sum of top eigenvalues must agree to 1e-7."""
    closed = measurement_robustness_closed_form(p)
    value = measurement_robustness_sdp(p, tol)
    if abs(value - closed) > 1e-7:
        raise linalg.SolverFailure(f"robustness SDP {value} disagrees with closed form {closed}")
    return value


@dataclasses.dataclass(frozen=True)
class RobustnessReport:
    lower: float
    upper: float
    methods: dict
    reference: Povm | None = None

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"invalid robustness interval [{self.lower}, {self.upper}]")

    @property
    def exact(self) -> bool:
        return self.upper - self.lower <= 1e-6


def tuning_ratio(p: Povm, z: Povm, tol: Tolerances = DEFAULT) -> tuple[float, TuningReport]:
    """Tuning advantage of ``p`` over every trivial POVM for reference ``z``."""
    rep = tuning_degree(p, z, check_bounds=False, tol=tol)
    return rep.value / trivial_tuning_degree(z), rep


def eigen_reference(p: Povm) -> Povm:
    """Reference on A built from the top eigenvectors of the elements of ``p``.

    G_x = |v_x><v_x|, normalized as S^{+1/2} G_x S^{+1/2} on the support of
    S = sum_x G_x, with the complement shared evenly among outcomes.
    """
    tops = [linalg.projector(linalg.eig_hermitian(m)[1][:, -1]) for m in p]
    s = np.sum(tops, axis=0)
    w, v = linalg.eig_hermitian(s)
    keep = w > 1e-9
    inv = (v[:, keep] / np.sqrt(w[keep])) @ v[:, keep].conj().T
    comp = v[:, ~keep] @ v[:, ~keep].conj().T
    return validate([inv @ g @ inv + comp / p.outcomes for g in tops], tol=1e-8)


def best_reference_for(outputs: np.ndarray, tol: Tolerances = DEFAULT, rounds: int = 20) -> Povm:
    """Reference Z maximizing sum_x Tr[M^x Z^x] / max_x Tr[Z^x] for fixed M (Dinkelbach)."""
    n, d = outputs.shape[0], outputs.shape[1]
    lam, best = 0.0, None
    for _ in range(rounds):
        prob = sdp.SdpProblem()
        zs = [prob.hermitian(f"Z{x}", d) for x in range(n)]
        t = prob.scalar("t")
        prob.add_eq("completeness", sum(zs[1:], zs[0]), np.eye(d))
        for x, zx in enumerate(zs):
            prob.add_psd(f"cap{x}", t - zx.trace())
        prob.maximize(sum((zx.trace(m) for zx, m in zip(zs, outputs)), sdp.Expr.constant(0.0)) - lam * t)
        sol = sdp.solve(prob, tol)
        if sol.status != sdp.OPTIMAL:
            break
        elems = np.array([sol[f"Z{x}"] for x in range(n)])
        elems = elems + (np.eye(d) - elems.sum(axis=0)) / n
        cand = validate(elems, tol=1e-7)
        num = float(np.einsum("xij,xji->", outputs, cand.elements).real)
        ratio = num / float(np.max(np.einsum("xii->x", cand.elements).real))
        if best is not None and ratio <= lam + 1e-12:
            break
        best, lam = cand, ratio
    return best


def tunability_robustness(p: Povm, refs: int = 4, seed=0, seesaw: int = 2,
                          tol: Tolerances = DEFAULT) -> RobustnessReport:
    """Certified interval for the tunability robustness of ``p``.

    Upper bound: min(measurement robustness, N - 1). Lower bound: best
    tuning advantage over trivial POVMs among a candidate family of
    references (canonical basis on an N-dimensional reference, references
    built from ``p`` itself, ``refs`` random full-rank references for each
    reference dimension in {N, d_A}), refined by ``seesaw`` rounds that
    alternate the optimal fuzzifying operation and the optimal reference.
    """
    n = p.outcomes
    upper_val = measurement_robustness(p, tol)
    upper = max(min(upper_val, n - 1), 0.0)  # rounding can dip below zero for trivial p
    upper_note = "measurement robustness (sum of top eigenvalues - 1)" if upper_val <= n - 1 else "outcome count - 1"

    rng = linalg.rng_from(seed)
    candidates = [("canonical basis", computational_basis(n)), ("self", p), ("eigenvectors", eigen_reference(p))]
    for dim in sorted({n, p.dim}):
        for k in range(refs):
            candidates.append((f"random d_R={dim} #{k}", random_povm(dim, n, rng)))

    best_ratio, best_name, best_z, best_rep = -np.inf, None, None, None
    for name, z in candidates:
        ratio, rep = tuning_ratio(p, z, tol)
        if ratio > best_ratio:
            best_ratio, best_name, best_z, best_rep = ratio, name, z, rep

    for _ in range(seesaw):
        if upper - (best_ratio - 1) <= 1e-9:
            break
        outputs = ch.fuzzify_elements(best_rep.optimizer, p.elements)
        z = best_reference_for(outputs, tol)
        if z is None:
            break
        ratio, rep = tuning_ratio(p, z, tol)
        if ratio <= best_ratio + 1e-10:
            break
        best_ratio, best_name, best_z, best_rep = ratio, "see-saw refinement", z, rep

    lower = best_ratio - 1
    if lower > upper + 1e-7:
        raise linalg.SolverFailure(f"lower bound {lower} exceeds upper bound {upper}")
    lower = min(max(lower, 0.0), upper)
    methods = {"upper": upper_note, "lower": f"tuning advantage, best reference: {best_name}"}
    return RobustnessReport(lower, upper, methods, best_z)
