"""Dense semidefinite programming over complex Hermitian variables.

Problems are written with a small expression layer::

    prob = SdpProblem()
    X = prob.hermitian("X", 3)             # X >= 0
    prob.add_eq("trace", X.trace(), 1.0)
    prob.maximize((X @ sigma_z).trace())   # Tr[sigma_z X]
    sol = solve(prob)

Every expression is affine in a real parameter vector: a Hermitian m x m
variable contributes m^2 coordinates in the orthonormal basis of
:func:`sharpkit.linalg.hermitian_basis`, a scalar contributes one. Conic
constraints on Hermitian blocks go through the real embedding
``H -> [[Re H, -Im H], [Im H, Re H]]`` into cvxopt's symmetric cone, so the
complex values returned are Hermitian by construction.

Dual conventions (maximization form)::

    max  <f, x> + f0
    s.t. E_k(x) = C_k          multiplier  Gamma_k  (Hermitian, free)
         F_j(x) >= 0           multiplier  W_j      (Hermitian, PSD)

    dual value = sum_k Tr[Gamma_k (C_k - E_k(0))] + sum_j Tr[W_j F_j(0)] + f0

so ``f = sum_k E_k^T(Gamma_k) - sum_j L_j^T(W_j)`` at a dual solution, where
``L_j`` is the linear part of ``F_j``.
"""

from __future__ import annotations

import dataclasses
import numbers

import cvxopt
import numpy as np

from . import linalg
from .config import DEFAULT, Tolerances

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
SOLVER_FAILURE = "solver_failure"
FEASIBLE = "feasible"
UNDECIDED = "undecided"


class Expr:
    """Affine Hermitian-matrix-valued expression (1 x 1 for scalars)."""

    __array_priority__ = 100  # keep numpy from broadcasting over us

    def __init__(self, dim: int, coeffs: dict, const=None):
        self.dim = dim
        self.coeffs = coeffs  # var name -> complex array (nvars, dim, dim)
        self.const = np.zeros((dim, dim), complex) if const is None else np.asarray(const, complex)

    @property
    def is_scalar(self) -> bool:
        return self.dim == 1

    @staticmethod
    def constant(value) -> "Expr":
        value = _as_matrix(value)
        return Expr(value.shape[0], {}, value)

    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            return other
        return Expr.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
        coeffs = dict(self.coeffs)
        for name, c in other.coeffs.items():
            coeffs[name] = coeffs[name] + c if name in coeffs else c
        return Expr(self.dim, coeffs, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, numbers.Real):
            return Expr(self.dim, {k: v * other for k, v in self.coeffs.items()}, self.const * other)
        m = np.asarray(other)
        if m.ndim == 2 and self.is_scalar:
            m = linalg.hermitian(m)
            return Expr(
                m.shape[0],
                {k: v[:, 0, 0, None, None] * m for k, v in self.coeffs.items()},
                self.const[0, 0] * m,
            )
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other: float):
        return self * (1.0 / other)

    def map(self, fn, out_dim: int) -> "Expr":
        """Apply a linear, Hermiticity-preserving map ``fn`` to the expression.

        ``fn`` must accept a stack of matrices (leading axes preserved).
        """
        coeffs = {k: np.asarray(fn(v)).reshape(-1, out_dim, out_dim) for k, v in self.coeffs.items()}
        const = np.asarray(fn(self.const[None]))[0]
        return Expr(out_dim, coeffs, const)

    def trace(self, weight=None) -> "Expr":
        """Scalar expression Tr[weight X] (weight defaults to the identity)."""
        if weight is None:
            return self.map(lambda s: np.trace(s, axis1=-2, axis2=-1)[..., None, None], 1)
        w = linalg.hermitian(weight)
        return self.map(lambda s: np.einsum("ij,...ji->...", w, s)[..., None, None], 1)

    def value(self, values: dict) -> np.ndarray | float:
        out = self.const.copy()
        for name, c in self.coeffs.items():
            out = out + np.einsum("k,kij->ij", values[name], c)
        return float(out[0, 0].real) if self.is_scalar else out


def _as_matrix(value) -> np.ndarray:
    if isinstance(value, numbers.Number):
        return np.array([[value]], dtype=complex)
    m = np.asarray(value, dtype=complex)
    if m.ndim == 0:
        return m.reshape(1, 1)
    return m


@dataclasses.dataclass
class Variable:
    name: str
    dim: int
    cone: str   # "psd" (Hermitian >= 0), "hermitian" (free), "nonneg", "free"
    offset: int

    @property
    def size(self) -> int:
        return self.dim * self.dim

    @property
    def is_scalar(self) -> bool:
        return self.cone in ("nonneg", "free")

    def expr(self) -> Expr:
        if self.is_scalar:
            return Expr(1, {self.name: np.ones((1, 1, 1), complex)})
        return Expr(self.dim, {self.name: np.asarray(linalg.hermitian_basis(self.dim))})


class SdpProblem:
    """Container for variables, constraints and a (maximized) linear objective."""

    def __init__(self):
        self.variables: dict[str, Variable] = {}
        self.equalities: list[tuple[str, Expr, np.ndarray]] = []
        self.lmis: list[tuple[str, Expr]] = []
        self.objective: Expr = Expr(1, {})
        self.sense = 1.0
        self._n = 0

    def _add_var(self, name, dim, cone) -> Expr:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name!r}")
        var = Variable(name, dim, cone, self._n)
        self.variables[name] = var
        self._n += var.size
        return var.expr()

    def hermitian(self, name: str, dim: int, psd: bool = True) -> Expr:
        return self._add_var(name, dim, "psd" if psd else "hermitian")

    def scalar(self, name: str, nonneg: bool = False) -> Expr:
        return self._add_var(name, 1, "nonneg" if nonneg else "free")

    def add_eq(self, name: str, expr: Expr, rhs) -> None:
        rhs = _as_matrix(rhs)
        if rhs.shape != (expr.dim, expr.dim):
            raise ValueError(f"constraint {name!r}: rhs shape {rhs.shape} vs expression dim {expr.dim}")
        self.equalities.append((name, expr, linalg.hermitian(rhs)))

    def add_psd(self, name: str, expr: Expr) -> None:
        """Linear matrix inequality ``expr >= 0``."""
        self.lmis.append((name, expr))

    def maximize(self, expr: Expr) -> None:
        self._set_objective(expr, 1.0)

    def minimize(self, expr: Expr) -> None:
        self._set_objective(expr, -1.0)

    def _set_objective(self, expr, sense):
        if not expr.is_scalar:
            raise ValueError("objective must be scalar")
        self.objective = expr * sense
        self.sense = sense

    @property
    def num_params(self) -> int:
        return self._n

    # lowering -------------------------------------------------------------

    def _dense(self, expr: Expr, row_fn) -> np.ndarray:
        """Matrix with one column per real parameter, rows from ``row_fn``."""
        rows = row_fn(expr.const).size
        out = np.zeros((rows, self._n))
        for name, c in expr.coeffs.items():
            var = self.variables[name]
            out[:, var.offset:var.offset + var.size] = row_fn(c).reshape(var.size, rows).T
        return out

    def all_lmis(self) -> list[tuple[str, Expr]]:
        cones = [(f"{v.name}>=0", v.expr()) for v in self.variables.values() if v.cone in ("psd", "nonneg")]
        return cones + self.lmis


@dataclasses.dataclass
class SdpSolution:
    status: str
    values: dict = dataclasses.field(default_factory=dict)      # variable name -> value
    duals: dict = dataclasses.field(default_factory=dict)       # equality name -> Gamma
    lmi_duals: dict = dataclasses.field(default_factory=dict)   # LMI name -> W (PSD)
    objective: float = float("nan")
    dual_objective: float = float("nan")
    gap: float = float("nan")
    residual: float = float("nan")
    iterations: int = 0
    message: str = ""

    def __getitem__(self, name):
        return self.values[name]


def _embed_vec(m: np.ndarray) -> np.ndarray:
    e = linalg.real_embedding(m)
    return e.reshape(e.shape[:-2] + (-1,))


def _scalar_vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).real.reshape(np.shape(m)[:-2] + (1,))


def _coords_vec(m: np.ndarray) -> np.ndarray:
    return linalg.to_coords(m)


def solve(problem: SdpProblem, tol: Tolerances = DEFAULT) -> SdpSolution:
    """Solve ``problem`` to the duality-gap and residual contract in ``tol``.

    Never returns ``optimal`` unless the recomputed gap and primal residuals
    meet the tolerances; otherwise the status is ``solver_failure`` (or
    ``infeasible`` when cvxopt reports a primal infeasibility certificate).
    """
    n = problem.num_params
    if n == 0:
        raise ValueError("problem has no variables")

    lmis = problem.all_lmis()
    l_rows, s_blocks = [], []
    for name, e in lmis:
        (l_rows if e.is_scalar else s_blocks).append((name, e))

    g_parts, h_parts = [], []
    for _, e in l_rows:
        g_parts.append(-problem._dense(e, _scalar_vec))
        h_parts.append(_scalar_vec(e.const))
    for _, e in s_blocks:
        g_parts.append(-problem._dense(e, _embed_vec))
        h_parts.append(_embed_vec(e.const))
    G = np.vstack(g_parts) if g_parts else np.zeros((0, n))
    h = np.concatenate(h_parts) if h_parts else np.zeros(0)

    eq_rows = [problem._dense(e, _coords_vec) for _, e, _ in problem.equalities]
    eq_rhs = [linalg.to_coords(rhs - e.const) for _, e, rhs in problem.equalities]
    A = np.vstack(eq_rows) if eq_rows else np.zeros((0, n))
    b = np.concatenate(eq_rhs) if eq_rhs else np.zeros(0)

    f = problem._dense(problem.objective, _scalar_vec)[0]
    f0 = float(problem.objective.const[0, 0].real)

    # cvxopt needs full row rank in A: keep an orthonormal basis of its row space.
    if A.shape[0]:
        u, sv, vt = np.linalg.svd(A, full_matrices=True)
        rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0] if sv.size else 0.0)))
        inconsistency = np.linalg.norm(u[:, rank:].T @ b) if rank < A.shape[0] else 0.0
        if inconsistency > tol.feas:
            y = u[:, rank:] @ (u[:, rank:].T @ b)
            return _infeasible_linear(problem, y / np.linalg.norm(y), inconsistency)
        A_red = vt[:rank]
        b_red = (u[:, :rank].T @ b) / sv[:rank]
        lift = u[:, :rank] / sv[:rank]
    else:
        A_red, b_red, lift = A, b, np.zeros((0, 0))

    dims = {"l": len(l_rows), "q": [], "s": [2 * e.dim for _, e in s_blocks]}
    last = None
    for kkt, scale in _ATTEMPTS:
        sol = _attempt(problem, tol, kkt, scale, f, f0, G, h, dims, A, b, A_red, b_red, lift, l_rows, s_blocks)
        if sol.status in (OPTIMAL, INFEASIBLE):
            return sol
        last = sol
    return last


# Interior-point breakdowns (zero scaling steps, singular KKT systems) depend
# on the iterate path; a different KKT factorization or objective scale
# usually avoids them.
_ATTEMPTS = ((None, 1.0), ("ldl", 1.0), (None, 1 / 7), ("ldl", 3.0))


def _attempt(problem, tol, kkt, scale, f, f0, G, h, dims, A, b, A_red, b_red, lift, l_rows, s_blocks):
    options = {
        "show_progress": False,
        "maxiters": tol.max_iter,
        "abstol": 1e-11,
        "reltol": 1e-11,
        "feastol": 1e-11,
        "refinement": 2,
    }
    kwargs = {"kktsolver": kkt} if kkt else {}
    try:
        res = cvxopt.solvers.conelp(
            cvxopt.matrix(-f * scale),
            cvxopt.matrix(G),
            cvxopt.matrix(h),
            dims,
            cvxopt.matrix(A_red) if A_red.shape[0] else None,
            cvxopt.matrix(b_red) if A_red.shape[0] else None,
            options=options,
            **kwargs,
        )
    except (ValueError, ArithmeticError) as exc:
        return SdpSolution(SOLVER_FAILURE, message=f"cvxopt: {exc}")

    status = res["status"]
    iters = int(res.get("iterations", 0) or 0)
    if status == "dual infeasible":
        return SdpSolution(SOLVER_FAILURE, iterations=iters, message="problem is unbounded")
    if res["z"] is None or (res["x"] is None and status != "primal infeasible"):
        return SdpSolution(SOLVER_FAILURE, iterations=iters, message=f"cvxopt status {status}")

    # infeasibility certificates are scale free; optimal duals scale with c
    unscale = 1.0 if status == "primal infeasible" else scale
    z = np.array(res["z"]).ravel() / unscale
    y_red = np.array(res["y"]).ravel() / unscale if A_red.shape[0] else np.zeros(0)
    y = lift @ y_red if A_red.shape[0] else np.zeros(0)
    duals, lmi_duals = _unpack_duals(problem, y, z, l_rows, s_blocks)

    if status == "primal infeasible":
        return SdpSolution(INFEASIBLE, duals=duals, lmi_duals=lmi_duals, iterations=iters,
                           message="primal infeasibility certificate")

    x = np.array(res["x"]).ravel()
    values = _unpack_values(problem, x)
    primal = problem.sense * (f @ x + f0)
    dual = problem.sense * (b @ y + h @ z + f0)
    gap = abs(dual - primal)
    residual = max(
        float(np.max(np.abs(A @ x - b))) if A.shape[0] else 0.0,
        _cone_violation(G, h, x, l_rows, s_blocks),
    )
    if gap <= tol.gap * (1 + abs(primal)) and residual <= tol.feas:
        return SdpSolution(OPTIMAL, values, duals, lmi_duals, primal, dual, gap, residual, iters)
    return SdpSolution(
        SOLVER_FAILURE, values, duals, lmi_duals, primal, dual, gap, residual, iters,
        message=f"cvxopt status {status}: gap {gap:.3g}, residual {residual:.3g}",
    )


def _unpack_values(problem: SdpProblem, x: np.ndarray) -> dict:
    values = {}
    for name, var in problem.variables.items():
        part = x[var.offset:var.offset + var.size]
        values[name] = float(part[0]) if var.is_scalar else linalg.from_coords(part, var.dim)
    return values


def _unpack_duals(problem, y, z, l_rows, s_blocks):
    duals, pos = {}, 0
    for name, e, _ in problem.equalities:
        k = e.dim * e.dim
        g = y[pos:pos + k] if y.size else np.zeros(k)
        duals[name] = float(g[0]) if e.is_scalar else linalg.from_coords(g, e.dim)
        pos += k
    lmi_duals, pos = {}, 0
    for name, _ in l_rows:
        lmi_duals[name] = float(z[pos])
        pos += 1
    for name, e in s_blocks:
        k = 2 * e.dim
        zm = z[pos:pos + k * k].reshape(k, k, order="F")
        zm = np.tril(zm) + np.tril(zm, -1).T
        lmi_duals[name] = linalg.real_embedding_adjoint(zm)
        pos += k * k
    return duals, lmi_duals


def _cone_violation(G, h, x, l_rows, s_blocks) -> float:
    s = h - G @ x
    worst, pos = 0.0, 0
    for _ in l_rows:
        worst = max(worst, -s[pos])
        pos += 1
    for _, e in s_blocks:
        k = 2 * e.dim
        block = s[pos:pos + k * k].reshape(k, k)
        w = np.linalg.eigvalsh((block + block.T) / 2)
        worst = max(worst, -w[0])
        pos += k * k
    return float(worst)


def _infeasible_linear(problem, y, violation):
    duals, pos = {}, 0
    for name, e, _ in problem.equalities:
        k = e.dim * e.dim
        duals[name] = float(y[pos]) if e.is_scalar else linalg.from_coords(y[pos:pos + k], e.dim)
        pos += k
    return SdpSolution(INFEASIBLE, duals=duals,
                       message=f"inconsistent linear equalities (residual {violation:.3g})")


@dataclasses.dataclass
class FeasibilityResult:
    """Outcome of :func:`feasibility`.

    ``status`` is ``feasible``, ``infeasible`` or ``undecided``. For an
    infeasible problem, ``multipliers`` holds one Hermitian operator per
    relaxed constraint such that

        sum_k Tr[M_k C_k] - sup_x sum_k Tr[M_k E_k(x)] = margin > 0

    over every ``x`` satisfying the non-relaxed constraints, i.e. a strictly
    separating functional with the reported margin.
    """

    status: str
    violation: float
    point: dict | None = None
    multipliers: dict | None = None
    margin: float = 0.0
    solution: SdpSolution | None = None


def phase_one(problem: SdpProblem, relax=None) -> tuple[SdpProblem, list[str]]:
    """Copy of ``problem`` minimizing a two-sided slack on the relaxed equalities.

    Each relaxed constraint ``E_k(x) = C_k`` becomes
    ``-s I <= E_k(x) - C_k <= s I``; the objective is ``min s``.
    """
    names = [name for name, _, _ in problem.equalities]
    relax = names if relax is None else list(relax)
    unknown = set(relax) - set(names)
    if unknown:
        raise ValueError(f"unknown constraints {sorted(unknown)}")
    p1 = SdpProblem()
    for var in problem.variables.values():
        p1._add_var(var.name, var.dim, var.cone)
    s = p1.scalar("__slack__")
    for name, e, rhs in problem.equalities:
        if name in relax:
            eye = np.eye(e.dim)
            p1.add_psd(f"{name}:upper", s * eye - (e - rhs))
            p1.add_psd(f"{name}:lower", s * eye + (e - rhs))
        else:
            p1.add_eq(name, e, rhs)
    for name, e in problem.lmis:
        p1.add_psd(name, e)
    p1.minimize(s)
    return p1, relax


def feasibility(problem: SdpProblem, relax=None, tol: Tolerances = DEFAULT) -> FeasibilityResult:
    """Decide feasibility of the constraints of ``problem`` (objective ignored).

    Solves the phase-1 problem from :func:`phase_one`. A minimal slack at or
    below ``tol.feasible`` means feasible; at or above ``tol.margin`` the
    phase-1 dual multipliers give a separating functional; in between the
    answer is ``undecided``.
    """
    p1, relaxed = phase_one(problem, relax)
    sol = solve(p1, tol)
    if sol.status != OPTIMAL:
        raise linalg.SolverFailure(f"phase-1 solve failed: {sol.message or sol.status}")
    violation = max(sol.objective, 0.0)
    point = {k: v for k, v in sol.values.items() if k != "__slack__"}
    if violation <= tol.feasible:
        return FeasibilityResult(FEASIBLE, violation, point=point, solution=sol)
    multipliers = {}
    for name in relaxed:
        # lower - upper: the functional that the relaxed data C_k beat
        multipliers[name] = _dual_as_matrix(sol.lmi_duals[f"{name}:lower"]) - _dual_as_matrix(
            sol.lmi_duals[f"{name}:upper"])
    if violation >= tol.margin:
        return FeasibilityResult(INFEASIBLE, violation, point=point, multipliers=multipliers,
                                 margin=violation, solution=sol)
    return FeasibilityResult(UNDECIDED, violation, point=point, multipliers=multipliers,
                             margin=violation, solution=sol)


def _dual_as_matrix(w) -> np.ndarray:
    return np.array([[w]], dtype=complex) if np.isscalar(w) else w
