"""POVMs, their classification, and the programmable-device extension."""

from __future__ import annotations

import dataclasses

import numpy as np

from . import linalg, sdp
from .config import DEFAULT


class InvalidPovm(ValueError):
    """Candidate elements do not form a POVM."""


@dataclasses.dataclass(frozen=True, eq=False)
class Povm:
    """Ordered family of PSD operators summing to the identity.

    ``elements`` has shape (N, d, d); outcome ``x`` is position ``x``.
    Construct through :func:`validate` unless the elements are known good.
    """

    elements: np.ndarray

    def __post_init__(self):
        arr = np.array(self.elements, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "elements", arr)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def outcomes(self) -> int:
        return self.elements.shape[0]

    def __len__(self):
        return self.outcomes

    def __getitem__(self, x):
        return self.elements[x]

    def __iter__(self):
        return iter(self.elements)

    def distance(self, other: "Povm") -> float:
        """Frobenius norm of the stacked elementwise difference."""
        if self.elements.shape != other.elements.shape:
            raise ValueError("POVMs have different shapes")
        return float(np.linalg.norm(self.elements - other.elements))

    def probabilities(self, rho) -> np.ndarray:
        return np.einsum("xij,ji->x", self.elements, rho).real

    def __repr__(self):
        return f"Povm(dim={self.dim}, outcomes={self.outcomes})"


def validate(elements, dim: int | None = None, tol: float = DEFAULT.completeness) -> Povm:
    """Check positivity and completeness; return the validated :class:`Povm`.

    Errors name the offending element and its minimum eigenvalue, or the
    norm of the completeness residual.
    """
    items = list(elements)
    if not items:
        raise InvalidPovm("a POVM needs at least one element")
    try:
        mats = [linalg.hermitian(m) for m in items]
    except ValueError as exc:
        raise InvalidPovm(str(exc)) from exc
    d = mats[0].shape[0] if dim is None else dim
    for x, m in enumerate(mats):
        if m.shape != (d, d):
            raise InvalidPovm(f"element {x} has shape {m.shape}, expected {(d, d)}")
    for x, m in enumerate(mats):
        lo = linalg.min_eigenvalue(m)
        if lo < -DEFAULT.psd * max(1.0, abs(linalg.max_eigenvalue(m))):
            raise InvalidPovm(f"element {x} is not PSD (min eigenvalue {lo:.3g})")
    residual = np.sum(mats, axis=0) - np.eye(d)
    if np.max(np.abs(residual)) > tol:
        raise InvalidPovm(f"elements do not sum to the identity (residual norm {np.linalg.norm(residual):.3g})")
    return Povm(np.array(mats))


@dataclasses.dataclass(frozen=True)
class Classification:
    sharp: bool
    trivial: bool
    projective: bool
    rank_one: bool
    unit_eigenvectors: list | None = None
    numerically_sharp: bool = False  # an eigenvalue sits in [1 - tol, 1 - 1e-12)

    def as_dict(self) -> dict:
        out = {
            "sharp": self.sharp,
            "trivial": self.trivial,
            "projective": self.projective,
            "rank_one": self.rank_one,
            "numerically_sharp": self.numerically_sharp,
        }
        if self.unit_eigenvectors is not None:
            out["unit_eigenvectors"] = [np.asarray(v) for v in self.unit_eigenvectors]
        return out


def sharp_eigenvectors(p: Povm, tol: float = DEFAULT.sharp) -> list | None:
    """Unit eigenvectors |psi^x> with P^x |psi^x> = |psi^x>, or None if unsharp."""
    vectors = []
    for m in p:
        w, v = linalg.eig_hermitian(m)
        if w[-1] < 1 - tol:
            return None
        vectors.append(v[:, -1])
    return vectors


def is_sharp(p: Povm, tol: float = DEFAULT.sharp) -> bool:
    return sharp_eigenvectors(p, tol) is not None


def is_trivial(p: Povm, tol: float = DEFAULT.classify) -> bool:
    eye = np.eye(p.dim)
    for m in p:
        c = np.trace(m).real / p.dim
        if np.max(np.abs(m - c * eye)) > tol:
            return False
    return True


def is_projective(p: Povm, tol: float = DEFAULT.classify) -> bool:
    for x, m in enumerate(p):
        if np.linalg.norm(m @ m - m) > tol:
            return False
        for y in range(x + 1, p.outcomes):
            if np.linalg.norm(m @ p[y]) > tol:
                return False
    return True


def is_rank_one(p: Povm, tol: float = DEFAULT.classify) -> bool:
    """Every nonzero element has exactly one eigenvalue above ``tol``.

    Zero elements are rank zero and do not spoil the property.
    """
    for m in p:
        rank = int(np.sum(linalg.eig_hermitian(m)[0] > tol))
        if rank > 1:
            return False
    return True


def classify(p: Povm) -> Classification:
    vectors = sharp_eigenvectors(p)
    near = False
    if vectors is not None:
        tops = [linalg.max_eigenvalue(m) for m in p]
        near = any(t < 1 - 1e-12 for t in tops)
    return Classification(
        sharp=vectors is not None,
        trivial=is_trivial(p),
        projective=is_projective(p),
        rank_one=is_rank_one(p),
        unit_eigenvectors=vectors,
        numerically_sharp=near,
    )


# constructors ---------------------------------------------------------------

def trivial_povm(dist, dim: int) -> Povm:
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 1 or np.any(dist < 0) or abs(dist.sum() - 1) > 1e-10:
        raise InvalidPovm(f"not a probability distribution: {dist}")
    return Povm(dist[:, None, None] * np.eye(dim))


def extremal_trivial(i: int, n: int, dim: int) -> Povm:
    """Trivial POVM whose element ``i`` (1-based) is the identity, the rest zero."""
    if not 1 <= i <= n:
        raise ValueError(f"index {i} outside 1..{n}")
    return trivial_povm(np.eye(n)[i - 1], dim)


def computational_basis(dim: int) -> Povm:
    return Povm(np.array([linalg.projector(linalg.ket(i, dim)) for i in range(dim)]))


def noisy_basis(eta: float, dim: int = 2) -> Povm:
    """eta * |x><x| + (1 - eta) * I / dim; for a qubit, {(I +- eta sigma_z)/2}."""
    basis = computational_basis(dim).elements
    return Povm(eta * basis + (1 - eta) * np.eye(dim) / dim)


def mix(p: Povm, q: Povm, alpha: float) -> Povm:
    return Povm(alpha * p.elements + (1 - alpha) * q.elements)


# programmable device --------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class ProgrammableDevice:
    """Program 0 measures ``base``; program i >= 1 outputs i deterministically."""

    slots: tuple

    @property
    def base(self) -> Povm:
        return self.slots[0]

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def outcomes(self) -> int:
        return self.base.outcomes

    def element(self, x: int, i: int) -> np.ndarray:
        return self.slots[i][x]


def extend_to_programmable(p: Povm) -> ProgrammableDevice:
    n = p.outcomes
    return ProgrammableDevice((p,) + tuple(extremal_trivial(i, n, p.dim) for i in range(1, n + 1)))


# testing region -------------------------------------------------------------

def testing_region_contains(p: Povm, target, tol: float = 1e-7):
    """Whether some state produces the distribution ``target``.

    Returns ``(contained, rho)`` with a certifying density matrix when
    contained, ``None`` otherwise.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != (p.outcomes,):
        raise ValueError(f"target has {target.size} entries, POVM has {p.outcomes} outcomes")
    if abs(target.sum() - 1) > 1e-9:
        raise ValueError("target must sum to one")
    prob = sdp.SdpProblem()
    rho = prob.hermitian("rho", p.dim)
    prob.add_eq("normalization", rho.trace(), 1.0)
    for x, m in enumerate(p):
        prob.add_eq(f"outcome{x}", rho.trace(m), target[x])
    relax = [f"outcome{x}" for x in range(p.outcomes)]
    res = sdp.feasibility(prob, relax, DEFAULT.replace(feasible=tol, margin=tol))
    if res.status == sdp.FEASIBLE:
        return True, res.point["rho"]
    return False, None


# sampling -------------------------------------------------------------------

def random_povm(dim: int, outcomes: int, seed, rank: int | None = None) -> Povm:
    """Random POVM: S^{-1/2} G_x G_x^dag S^{-1/2} with S = sum_x G_x G_x^dag.

    ``G_x`` are complex Gaussian ``dim x rank`` matrices (``rank`` defaults
    to ``dim``, giving full-rank elements almost surely).
    """
    rng = linalg.rng_from(seed)
    rank = dim if rank is None else rank
    for _ in range(10):
        blocks = [linalg.ginibre(dim, rank, rng) for _ in range(outcomes)]
        grams = np.array([g @ g.conj().T for g in blocks])
        try:
            s = linalg.psd_inv_sqrt(grams.sum(axis=0))
        except np.linalg.LinAlgError:
            continue
        elements = np.einsum("ij,xjk,kl->xil", s, grams, s)
        return Povm((elements + np.conj(np.swapaxes(elements, 1, 2))) / 2)
    raise linalg.SolverFailure("random_povm: singular normalization after 10 draws")


def random_sharp_povm(dim: int, outcomes: int, seed) -> Povm:
    """Random sharp POVM: orthonormal |psi^x> plus a random POVM on their complement."""
    if outcomes > dim:
        raise ValueError("a sharp POVM cannot have more outcomes than the dimension")
    rng = linalg.rng_from(seed)
    u = linalg.random_unitary(dim, rng)
    elements = np.array([linalg.projector(u[:, x]) for x in range(outcomes)])
    rest = dim - outcomes
    if rest:
        w = random_povm(rest, outcomes, rng).elements
        comp = u[:, outcomes:]
        elements = elements + np.einsum("ia,xab,jb->xij", comp, w, comp.conj())
    return Povm(elements)


def random_trivial_povm(dim: int, outcomes: int, seed) -> Povm:
    rng = linalg.rng_from(seed)
    return trivial_povm(rng.dirichlet(np.ones(outcomes)), dim)
