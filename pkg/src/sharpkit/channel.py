"""Completely positive maps in Choi form, fuzzifying and LPSR operations.

Choi convention (used everywhere in the package)::

    J(Phi) = sum_ij |i><j|_in (x) Phi(|i><j|)
    Phi(X) = Tr_in[(X^T (x) I_out) J]

with the transpose taken in the computational basis. A :class:`Channel`
is any CP map; trace preservation (``Tr_out J = I_in``) and unitality
(``Tr_in J = I_out``) are properties checked on demand.

A fuzzifying operation carries its quantum part as the *dual* map
``E^dag: A -> B`` (unital CP), since that is what acts on POVM elements.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import linalg
from .povm import Povm, ProgrammableDevice, extremal_trivial, validate


@dataclasses.dataclass(frozen=True, eq=False)
class Channel:
    choi: np.ndarray
    in_dim: int
    out_dim: int

    def __post_init__(self):
        if self.choi.shape != (self.in_dim * self.out_dim,) * 2:
            raise ValueError(f"Choi matrix shape {self.choi.shape} does not match {self.in_dim}x{self.out_dim}")
        j = linalg.hermitian(self.choi)
        if not linalg.is_psd(j, 1e-9):
            raise ValueError("Choi matrix is not PSD: map is not completely positive")
        j.setflags(write=False)
        object.__setattr__(self, "choi", j)

    def __call__(self, x):
        return apply(self, x)

    def trace_defect(self) -> float:
        return float(np.max(np.abs(linalg.partial_trace(self.choi, (self.in_dim, self.out_dim), "A")
                                   - np.eye(self.in_dim))))

    def unital_defect(self) -> float:
        return float(np.max(np.abs(linalg.partial_trace(self.choi, (self.in_dim, self.out_dim), "B")
                                   - np.eye(self.out_dim))))

    def is_trace_preserving(self, tol: float = 1e-8) -> bool:
        return self.trace_defect() <= tol

    def is_unital(self, tol: float = 1e-8) -> bool:
        return self.unital_defect() <= tol

    def kraus(self, cutoff: float = 1e-12) -> list:
        """Kraus operators K_k (out x in) with Phi(X) = sum_k K_k X K_k^dag."""
        w, v = linalg.eig_hermitian(self.choi)
        ops = []
        for val, vec in zip(w, v.T):
            if val > cutoff:
                # column index of J is (i, b); vec[(i, a)] = sqrt(val)^-1 K[a, i]
                ops.append(np.sqrt(val) * vec.reshape(self.in_dim, self.out_dim).T)
        return ops


def apply(c: Channel, x) -> np.ndarray:
    """Phi(X) = Tr_in[(X^T (x) I) J]; accepts a stack of operators."""
    x = np.asarray(x, dtype=complex)
    if x.shape[-2:] != (c.in_dim, c.in_dim):
        raise ValueError(f"operator of shape {x.shape[-2:]} does not fit input dimension {c.in_dim}")
    j = c.choi.reshape(c.in_dim, c.out_dim, c.in_dim, c.out_dim)
    return np.einsum("...ki,kaib->...ab", x, j)


def from_map(fn, in_dim: int, out_dim: int) -> Channel:
    """Choi matrix of the linear map ``fn`` (evaluated on matrix units)."""
    units = np.zeros((in_dim, in_dim, in_dim, in_dim), dtype=complex)
    for i in range(in_dim):
        for j in range(in_dim):
            units[i, j, i, j] = 1
    images = np.asarray(fn(units.reshape(in_dim * in_dim, in_dim, in_dim)))
    images = images.reshape(in_dim, in_dim, out_dim, out_dim)
    choi = np.einsum("ijab->iajb", images).reshape(in_dim * out_dim, in_dim * out_dim)
    return Channel(choi, in_dim, out_dim)


def from_kraus(kraus, in_dim: int | None = None) -> Channel:
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    out_dim, d = ops[0].shape
    in_dim = d if in_dim is None else in_dim
    return from_map(lambda x: sum(k @ x @ k.conj().T for k in ops), in_dim, out_dim)


def identity_channel(d: int) -> Channel:
    return Channel(d * linalg.maximally_entangled(d), d, d)


def unitary_channel(u) -> Channel:
    u = np.asarray(u, dtype=complex)
    return from_kraus([u])


def depolarizing(d: int, lam: float) -> Channel:
    """rho -> (1 - lam) rho + lam Tr[rho] I / d (self-dual, unital and TP)."""
    return Channel((1 - lam) * d * linalg.maximally_entangled(d) + lam * np.eye(d * d) / d, d, d)


def discard_dual(in_dim: int, out_dim: int) -> Channel:
    """X -> Tr[X] I_out / in_dim: the unital dual of preparing the maximally mixed state."""
    return Channel(np.eye(in_dim * out_dim, dtype=complex) / in_dim, in_dim, out_dim)


def dual(c: Channel) -> Channel:
    """Trace-dual map: Tr[dual(c)(Y) X] = Tr[Y c(X)]."""
    din, dout = c.in_dim, c.out_dim
    swapped = c.choi.reshape(din, dout, din, dout).transpose(1, 0, 3, 2).reshape(din * dout, din * dout)
    return Channel(swapped.conj(), dout, din)


def compose(second: Channel, first: Channel) -> Channel:
    """The map X -> second(first(X))."""
    if first.out_dim != second.in_dim:
        raise ValueError("dimension mismatch in composition")
    return from_map(lambda x: apply(second, apply(first, x)), first.in_dim, second.out_dim)


def unitalize(choi, in_dim: int, out_dim: int) -> Channel:
    """Nearest-in-spirit unital CP map to a noisy Choi matrix.

    Clips negative eigenvalues, then rescales the output side so that
    Tr_in J = I_out exactly. Used when decoding solver output.
    """
    j = linalg.hermitian(choi, tol=1e-6)
    w, v = linalg.eig_hermitian(j)
    j = (v * np.clip(w, 0, None)) @ v.conj().T
    t = linalg.partial_trace(j, (in_dim, out_dim), "B")
    try:
        s = linalg.psd_inv_sqrt(t, cutoff=1e-10)
    except np.linalg.LinAlgError:
        return discard_dual(in_dim, out_dim)
    fix = np.kron(np.eye(in_dim), s)
    return Channel(fix @ j @ fix, in_dim, out_dim)


def random_unital(in_dim: int, out_dim: int, seed, rank: int | None = None) -> Channel:
    """Random unital CP map in -> out (the dual of a random channel out -> in)."""
    rng = linalg.rng_from(seed)
    rank = in_dim * out_dim if rank is None else rank
    g = linalg.ginibre(in_dim * out_dim, rank, rng)
    return unitalize(g @ g.conj().T, in_dim, out_dim)


def random_channel(in_dim: int, out_dim: int, seed) -> Channel:
    """Random CPTP map in -> out."""
    return dual(random_unital(out_dim, in_dim, seed))


# sharp preprocessing ----------------------------------------------------------

def sharp_isometry(p_sharp: Povm, q: Povm, vectors=None) -> np.ndarray:
    """V = sum_x |psi^x>_A (x) sqrt(Q^x_B), mapping H_B into H_A (x) H_B."""
    from .povm import sharp_eigenvectors

    if p_sharp.outcomes != q.outcomes:
        raise ValueError("POVMs must share the outcome set")
    if vectors is None:
        vectors = sharp_eigenvectors(p_sharp)
    if vectors is None:
        raise ValueError("first POVM is not sharp")
    return sum(np.kron(np.asarray(psi).reshape(-1, 1), linalg.psd_sqrt(qx)) for psi, qx in zip(vectors, q))


def preprocess_from_sharp(p_sharp: Povm, q: Povm) -> Channel:
    """Unital CP map X -> V^dag (X (x) I_B) V taking each P^x to Q^x."""
    v = sharp_isometry(p_sharp, q)
    eye = np.eye(q.dim)

    def conjugate(x):
        lifted = np.einsum("...ij,ab->...iajb", x, eye).reshape(x.shape[:-2] + (v.shape[0],) * 2)
        return v.conj().T @ lifted @ v

    return from_map(conjugate, p_sharp.dim, q.dim)


# fuzzifying operations --------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class FuzzifyingOperation:
    """P^x -> mu E^dag(P^x) + (1 - mu) p(x) I_B with E^dag unital CP, A -> B."""

    channel: Channel
    mu: float
    dist: np.ndarray

    def __post_init__(self):
        mu = float(self.mu)
        if not -1e-10 <= mu <= 1 + 1e-10:
            raise ValueError(f"mixing weight {mu} outside [0, 1]")
        dist = np.asarray(self.dist, dtype=float)
        if dist.ndim != 1 or np.any(dist < -1e-10) or abs(dist.sum() - 1) > 1e-10:
            raise ValueError(f"not a probability distribution: {dist}")
        if not self.channel.is_unital(1e-8):
            raise ValueError(f"quantum part is not unital (defect {self.channel.unital_defect():.3g})")
        dist = np.clip(dist, 0, None)
        dist = dist / dist.sum()
        dist.setflags(write=False)
        object.__setattr__(self, "mu", min(max(mu, 0.0), 1.0))
        object.__setattr__(self, "dist", dist)

    @property
    def in_dim(self) -> int:
        return self.channel.in_dim

    @property
    def out_dim(self) -> int:
        return self.channel.out_dim

    @property
    def outcomes(self) -> int:
        return self.dist.size

    def __call__(self, p: Povm) -> Povm:
        return apply_fuzzifying(self, p)


def identity_fuzzifying(dim: int, outcomes: int) -> FuzzifyingOperation:
    return FuzzifyingOperation(identity_channel(dim), 1.0, np.full(outcomes, 1 / outcomes))


def fuzzify_elements(f: FuzzifyingOperation, elements) -> np.ndarray:
    out = f.mu * apply(f.channel, elements)
    return out + (1 - f.mu) * f.dist[:, None, None] * np.eye(f.out_dim)


def apply_fuzzifying(f: FuzzifyingOperation, p: Povm) -> Povm:
    if p.dim != f.in_dim:
        raise ValueError(f"operation acts on dimension {f.in_dim}, POVM has {p.dim}")
    if p.outcomes != f.outcomes:
        raise ValueError(f"operation has {f.outcomes} outcomes, POVM has {p.outcomes}")
    return validate(fuzzify_elements(f, p.elements))


def compose_fuzzifying(second: FuzzifyingOperation, first: FuzzifyingOperation) -> FuzzifyingOperation:
    """The single fuzzifying operation equal to ``second`` after ``first``.

    mu = mu2 mu1, channel = E2^dag o E1^dag and the trivial part collects
    mu2 (1 - mu1) p1 + (1 - mu2) p2.
    """
    if first.out_dim != second.in_dim:
        raise ValueError("dimension mismatch in composition")
    if first.outcomes != second.outcomes:
        raise ValueError("outcome count mismatch in composition")
    mu = second.mu * first.mu
    noise = second.mu * (1 - first.mu) * first.dist + (1 - second.mu) * second.dist
    dist = noise / noise.sum() if noise.sum() > 1e-15 else np.full(first.outcomes, 1 / first.outcomes)
    return FuzzifyingOperation(compose(second.channel, first.channel), mu, dist)


def random_fuzzifying(in_dim: int, out_dim: int, outcomes: int, seed) -> FuzzifyingOperation:
    rng = linalg.rng_from(seed)
    return FuzzifyingOperation(random_unital(in_dim, out_dim, rng), rng.uniform(), rng.dirichlet(np.ones(outcomes)))


# LPSR operations --------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class LpsrOperation:
    """Local preprocessing with shared randomness on a programmable device.

    ``shared[r]`` is the weight of randomness value r, ``channels[r]`` the
    unital CP map A -> B used with it, and ``program_cond[r, i]`` the
    probability that program 0 is rerouted to program i. Programs i >= 1
    are passed through untouched.
    """

    shared: np.ndarray
    channels: tuple
    program_cond: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.shared, dtype=float)
        cond = np.asarray(self.program_cond, dtype=float)
        if nu.ndim != 1 or np.any(nu < -1e-12) or abs(nu.sum() - 1) > 1e-10:
            raise ValueError("shared randomness is not a distribution")
        if cond.shape[0] != nu.size or len(self.channels) != nu.size:
            raise ValueError("one channel and one program distribution per randomness value")
        if np.any(cond < -1e-12) or np.any(np.abs(cond.sum(axis=1) - 1) > 1e-10):
            raise ValueError("program preprocessing rows must be distributions")
        for ch in self.channels:
            if not ch.is_unital(1e-8):
                raise ValueError("LPSR quantum preprocessing must be unital CP")
        object.__setattr__(self, "shared", nu)
        object.__setattr__(self, "program_cond", cond)
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def outcomes(self) -> int:
        return self.program_cond.shape[1] - 1

    @property
    def out_dim(self) -> int:
        return self.channels[0].out_dim


def apply_lpsr(op: LpsrOperation, dev: ProgrammableDevice) -> ProgrammableDevice:
    n = dev.outcomes
    if op.outcomes != n:
        raise ValueError("program alphabet does not match the device")
    if any(ch.in_dim != dev.dim for ch in op.channels):
        raise ValueError("channel input dimension does not match the device")
    stack = np.array([slot.elements for slot in dev.slots])  # (i, x, d, d)
    out = 0
    for nu, ch, cond in zip(op.shared, op.channels, op.program_cond):
        out = out + nu * apply(ch, np.einsum("i,ixab->xab", cond, stack))
    base = validate(out)
    db = op.out_dim
    return ProgrammableDevice((base,) + tuple(extremal_trivial(i, n, db) for i in range(1, n + 1)))


def lpsr_to_fuzzifying(op: LpsrOperation) -> FuzzifyingOperation:
    n = op.outcomes
    mus = op.program_cond[:, 0]
    dists = []
    for mu_r, cond in zip(mus, op.program_cond):
        if 1 - mu_r > 0:
            dists.append(cond[1:] / (1 - mu_r))
        else:
            dists.append(np.full(n, 1 / n))
    mu = float(op.shared @ mus)
    din, dout = op.channels[0].in_dim, op.out_dim
    if mu > 1e-12:
        choi = sum(nu * m * ch.choi for nu, m, ch in zip(op.shared, mus, op.channels)) / mu
        channel = unitalize(choi, din, dout)
    else:
        channel = discard_dual(din, dout)
    if 1 - mu > 1e-12:
        noise = sum(nu * (1 - m) * p for nu, m, p in zip(op.shared, mus, dists))
        dist = noise / (1 - mu)
    else:
        dist = np.full(n, 1 / n)
    return FuzzifyingOperation(channel, mu, dist)


def fuzzifying_to_lpsr(f: FuzzifyingOperation) -> LpsrOperation:
    cond = np.concatenate([[f.mu], (1 - f.mu) * f.dist])[None, :]
    return LpsrOperation(np.ones(1), (f.channel,), cond)


def random_lpsr(in_dim: int, out_dim: int, outcomes: int, seed, randomness: int = 2,
                saturate: bool = False) -> LpsrOperation:
    """Random LPSR operation; ``saturate`` forces mu(0|r) = 1 for the first r."""
    rng = linalg.rng_from(seed)
    nu = rng.dirichlet(np.ones(randomness))
    channels = tuple(random_unital(in_dim, out_dim, rng) for _ in range(randomness))
    cond = rng.dirichlet(np.ones(outcomes + 1), size=randomness)
    if saturate:
        cond[0] = np.eye(outcomes + 1)[0]
    return LpsrOperation(nu, channels, cond)
