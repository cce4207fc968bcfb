"""Dense complex linear algebra on small Hilbert spaces.

Operators are plain ``numpy`` complex arrays. Functions that take a
"Hermitian operator" accept any square array-like and pass it through
:func:`hermitian`, which symmetrizes away rounding noise but rejects inputs
whose anti-Hermitian part is larger than the configured tolerance.

Tensor products use the row-major Kronecker convention: the basis vector
``|i>|k>`` of ``A (x) B`` has index ``i * dim(B) + k``.

Random sampling uses numpy's ``Generator`` with the PCG64 bit generator, so
a given integer seed produces bit-identical draws on every platform numpy
supports.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULT

MAX_DIM = 36


class SolverFailure(RuntimeError):
    """A numerical routine did not reach its accuracy contract."""


def hermitian(m, tol: float = DEFAULT.hermitian) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    skew = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if skew > tol * max(1.0, np.max(np.abs(a))):
        raise ValueError(f"matrix is not Hermitian (max asymmetry {skew:.3g})")
    return (a + a.conj().T) / 2


def density(m, tol: float = DEFAULT.psd) -> np.ndarray:
    rho = hermitian(m)
    if abs(np.trace(rho).real - 1) > 1e-9:
        raise ValueError(f"density matrix has trace {np.trace(rho).real!r}")
    if not is_psd(rho, tol):
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def tensor(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Trace out one factor of a bipartite operator on ``A (x) B``.

    ``keep`` names the subsystem that survives ("A" or "B"). Works on a
    stack of operators too (leading axes are preserved).
    """
    m = np.asarray(m)
    da, db = dims
    if m.shape[-2:] != (da * db, da * db):
        raise ValueError(f"operator of shape {m.shape[-2:]} does not match dims {dims}")
    t = m.reshape(m.shape[:-2] + (da, db, da, db))
    if keep == "A":
        return np.einsum("...ikjk->...ij", t)
    if keep == "B":
        return np.einsum("...kikj->...ij", t)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""
    a = hermitian(m)
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {a.shape[0]} exceeds the supported cap of {MAX_DIM}")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"eigensolver did not converge: {exc}") from exc
    err = np.linalg.norm(a - (v * w) @ v.conj().T)
    if err > 1e-10 * max(1.0, np.linalg.norm(a)):
        raise SolverFailure(f"eigendecomposition reconstruction error {err:.3g}")
    return w, v


def max_eigenvalue(m) -> float:
    return float(eig_hermitian(m)[0][-1])


def min_eigenvalue(m) -> float:
    return float(eig_hermitian(m)[0][0])


def is_psd(m, tol: float = DEFAULT.psd) -> bool:
    w = eig_hermitian(m)[0]
    return bool(w[0] >= -tol * max(1.0, np.max(np.abs(w))))


def psd_sqrt(m) -> np.ndarray:
    w, v = eig_hermitian(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def psd_inv_sqrt(m, cutoff: float = 1e-14) -> np.ndarray:
    w, v = eig_hermitian(m)
    if w[0] <= cutoff * max(1.0, w[-1]):
        raise np.linalg.LinAlgError("matrix is singular")
    return (v / np.sqrt(w)) @ v.conj().T


def maximally_entangled(d: int) -> np.ndarray:
    """Projector onto (1/sqrt d) sum_i |i>|i> on the d^2-dimensional space."""
    if d < 1:
        raise ValueError("dimension must be positive")
    phi = np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)
    return np.outer(phi, phi.conj())


def ket(i: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def ginibre(rows: int, cols: int, seed) -> np.ndarray:
    rng = rng_from(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(d: int, seed) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix with phase fixing."""
    if d < 1:
        raise ValueError("dimension must be positive")
    q, r = np.linalg.qr(ginibre(d, d, seed))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_density(d: int, seed) -> np.ndarray:
    """Density matrix from the Hilbert-Schmidt ensemble."""
    g = ginibre(d, d, seed)
    rho = g @ g.conj().T
    return hermitian(rho / np.trace(rho).real)


def random_pure_state(d: int, seed) -> np.ndarray:
    """Haar-random unit vector, returned as a d x 1 column."""
    v = ginibre(d, 1, seed)
    return v / np.linalg.norm(v)


# Orthonormal real coordinates for Hermitian matrices under <A, B> = Tr[A B].

_basis_cache: dict[int, np.ndarray] = {}


def hermitian_basis(m: int) -> np.ndarray:
    """Stack of m^2 Hermitian matrices, orthonormal under the trace inner product.

    Order: diagonal units, then for each i < j the symmetric and the
    antisymmetric (imaginary) combinations.
    """
    if m not in _basis_cache:
        basis = np.zeros((m * m, m, m), dtype=complex)
        k = 0
        for i in range(m):
            basis[k, i, i] = 1
            k += 1
        s = 1 / np.sqrt(2)
        for i in range(m):
            for j in range(i + 1, m):
                basis[k, i, j] = basis[k, j, i] = s
                basis[k + 1, i, j] = 1j * s
                basis[k + 1, j, i] = -1j * s
                k += 2
        basis.setflags(write=False)
        _basis_cache[m] = basis
    return _basis_cache[m]


def to_coords(h) -> np.ndarray:
    """Real coordinates of a Hermitian matrix (or a stack of them)."""
    h = np.asarray(h)
    basis = hermitian_basis(h.shape[-1])
    return np.einsum("kij,...ji->...k", basis, h).real


def from_coords(c, m: int) -> np.ndarray:
    return np.einsum("...k,kij->...ij", np.asarray(c, dtype=float), hermitian_basis(m))


def real_embedding(h) -> np.ndarray:
    """H -> [[Re H, -Im H], [Im H, Re H]]; preserves the spectrum (doubled)."""
    h = np.asarray(h)
    re, im = h.real, h.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def real_embedding_adjoint(s) -> np.ndarray:
    """Hermitian W with Re Tr[H W] = Tr[real_embedding(H) S] for every Hermitian H."""
    s = np.asarray(s, dtype=float)
    m = s.shape[-1] // 2
    s11, s12 = s[..., :m, :m], s[..., :m, m:]
    s21, s22 = s[..., m:, :m], s[..., m:, m:]
    w = (s11 + s22) + 1j * (s21 - s12)
    return (w + np.conj(np.swapaxes(w, -1, -2))) / 2
