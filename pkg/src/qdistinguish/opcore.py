"""Dense complex linear algebra and observable bookkeeping.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Tensor factors
are ordered left to right with the left factor varying slowest, so the basis
index of ``|i>|k>`` on ``C^d1 (x) C^d2`` is ``i * d2 + k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Hashable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
DENSITY_TOL = 1e-9
ONB_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when operand dimensions are inconsistent."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-d complex array."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"{name} must be a nonempty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def as_hermitian(a, name: str = "operator", tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate Hermiticity (max-entry metric) and return the symmetrized array."""
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    err = np.max(np.abs(m - m.conj().T))
    if err > tol:
        raise ValueError(f"{name} is not Hermitian (max deviation {err:.3e})")
    return (m + m.conj().T) / 2


def as_density(a, name: str = "state", tol: float = DENSITY_TOL) -> np.ndarray:
    """Validate a density operator: Hermitian, PSD and unit trace within ``tol``."""
    m = as_hermitian(a, name, tol=max(tol, HERMITIAN_TOL))
    tr = np.trace(m).real
    if abs(tr - 1) > tol:
        raise ValueError(f"{name} has trace {tr:.12g}, expected 1")
    lam = np.linalg.eigvalsh(m)[0]
    if lam < -tol:
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {lam:.3e})")
    return m


def eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix (the single spectral kernel)."""
    a = np.asarray(a)
    return np.linalg.eigh((a + a.conj().T) / 2)


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = eigh(a)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def psd_part(a: np.ndarray) -> np.ndarray:
    """Positive part of a Hermitian matrix."""
    w, v = eigh(a)
    return (v * np.clip(w, 0, None)) @ v.conj().T


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def tensor(*ops) -> np.ndarray:
    """Kronecker product, left factor varying slowest."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def _check_dims(shape, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise DimensionError(f"factor dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if shape[0] != shape[1] or shape[0] != total:
        raise DimensionError(f"operator of shape {shape} does not match factor dims {dims}")
    return dims


def partial_trace(op, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    ``keep`` is a collection of factor indices; the result keeps those
    factors in their original order. Keeping nothing returns the 1x1 trace.
    """
    op = np.asarray(op)
    dims = _check_dims(op.shape, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} factors")
    t = op.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    res = np.einsum(t, row + col, out)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return res.reshape(d, d)


def permute_factors(op, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square operator; ``order[j]`` is the old index of new factor j."""
    op = np.asarray(op)
    dims = _check_dims(op.shape, dims)
    n = len(dims)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} factors")
    t = op.reshape(dims + dims).transpose(order + [o + n for o in order])
    return t.reshape(op.shape)


def trace_norm(a: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(eigh(a)[0])))


def trace_distance(rho1, rho2) -> float:
    """Optimal bias for distinguishing two states: half the trace norm of the difference."""
    rho1 = as_density(rho1, "rho1")
    rho2 = as_density(rho2, "rho2")
    if rho1.shape != rho2.shape:
        raise DimensionError(f"state dimensions differ: {rho1.shape} vs {rho2.shape}")
    return min(1.0, 0.5 * trace_norm(rho1 - rho2))


def operator_norm(op) -> float:
    """Largest eigenvalue magnitude of a Hermitian operator."""
    op = as_hermitian(op)
    return float(np.max(np.abs(eigh(op)[0])))


@dataclass(frozen=True, eq=False)
class Observable:
    """A nondegenerate observable, given by its orthonormal eigenbasis.

    ``eigenvectors[i]`` is the eigenvector for outcome ``labels[i]``.
    """

    eigenvectors: np.ndarray
    labels: tuple

    def __post_init__(self):
        vecs = np.array(self.eigenvectors, dtype=complex)
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1] or vecs.shape[0] == 0:
            raise DimensionError(f"need d eigenvectors of length d, got array of shape {vecs.shape}")
        d = vecs.shape[0]
        if not np.all(np.isfinite(vecs)):
            raise ValueError("eigenvectors have non-finite entries")
        labels = tuple(self.labels) if self.labels is not None else tuple(range(d))
        if len(labels) != d:
            raise DimensionError(f"{len(labels)} labels given for dimension {d}")
        if len(set(labels)) != d:
            raise ValueError(f"labels must be distinct, got {labels}")
        gram = vecs.conj() @ vecs.T
        bad = np.abs(gram - np.eye(d))
        i, j = np.unravel_index(np.argmax(bad), bad.shape)
        if bad[i, j] > ONB_TOL:
            raise ValueError(
                f"eigenvectors are not orthonormal: Gram entry ({i}, {j}) = "
                f"{gram[i, j]:.6g}, expected {int(i == j)}"
            )
        vecs.setflags(write=False)
        object.__setattr__(self, "eigenvectors", vecs)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def unitary(self) -> np.ndarray:
        """Matrix whose columns are the eigenvectors."""
        return self.eigenvectors.T

    def projector(self, i: int) -> np.ndarray:
        return projector(self.eigenvectors[i])

    def projectors(self) -> list[np.ndarray]:
        return [self.projector(i) for i in range(self.dim)]

    def index(self, label: Hashable) -> int:
        return self.labels.index(label)

    @classmethod
    def computational(cls, d: int, labels=None) -> "Observable":
        return cls(np.eye(d), labels)

    @classmethod
    def fourier(cls, d: int, labels=None) -> "Observable":
        """Discrete Fourier basis; for d = 2 this is the Hadamard basis."""
        j = np.arange(d)
        vecs = np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)
        return cls(vecs, labels)

    @classmethod
    def from_unitary(cls, u, labels=None) -> "Observable":
        return cls(np.asarray(u).T, labels)


def overlap_matrix(x: Observable, z: Observable) -> np.ndarray:
    """Entry (i, j) is ``|<x_i|z_j>|^2``; the result is doubly stochastic."""
    if x.dim != z.dim:
        raise DimensionError(f"observable dimensions differ: {x.dim} vs {z.dim}")
    # real elementwise products keep the result exactly transposed under x <-> z
    xr, xi = x.eigenvectors.real[:, None, :], x.eigenvectors.imag[:, None, :]
    zr, zi = z.eigenvectors.real[None, :, :], z.eigenvectors.imag[None, :, :]
    re = np.sum(xr * zr + xi * zi, axis=2)
    im = np.sum(xr * zi - xi * zr, axis=2)
    return re * re + im * im


def matrix_units_hermitian(d: int) -> list[np.ndarray]:
    """The d^2 Hermitian combinations of matrix units; they span all d x d matrices."""
    out = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            if i == j:
                e[i, i] = 1
            elif i < j:
                e[i, j] = e[j, i] = 1
            else:
                e[i, j], e[j, i] = 1j, -1j
            out.append(e)
    return out
