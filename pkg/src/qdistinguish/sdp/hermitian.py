"""Complex Hermitian LMIs on top of the real symmetric solver.

A problem is written as::

    minimize  c . y   s.t.  G_k(y) = G0_k + sum_i y_i G_ki >= 0   for every block k

with complex Hermitian blocks. Each block is embedded as the real symmetric
matrix ``[[Re, -Im], [Im, Re]]`` and every embedded matrix carries a factor
1/2, so real inner products equal ``Re Tr`` of the complex ones. The
multipliers ``X_k`` of the LMIs solve the conic dual::

    maximize  -sum_k Tr[G0_k X_k]   s.t.  sum_k Tr[G_ki X_k] = c_i,  X_k >= 0
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .solver import SdpProblem, SdpSolution, SolverError, SolverOptions, solve


def embed(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def extract(m: np.ndarray) -> np.ndarray:
    """Inverse of ``embed`` composed with the projection onto embedded matrices."""
    n = m.shape[0] // 2
    re = (m[:n, :n] + m[n:, n:]) / 2
    im = (m[n:, :n] - m[:n, n:]) / 2
    out = re + 1j * im
    return (out + out.conj().T) / 2


def hermitian_basis(d: int, traceless: bool = False) -> np.ndarray:
    """Basis of d x d Hermitian matrices, orthonormal under ``Re Tr[A B]``."""
    out = []
    if traceless:
        for k in range(1, d):
            h = np.zeros((d, d), dtype=complex)
            h[np.arange(k), np.arange(k)] = 1
            h[k, k] = -k
            out.append(h / np.sqrt(k * (k + 1)))
    else:
        for k in range(d):
            h = np.zeros((d, d), dtype=complex)
            h[k, k] = 1
            out.append(h)
    for i in range(d):
        for j in range(i + 1, d):
            h = np.zeros((d, d), dtype=complex)
            h[i, j] = h[j, i] = 1 / np.sqrt(2)
            out.append(h)
            h = np.zeros((d, d), dtype=complex)
            h[i, j], h[j, i] = 1j / np.sqrt(2), -1j / np.sqrt(2)
            out.append(h)
    return np.array(out).reshape(-1, d, d)


@dataclass(frozen=True)
class HermitianVariable:
    """Handle for a Hermitian matrix variable ``offset + sum_k y[start + k] basis[k]``."""

    start: int
    basis: np.ndarray
    offset: np.ndarray

    @property
    def size(self) -> int:
        return len(self.basis)

    def value(self, y: np.ndarray) -> np.ndarray:
        return self.offset + np.einsum("k,kij->ij", y[self.start : self.start + self.size], self.basis)


class LmiBuilder:
    def __init__(self):
        self._dims: list[int] = []
        self._names: list[str] = []
        self._const: list[np.ndarray] = []
        self._coef: list[list[tuple[int, np.ndarray]]] = []
        self._cost: list[float] = []

    @property
    def n_vars(self) -> int:
        return len(self._cost)

    def block(self, dim: int, name: str = "") -> int:
        self._dims.append(int(dim))
        self._names.append(name or f"block{len(self._dims) - 1}")
        self._const.append(np.zeros((dim, dim), dtype=complex))
        self._coef.append([])
        return len(self._dims) - 1

    def add_constant(self, block: int, g0: np.ndarray) -> None:
        self._const[block] = self._const[block] + np.asarray(g0, dtype=complex)

    def scalar(self, cost: float, coeffs: dict[int, np.ndarray]) -> int:
        i = self.n_vars
        self._cost.append(float(cost))
        for blk, g in coeffs.items():
            self._coef[blk].append((i, np.asarray(g, dtype=complex)))
        return i

    def hermitian(
        self,
        dim: int,
        maps: dict[int, Callable[[np.ndarray], np.ndarray]],
        traceless: bool = False,
        offset: np.ndarray | None = None,
        cost: Callable[[np.ndarray], float] | None = None,
    ) -> HermitianVariable:
        """Add a Hermitian matrix variable; ``maps[block]`` is its linear image in that block.

        With ``offset`` the variable is affine; the offset's images are added
        to the block constants.
        """
        basis = hermitian_basis(dim, traceless)
        off = np.zeros((dim, dim), dtype=complex) if offset is None else np.asarray(offset, dtype=complex)
        start = self.n_vars
        for h in basis:
            self.scalar(0.0 if cost is None else cost(h), {blk: f(h) for blk, f in maps.items()})
        if offset is not None:
            for blk, f in maps.items():
                self.add_constant(blk, f(off))
        return HermitianVariable(start, basis, off)

    def problem(self) -> SdpProblem:
        m = self.n_vars
        cs, rows = [], []
        for k, n in enumerate(self._dims):
            cs.append(-embed(self._const[k]) / 2)
            ri, ci, vals = [], [], []
            for i, g in self._coef[k]:
                e = (embed(g) / 2).ravel()
                nz = np.flatnonzero(e)
                ri.append(np.full(nz.size, i))
                ci.append(nz)
                vals.append(e[nz])
            if ri:
                ri, ci, vals = np.concatenate(ri), np.concatenate(ci), np.concatenate(vals)
            a = sp.coo_matrix((vals, (ri, ci)), shape=(m, 4 * n * n))
            rows.append(a.tocsr())
        return SdpProblem(tuple(2 * n for n in self._dims), tuple(cs), tuple(rows), np.array(self._cost))

    def solve(self, options: SolverOptions | None = None, what: str = "SDP") -> "LmiSolution":
        sol = solve(self.problem(), options)
        if not sol.optimal:
            raise SolverError(
                f"{what} solver stopped with status {sol.status} after {sol.iterations} iterations "
                f"(rel_gap={sol.rel_gap:.2e}, pinf={sol.primal_infeasibility:.2e}, "
                f"dinf={sol.dual_infeasibility:.2e})",
                sol,
            )
        return LmiSolution(sol, [extract(x) for x in sol.x], [2 * extract(s) for s in sol.s])


@dataclass(frozen=True, eq=False)
class LmiSolution:
    raw: SdpSolution
    multipliers: list
    slacks: list

    @property
    def y(self) -> np.ndarray:
        return self.raw.y

    @property
    def min_value(self) -> float:
        """Objective of the LMI (minimization) side."""
        return self.raw.dual_value

    @property
    def max_value(self) -> float:
        """Objective of the multiplier (maximization) side."""
        return self.raw.primal_value

    def value(self, var: HermitianVariable) -> np.ndarray:
        return var.value(self.raw.y)
