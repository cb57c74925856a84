"""Quantum channels, their Choi/Stinespring forms, and measurement devices.

Channels are held as Kraus operators. Choi matrices use the unnormalized
maximally entangled vector ``|Omega> = sum_k |b_k>|b_k>`` and the
output (x) input factor ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .opcore import (
    DimensionError,
    Observable,
    as_density,
    as_matrix,
    dag,
    eigh,
    ket,
    matrix_units_hermitian,
    partial_trace,
)

TP_TOL = 1e-9
CLASSICAL_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A CPTP map ``rho -> sum_k K_k rho K_k^dag``."""

    kraus: tuple

    def __post_init__(self):
        ops = [as_matrix(k, f"kraus[{i}]") for i, k in enumerate(self.kraus)]
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        for i, k in enumerate(ops):
            if k.shape != shape:
                raise DimensionError(f"kraus[{i}] has shape {k.shape}, expected {shape}")
        stack = np.stack(ops)
        tp = np.einsum("kji,kjl->il", stack.conj(), stack)
        err = np.max(np.abs(tp - np.eye(shape[1])))
        if err > TP_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (max deviation {err:.3e})")
        object.__setattr__(self, "kraus", tuple(_freeze(k) for k in ops))

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def stack(self) -> np.ndarray:
        return np.stack(self.kraus)

    def act(self, op: np.ndarray) -> np.ndarray:
        """Apply the channel to an arbitrary (not necessarily positive) operator."""
        k = self.stack
        return np.einsum("kij,jl,kml->im", k, op, k.conj())

    def __call__(self, rho):
        return apply(self, rho)

    def __repr__(self):
        return f"QuantumChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, n_kraus={len(self.kraus)})"

    @classmethod
    def identity(cls, d: int) -> "QuantumChannel":
        return cls((np.eye(d),))

    @classmethod
    def unitary(cls, u) -> "QuantumChannel":
        return cls((np.asarray(u),))


def apply(ch: QuantumChannel, rho) -> np.ndarray:
    """Output state of ``ch`` on the density operator ``rho``."""
    rho = as_density(rho, "rho")
    if rho.shape[0] != ch.dim_in:
        raise DimensionError(f"state has dimension {rho.shape[0]}, channel expects {ch.dim_in}")
    out = ch.act(rho)
    return (out + out.conj().T) / 2


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    op: np.ndarray
    dim_in: int
    dim_out: int
    input_basis: Observable

    def __post_init__(self):
        object.__setattr__(self, "op", _freeze(self.op))


def choi_matrix(ch: QuantumChannel, input_basis: Observable | None = None) -> np.ndarray:
    """Raw Choi array ``sum_kk' E(|b_k><b_k'|) (x) |b_k><b_k'|``."""
    d = ch.dim_in
    b = np.eye(d, dtype=complex) if input_basis is None else input_basis.eigenvectors
    if b.shape[0] != d:
        raise DimensionError(f"input basis has dimension {b.shape[0]}, channel input is {d}")
    # |Omega_b> = sum_k |b_k>|b_k>; (E (x) I) acting on it via the Kraus operators
    omega = np.einsum("ki,kj->ij", b, b).reshape(-1)
    k = ch.stack
    vecs = np.einsum("aij,jl->ail", k, omega.reshape(d, d)).reshape(len(k), -1)
    return vecs.T @ vecs.conj()


def choi_of(ch: QuantumChannel, input_basis: Observable | None = None) -> ChoiMatrix:
    basis = Observable.computational(ch.dim_in) if input_basis is None else input_basis
    return ChoiMatrix(choi_matrix(ch, basis), ch.dim_in, ch.dim_out, basis)


def channel_from_choi(choi: np.ndarray, dim_in: int, dim_out: int, tol: float = 1e-12) -> QuantumChannel:
    """Kraus operators from the eigendecomposition of a computational-basis Choi matrix."""
    w, v = eigh(choi)
    kraus = []
    for lam, vec in zip(w[::-1], v.T[::-1]):
        if lam <= tol:
            break
        kraus.append(np.sqrt(lam) * vec.reshape(dim_out, dim_in))
    return QuantumChannel(tuple(kraus))


@dataclass(frozen=True, eq=False)
class StinespringIsometry:
    """``V = sum_k K_k (x) |k>_E`` mapping input to output (x) environment."""

    v: np.ndarray
    dim_out: int
    dim_env: int

    def __post_init__(self):
        object.__setattr__(self, "v", _freeze(self.v))

    @property
    def dim_in(self) -> int:
        return self.v.shape[1]

    def channel_action(self, rho: np.ndarray) -> np.ndarray:
        return partial_trace(self.v @ rho @ self.v.conj().T, (self.dim_out, self.dim_env), [0])

    def complement_action(self, rho: np.ndarray) -> np.ndarray:
        return partial_trace(self.v @ rho @ self.v.conj().T, (self.dim_out, self.dim_env), [1])


def stinespring_of(ch: QuantumChannel) -> StinespringIsometry:
    k = ch.stack
    n = len(k)
    v = np.transpose(k, (1, 0, 2)).reshape(ch.dim_out * n, ch.dim_in)
    return StinespringIsometry(v, ch.dim_out, n)


def complement_of(ch: QuantumChannel) -> QuantumChannel:
    """Channel to the canonical (Kraus-index) environment."""
    k = ch.stack
    return QuantumChannel(tuple(k[:, b, :] for b in range(ch.dim_out)))


def compose(f: QuantumChannel, g: QuantumChannel) -> QuantumChannel:
    """``f o g``: apply ``g`` first."""
    if g.dim_out != f.dim_in:
        raise DimensionError(f"cannot compose: inner output {g.dim_out} != outer input {f.dim_in}")
    return QuantumChannel(tuple(fi @ gj for fi in f.kraus for gj in g.kraus))


def tensor_channels(f: QuantumChannel, g: QuantumChannel) -> QuantumChannel:
    return QuantumChannel(tuple(np.kron(fi, gj) for fi in f.kraus for gj in g.kraus))


def mixture(channels: Sequence[QuantumChannel], weights: Sequence[float]) -> QuantumChannel:
    """Convex combination of channels with equal input/output dims."""
    weights = np.asarray(weights, dtype=float)
    if len(channels) != len(weights) or np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise ValueError("weights must be a probability vector matching the channels")
    d = {(c.dim_in, c.dim_out) for c in channels}
    if len(d) != 1:
        raise DimensionError(f"channels have differing dimensions {sorted(d)}")
    return QuantumChannel(
        tuple(np.sqrt(w) * k for c, w in zip(channels, weights) if w > 0 for k in c.kraus)
    )


def channels_equal(e1: QuantumChannel, e2: QuantumChannel, tol: float = 1e-9) -> bool:
    """Compare actions on a Hermitian spanning set of the input space."""
    if (e1.dim_in, e1.dim_out) != (e2.dim_in, e2.dim_out):
        return False
    return all(
        np.max(np.abs(e1.act(h) - e2.act(h))) <= tol for h in matrix_units_hermitian(e1.dim_in)
    )


def pinch(z: Observable) -> QuantumChannel:
    """Nonselective ideal measurement ``rho -> sum_z Q_z rho Q_z``."""
    return QuantumChannel(tuple(z.projectors()))


def constant_channel(sigma, dim_in: int) -> QuantumChannel:
    """``rho -> Tr[rho] sigma``."""
    sigma = as_density(sigma, "sigma")
    w, v = eigh(sigma)
    kraus = [
        np.sqrt(lam) * np.outer(v[:, i], ket(j, dim_in))
        for i, lam in enumerate(w)
        if lam > 0
        for j in range(dim_in)
    ]
    return QuantumChannel(tuple(kraus))


def conditional_preparation(states: Sequence) -> QuantumChannel:
    """Classical input ``|x><x|`` to ``rho_x (x) |x><x|``; coherences are discarded."""
    states = [as_density(s, f"states[{i}]") for i, s in enumerate(states)]
    if not states:
        raise ValueError("need at least one prepared state")
    dr = states[0].shape[0]
    for i, s in enumerate(states):
        if s.shape[0] != dr:
            raise DimensionError(f"states[{i}] has dimension {s.shape[0]}, expected {dr}")
    n = len(states)
    kraus = []
    for x, s in enumerate(states):
        w, v = eigh(s)
        for i, lam in enumerate(w):
            if lam > 0:
                kraus.append(np.sqrt(lam) * np.outer(np.kron(v[:, i], ket(x, n)), ket(x, n)))
    return QuantumChannel(tuple(kraus))


# -- apparatuses -----------------------------------------------------------

QUANTUM = "quantum"
CLASSICAL = "classical"


@dataclass(frozen=True)
class OutputFactor:
    name: str
    dim: int
    kind: str = QUANTUM
    labels: tuple | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"factor {self.name!r} must have positive dimension")
        if self.kind not in (QUANTUM, CLASSICAL):
            raise ValueError(f"factor {self.name!r}: kind must be 'quantum' or 'classical'")
        if self.kind == CLASSICAL:
            labels = tuple(range(self.dim)) if self.labels is None else tuple(self.labels)
            if len(labels) != self.dim or len(set(labels)) != self.dim:
                raise ValueError(f"factor {self.name!r} needs {self.dim} distinct labels")
            object.__setattr__(self, "labels", labels)

    @property
    def label_basis(self) -> Observable:
        return Observable.computational(self.dim, self.labels)


@dataclass(frozen=True, eq=False)
class Apparatus:
    """A channel whose output splits into named quantum and classical registers.

    Classical registers must come out diagonal in their label basis for
    every input; this is checked on a Hermitian spanning set.
    """

    channel: QuantumChannel
    output_factors: tuple

    def __post_init__(self):
        factors = tuple(self.output_factors)
        object.__setattr__(self, "output_factors", factors)
        names = [f.name for f in factors]
        if len(set(names)) != len(names):
            raise ValueError(f"output factor names must be unique, got {names}")
        if int(np.prod(self.dims)) != self.channel.dim_out:
            raise DimensionError(
                f"output factor dims {self.dims} do not multiply to channel output {self.channel.dim_out}"
            )
        for f in factors:
            if f.kind != CLASSICAL:
                continue
            ch = self.marginal([f.name])
            for h in matrix_units_hermitian(self.channel.dim_in):
                out = ch.act(h)
                off = np.max(np.abs(out - np.diag(np.diag(out))))
                if off > CLASSICAL_TOL:
                    raise ValueError(
                        f"classical factor {f.name!r} carries coherence {off:.3e} for some input"
                    )

    @property
    def dims(self) -> tuple:
        return tuple(f.dim for f in self.output_factors)

    @property
    def dim_in(self) -> int:
        return self.channel.dim_in

    def factor_index(self, name: str) -> int:
        for i, f in enumerate(self.output_factors):
            if f.name == name:
                return i
        raise KeyError(f"apparatus has no output factor named {name!r}")

    def factor(self, name: str) -> OutputFactor:
        return self.output_factors[self.factor_index(name)]

    @property
    def classical_factors(self) -> list:
        return [f for f in self.output_factors if f.kind == CLASSICAL]

    def marginal(self, keep: Sequence[str]) -> QuantumChannel:
        """The channel to the listed factors (in apparatus order), others traced out."""
        idx = sorted(self.factor_index(n) for n in keep)
        dims = self.dims
        k = self.channel.stack
        nk = len(k)
        t = k.reshape((nk,) + dims + (self.dim_in,))
        drop = [i for i in range(len(dims)) if i not in idx]
        # move traced factors next to the Kraus index and fold them into it
        t = np.moveaxis(t, [1 + i for i in drop], list(range(1, 1 + len(drop))))
        d_keep = int(np.prod([dims[i] for i in idx])) if idx else 1
        t = t.reshape(-1, d_keep, self.dim_in)
        return QuantumChannel(tuple(t))

    def __repr__(self):
        fs = ", ".join(f"{f.name}:{f.kind[0]}{f.dim}" for f in self.output_factors)
        return f"Apparatus(dim_in={self.dim_in}, factors=[{fs}])"


def ideal_measurement(x: Observable, name: str = "X") -> Apparatus:
    """``rho -> sum_x <phi_x|rho|phi_x> |x><x|``.

    Kraus operators come from ``W = sum_x Q(x) (x) |x> (x) |x>'`` with the
    system and primed copy as environment, in that order.
    """
    d = x.dim
    kraus = []
    for s in range(d):
        for xp in range(d):
            kraus.append(np.outer(ket(xp, d), x.eigenvectors[xp][s] * x.eigenvectors[xp].conj()))
    return Apparatus(QuantumChannel(tuple(kraus)), (OutputFactor(name, d, CLASSICAL, x.labels),))


def luders_apparatus(x: Observable, name: str = "X", quantum_name: str = "R") -> Apparatus:
    """``rho -> sum_x Q(x) rho Q(x) (x) |x><x|``."""
    d = x.dim
    kraus = tuple(np.kron(x.projector(i), ket(i, d)[:, None]) for i in range(d))
    return Apparatus(
        QuantumChannel(kraus),
        (OutputFactor(quantum_name, d), OutputFactor(name, d, CLASSICAL, x.labels)),
    )


def joint_apparatus(kraus_xz, x_labels=None, z_labels=None) -> Apparatus:
    """Joint measurement device from operators ``M[x][z]: S -> R``.

    Output registers are ``R`` (quantum), ``X`` and ``Z`` (classical).
    """
    rows = [[as_matrix(m, f"kraus_xz[{i}][{j}]") for j, m in enumerate(row)] for i, row in enumerate(kraus_xz)]
    nx = len(rows)
    if nx == 0 or any(len(r) != len(rows[0]) for r in rows) or len(rows[0]) == 0:
        raise DimensionError("kraus_xz must be a nonempty rectangular array of matrices")
    nz = len(rows[0])
    shape = rows[0][0].shape
    for i, r in enumerate(rows):
        for j, m in enumerate(r):
            if m.shape != shape:
                raise DimensionError(f"kraus_xz[{i}][{j}] has shape {m.shape}, expected {shape}")
    total = sum(m.conj().T @ m for r in rows for m in r)
    err = np.max(np.abs(total - np.eye(shape[1])))
    if err > TP_TOL:
        raise ValueError(f"kraus_xz violates completeness sum M^dag M = I (max deviation {err:.3e})")
    x_labels = tuple(range(nx)) if x_labels is None else tuple(x_labels)
    z_labels = tuple(range(nz)) if z_labels is None else tuple(z_labels)
    kraus = tuple(
        np.kron(rows[i][j], np.kron(ket(i, nx), ket(j, nz))[:, None])
        for i in range(nx)
        for j in range(nz)
    )
    factors = (
        OutputFactor("R", shape[0]),
        OutputFactor("X", nx, CLASSICAL, x_labels),
        OutputFactor("Z", nz, CLASSICAL, z_labels),
    )
    return Apparatus(QuantumChannel(kraus), factors)
