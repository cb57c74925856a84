"""Channel-distinguishability SDPs.

Every formulation is the trace-norm-of-Choi program: minimize the operator
norm of ``Tr_out R`` over ``R >= 0`` with ``R >= Choi(E1 - E2)``. Its
conic dual, carried by the LMI multipliers, maximizes ``Tr[Choi Y]`` over
``0 <= Y <= 1 (x) rho``. Distances are half diamond norms, so they lie in
[0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..channels import Apparatus, QuantumChannel, choi_matrix, ideal_measurement
from ..opcore import DimensionError, Observable, eigh, partial_trace, permute_factors, psd_part, psd_sqrt
from .hermitian import LmiBuilder, LmiSolution
from .solver import SolverOptions


@dataclass(frozen=True, eq=False)
class DiamondResult:
    """``delta`` is certified from below by ``primal_rho``/``primal_Y``, ``dual_value`` from above by ``dual_R``."""

    delta: float
    dual_value: float
    primal_Y: np.ndarray = field(repr=False)
    primal_rho: np.ndarray = field(repr=False)
    dual_R: np.ndarray = field(repr=False)
    solution: LmiSolution = field(repr=False)

    @property
    def gap(self) -> float:
        return self.dual_value - self.delta

    def summary(self) -> dict:
        raw = self.solution.raw
        return {
            "delta": self.delta,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "iterations": raw.iterations,
            "status": raw.status,
        }


@dataclass(frozen=True, eq=False)
class ConstantFit:
    delta: float
    dual_value: float
    sigma: np.ndarray = field(repr=False)
    solution: LmiSolution = field(repr=False)

    def summary(self) -> dict:
        raw = self.solution.raw
        return {"delta": self.delta, "dual_value": self.dual_value, "gap": self.dual_value - self.delta,
                "iterations": raw.iterations, "status": raw.status}


@dataclass(frozen=True, eq=False)
class MeasPrepFit:
    delta: float
    dual_value: float
    prep_states: list = field(repr=False)
    solution: LmiSolution = field(repr=False)

    def __iter__(self):
        return iter((self.delta, self.prep_states))

    def summary(self) -> dict:
        raw = self.solution.raw
        return {"delta": self.delta, "dual_value": self.dual_value, "gap": self.dual_value - self.delta,
                "iterations": raw.iterations, "status": raw.status}


@dataclass(frozen=True, eq=False)
class RecoveryFit:
    delta: float
    dual_value: float
    povm: list = field(repr=False)
    solution: LmiSolution = field(repr=False)

    def __iter__(self):
        return iter((self.delta, self.povm))

    def summary(self) -> dict:
        raw = self.solution.raw
        return {"delta": self.delta, "dual_value": self.dual_value, "gap": self.dual_value - self.delta,
                "iterations": raw.iterations, "status": raw.status}


def _clip01(v: float) -> float:
    return float(min(1.0, max(0.0, v)))


def _state(rho: np.ndarray) -> np.ndarray:
    rho = psd_part(rho)
    tr = np.trace(rho).real
    return rho / tr if tr > 0 else np.eye(rho.shape[0]) / rho.shape[0]


def _distance_lmi(dim_in: int, dim_out: int):
    """Blocks and variables shared by all formulations.

    Returns the builder, the norm block, the ``R - Choi`` block and the
    ``R`` variable. Callers add ``-Choi`` terms to the second block.
    """
    n = dim_in * dim_out
    lmi = LmiBuilder()
    b_norm = lmi.block(dim_in, "t*1 - Tr_out R")
    b_dom = lmi.block(n, "R - Choi")
    b_pos = lmi.block(n, "R")
    t = lmi.scalar(1.0, {b_norm: np.eye(dim_in)})
    r = lmi.hermitian(
        n,
        {
            b_norm: lambda h: -partial_trace(h, (dim_out, dim_in), [1]),
            b_dom: lambda h: h,
            b_pos: lambda h: h,
        },
    )
    return lmi, b_norm, b_dom, t, r


def choi_trace_distance_lower(choi_diff: np.ndarray, rho: np.ndarray, dim_out: int):
    """Bias achieved with input ``rho`` purified on an equal-size reference.

    Returns the value and the optimal ``Y`` for that input, which is
    feasible for the maximization form.
    """
    root = np.kron(np.eye(dim_out), psd_sqrt(rho))
    m = root @ choi_diff @ root
    w, v = eigh(m)
    pos = w > 0
    y = root @ (v[:, pos] @ v[:, pos].conj().T) @ root
    return float(np.sum(w[pos])), y


def diamond_distance(
    e1: QuantumChannel,
    e2: QuantumChannel,
    options: SolverOptions | None = None,
    input_basis: Observable | None = None,
) -> DiamondResult:
    """Optimal distinguishing bias ``1/2 ||E1 - E2||_diamond``."""
    if (e1.dim_in, e1.dim_out) != (e2.dim_in, e2.dim_out):
        raise DimensionError(
            f"channel dims differ: ({e1.dim_in}->{e1.dim_out}) vs ({e2.dim_in}->{e2.dim_out})"
        )

    din, dout = e1.dim_in, e1.dim_out
    j = choi_matrix(e1, input_basis) - choi_matrix(e2, input_basis)
    lmi, _, b_dom, _, r = _distance_lmi(din, dout)
    lmi.add_constant(b_dom, -j)
    sol = lmi.solve(options, "diamond-norm")

    rho = _state(sol.multipliers[0])
    lower, y = choi_trace_distance_lower(j, rho, dout)
    rmat = sol.value(r)
    shift = max(0.0, -eigh(rmat - j)[0][0], -eigh(rmat)[0][0])
    rmat = rmat + shift * np.eye(rmat.shape[0])
    upper = float(eigh(partial_trace(rmat, (dout, din), [1]))[0][-1])
    return DiamondResult(_clip01(lower), upper, y, rho, rmat, sol)


def min_constant_distance(e: QuantumChannel, options: SolverOptions | None = None) -> ConstantFit:
    """Distance from ``e`` to the closest channel with constant output, jointly over the output."""
    din, dout = e.dim_in, e.dim_out
    j = choi_matrix(e)
    lmi, _, b_dom, _, _ = _distance_lmi(din, dout)
    lmi.add_constant(b_dom, -j)
    b_sigma = lmi.block(dout, "sigma")
    eye_in = np.eye(din)
    sigma = lmi.hermitian(
        dout,
        {b_dom: lambda h: np.kron(h, eye_in), b_sigma: lambda h: h},
        traceless=True,
        offset=np.eye(dout) / dout,
    )
    sol = lmi.solve(options, "constant-fit")
    return ConstantFit(_clip01(sol.max_value), sol.min_value, _state(sol.value(sigma)), sol)


def _classical_register(a: Apparatus, register: str | None):
    classical = a.classical_factors
    if register is None:
        if len(classical) != 1:
            raise ValueError(
                f"apparatus has {len(classical)} classical factors; name the register to use"
            )
        return classical[0]
    f = a.factor(register)
    if f.kind != "classical":
        raise ValueError(f"output factor {register!r} is not classical")
    return f


def measprep_choi_terms(a: Apparatus, x: Observable, register: str | None = None):
    """Choi of ``P o Q_X`` is linear in the prepared states.

    Returns ``(dim_rest, term)`` where ``term(x_index, rho)`` is the Choi
    contribution of preparing ``rho`` on outcome ``x_index``, laid out in
    the apparatus output order with the register at its position.
    """
    f = _classical_register(a, register)
    if f.dim != x.dim:
        raise DimensionError(f"register {f.name!r} has {f.dim} labels, observable has dimension {x.dim}")
    if a.dim_in != x.dim:
        raise DimensionError(f"apparatus input {a.dim_in} != observable dimension {x.dim}")
    dims = list(a.dims)
    c = a.factor_index(f.name)
    rest = dims[:c] + dims[c + 1 :]
    d_rest = int(np.prod(rest)) if rest else 1
    d = x.dim
    # (rest..., register) -> apparatus order
    order = list(range(c)) + [len(dims) - 1] + list(range(c, len(dims) - 1))
    src_dims = rest + [d]
    conj_proj = [x.projector(i).conj() for i in range(d)]

    def term(i: int, rho: np.ndarray) -> np.ndarray:
        reg = np.zeros((d, d), dtype=complex)
        reg[i, i] = 1
        out = np.kron(rho, reg)
        if len(src_dims) > 1:
            out = permute_factors(out, src_dims, order)
        return np.kron(out, conj_proj[i])

    return d_rest, term


def min_measprep_distance(
    a: Apparatus, x: Observable, register: str | None = None, options: SolverOptions | None = None
) -> MeasPrepFit:
    """Distance from ``a`` to the closest measure-then-prepare device ``P o Q_X``."""
    d_rest, term = measprep_choi_terms(a, x, register)
    din, dout = a.dim_in, a.channel.dim_out
    j = choi_matrix(a.channel)
    lmi, _, b_dom, _, _ = _distance_lmi(din, dout)
    lmi.add_constant(b_dom, -j)
    states = []
    for i in range(x.dim):
        if d_rest == 1:
            lmi.add_constant(b_dom, term(i, np.eye(1)))
            states.append(None)
            continue
        b_state = lmi.block(d_rest, f"rho_{i}")
        states.append(
            lmi.hermitian(
                d_rest,
                {b_dom: (lambda h, i=i: term(i, h)), b_state: lambda h: h},
                traceless=True,
                offset=np.eye(d_rest) / d_rest,
            )
        )
    sol = lmi.solve(options, "measure-prepare fit")
    preps = [np.eye(1, dtype=complex) if s is None else _state(sol.value(s)) for s in states]
    return MeasPrepFit(_clip01(sol.max_value), sol.min_value, preps, sol)


def recovery_choi_term(n: QuantumChannel, d: int):
    """Choi of ``rho -> sum_x Tr[L_x N(rho)] |x><x|`` as a linear map of each ``L_x``."""
    jn = choi_matrix(n)
    m, din = n.dim_out, n.dim_in

    def term(i: int, el: np.ndarray) -> np.ndarray:
        reg = np.zeros((d, d), dtype=complex)
        reg[i, i] = 1
        reduced = partial_trace(np.kron(el, np.eye(din)) @ jn, (m, din), [1])
        return np.kron(reg, reduced)

    return term


def min_recovery_measurement(
    n: QuantumChannel, x: Observable, options: SolverOptions | None = None
) -> RecoveryFit:
    """Best POVM ``L`` on the output of ``n`` to imitate the ideal X measurement."""
    d = x.dim
    if n.dim_in != d:
        raise DimensionError(f"channel input {n.dim_in} != observable dimension {d}")
    m, din = n.dim_out, n.dim_in
    term = recovery_choi_term(n, d)
    jq = choi_matrix(ideal_measurement(x).channel)
    lmi, _, b_dom, _, _ = _distance_lmi(din, d)
    lmi.add_constant(b_dom, -jq)
    b_last = lmi.block(m, f"L_{d - 1}")
    lmi.add_constant(b_last, np.eye(m))
    lmi.add_constant(b_dom, term(d - 1, np.eye(m)))
    elements = []
    for i in range(d - 1):
        b_el = lmi.block(m, f"L_{i}")
        elements.append(
            lmi.hermitian(
                m,
                {
                    b_dom: (lambda h, i=i: term(i, h) - term(d - 1, h)),
                    b_el: lambda h: h,
                    b_last: lambda h: -h,
                },
            )
        )
    sol = lmi.solve(options, "recovery-measurement fit")
    povm = [sol.value(v) for v in elements]
    povm.append(np.eye(m) - sum(povm, np.zeros((m, m), dtype=complex)))
    return RecoveryFit(_clip01(sol.max_value), sol.min_value, povm, sol)


def sampled_lower_bound(
    e1: QuantumChannel, e2: QuantumChannel, n_samples: int, rng: np.random.Generator
) -> float:
    """Best bias over random pure inputs entangled with an equal-size reference."""
    d = e1.dim_in
    k1, k2 = e1.stack, e2.stack
    best = 0.0
    for _ in range(n_samples):
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m /= np.linalg.norm(m)
        # psi = sum_ij m[i, j] |i>_in |j>_ref; out = sum_k (K psi)(K psi)^dag
        a1 = np.einsum("koi,ij->koj", k1, m).reshape(len(k1), -1)
        a2 = np.einsum("koi,ij->koj", k2, m).reshape(len(k2), -1)
        diff = a1.T @ a1.conj() - a2.T @ a2.conj()
        best = max(best, 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff)))))
    return best
