"""Error, disturbance, complementarity constants, and checks of the uncertainty relations.

All verdicts use a fixed numerical grace ``GRACE`` so that solver noise
(gaps near 1e-8) is never reported as a violation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    QUANTUM,
    Apparatus,
    QuantumChannel,
    StinespringIsometry,
    complement_of,
    compose,
    ideal_measurement,
    pinch,
    stinespring_of,
)
from .opcore import DimensionError, Observable, overlap_matrix
from .sdp.formulations import (
    _classical_register,
    diamond_distance,
    min_constant_distance,
    min_measprep_distance,
    min_recovery_measurement,
)
from .sdp.solver import SolverOptions

GRACE = 1e-6
RELATIONS = ("jm", "ed", "measprep", "leakage", "stinespring_sandwich")


def _root(v: float) -> float:
    # SDP values can dip a hair below zero
    return float(np.sqrt(max(v, 0.0)))


@dataclass(frozen=True, eq=False)
class ComplementarityPair:
    x: Observable
    z: Observable
    overlaps: np.ndarray = field(repr=False)
    r_xz: float
    r_zx: float
    c1: float
    c2_xz: float
    c2_zx: float

    def to_dict(self) -> dict:
        return {
            "dim": self.x.dim,
            "overlaps": self.overlaps.tolist(),
            "r_xz": self.r_xz,
            "r_zx": self.r_zx,
            "c1": self.c1,
            "c2_xz": self.c2_xz,
            "c2_zx": self.c2_zx,
        }


def _r(o: np.ndarray) -> float:
    """``(1 - min_x max_z O[x, z]) / sqrt 2`` for rows indexed by x."""
    return float((1.0 - np.min(np.max(o, axis=1))) / np.sqrt(2))


def _c2(o: np.ndarray) -> float:
    """``1 - max_z sum_x {1/d - O[x, z]}_+``."""
    d = o.shape[0]
    return float(1.0 - np.max(np.sum(np.maximum(1.0 / d - o, 0.0), axis=0)))


def complementarity(x: Observable, z: Observable) -> ComplementarityPair:
    o = overlap_matrix(x, z)
    o.setflags(write=False)
    r_xz, r_zx = _r(o), _r(o.T)
    return ComplementarityPair(x, z, o, r_xz, r_zx, max(r_xz, r_zx), _c2(o), _c2(o.T))


# -- device quantities -----------------------------------------------------


def _cert(name: str, res) -> dict:
    raw = res.solution.raw
    return {
        "name": name,
        "status": raw.status,
        "iterations": raw.iterations,
        "lower": res.delta,
        "upper": res.dual_value,
    }


def _error_fit(a: Apparatus, x: Observable, register: str | None, options):
    f = _classical_register(a, register)
    if f.dim != x.dim:
        raise DimensionError(f"register {f.name!r} has {f.dim} outcomes, observable has dimension {x.dim}")
    if a.dim_in != x.dim:
        raise DimensionError(f"apparatus input {a.dim_in} != observable dimension {x.dim}")
    return diamond_distance(a.marginal([f.name]), ideal_measurement(x).channel, options)


def error(a: Apparatus, x: Observable, register: str | None = None, options: SolverOptions | None = None) -> float:
    """Distance between the outcome marginal on ``register`` and the ideal X measurement.

    Outcome ``i`` of the register is read as outcome ``i`` of ``x``.
    """
    return _error_fit(a, x, register, options).delta


def _disturbance_fit(a: Apparatus, z: Observable, options):
    if a.dim_in != z.dim:
        raise DimensionError(f"apparatus input {a.dim_in} != observable dimension {z.dim}")
    return min_constant_distance(compose(a.channel, pinch(z)), options)


def disturbance(a: Apparatus, z: Observable, options: SolverOptions | None = None) -> float:
    """One minus the distance from ``A o pinch(Z)`` to the nearest constant channel."""
    return 1.0 - _disturbance_fit(a, z, options).delta


# -- verification reports --------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    relation: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    components: dict
    certificate_refs: list

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
            "components": dict(self.components),
            "certificate_refs": list(self.certificate_refs),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        missing = {"relation", "lhs", "rhs", "slack", "pass", "components", "certificate_refs"} - set(d)
        if missing:
            raise ValueError(f"report is missing fields {sorted(missing)}")
        if d["relation"] not in RELATIONS:
            raise ValueError(f"unknown relation {d['relation']!r}")
        return cls(
            d["relation"],
            float(d["lhs"]),
            float(d["rhs"]),
            float(d["slack"]),
            bool(d["pass"]),
            dict(d["components"]),
            list(d["certificate_refs"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))


def _report(relation, lhs, rhs, slack, components, certs) -> VerificationReport:
    return VerificationReport(relation, lhs, rhs, slack, bool(slack >= -GRACE), components, certs)


def verify_jm(
    a: Apparatus, x: Observable, z: Observable, options: SolverOptions | None = None,
    x_register: str = "X", z_register: str = "Z",
) -> VerificationReport:
    """Joint measurement: ``sqrt(eps_X) + sqrt(eps_Z) >= c1``."""
    comp = complementarity(x, z)
    fx = _error_fit(a, x, x_register, options)
    fz = _error_fit(a, z, z_register, options)
    lhs = _root(fx.delta) + _root(fz.delta)
    components = {"eps_x": fx.delta, "eps_z": fz.delta, "r_xz": comp.r_xz, "r_zx": comp.r_zx, "c1": comp.c1}
    return _report("jm", lhs, comp.c1, lhs - comp.c1, components, [_cert("eps_x", fx), _cert("eps_z", fz)])


def verify_ed(
    a: Apparatus, x: Observable, z: Observable, register: str | None = None,
    options: SolverOptions | None = None,
) -> VerificationReport:
    """Error versus disturbance: ``sqrt 2 sqrt(eps_X) + eta_Z >= c2(X;Z)``."""
    if not any(f.kind == QUANTUM for f in a.output_factors):
        raise ValueError("apparatus has no quantum output factor")
    comp = complementarity(x, z)
    fx = _error_fit(a, x, register, options)
    fc = _disturbance_fit(a, z, options)
    eta = 1.0 - fc.delta
    lhs = np.sqrt(2) * _root(fx.delta) + eta
    components = {"eps_x": fx.delta, "eta_z": eta, "delta_constant": fc.delta, "c2": comp.c2_xz}
    return _report("ed", float(lhs), comp.c2_xz, float(lhs) - comp.c2_xz, components,
                   [_cert("eps_x", fx), _cert("delta_constant", fc)])


def verify_measprep(
    a: Apparatus, x: Observable, register: str | None = None, options: SolverOptions | None = None
) -> VerificationReport:
    """Measure-prepare approximation: ``min_P delta(A, P o Q_X) <= sqrt(2 eps_X)``."""
    fx = _error_fit(a, x, register, options)
    fm = min_measprep_distance(a, x, register, options)
    lhs = _root(2 * fx.delta)
    components = {"eps_x": fx.delta, "delta_measprep": fm.delta}
    return _report("measprep", lhs, fm.delta, lhs - fm.delta, components,
                   [_cert("eps_x", fx), _cert("delta_measprep", fm)])


def verify_leakage(
    n: QuantumChannel, x: Observable, z: Observable, options: SolverOptions | None = None
) -> VerificationReport:
    """Information leakage: the complement of ``n`` after a Z pinch is close to constant.

    ``lhs = min_C delta(N^c o pinch(Z), C)`` and ``rhs = 2 sqrt(eps) + 1 - c2(X;Z)``
    where ``eps`` is the best error of recovering X from the output of ``n``.
    Slack is ``rhs - lhs`` so that a positive slack always means the bound holds.
    """
    if n.dim_in != x.dim or x.dim != z.dim:
        raise DimensionError(f"channel input {n.dim_in} and observable dims {x.dim}, {z.dim} must agree")
    comp = complementarity(x, z)
    fr = min_recovery_measurement(n, x, options)
    fc = min_constant_distance(compose(complement_of(n), pinch(z)), options)
    rhs = 2 * _root(fr.delta) + 1 - comp.c2_xz
    components = {"eps": fr.delta, "delta_constant": fc.delta, "c2": comp.c2_xz}
    return _report("leakage", fc.delta, rhs, rhs - fc.delta, components,
                   [_cert("eps", fr), _cert("delta_constant", fc)])


# -- Stinespring alignment -------------------------------------------------


@dataclass(frozen=True, eq=False)
class IsometryAlignment:
    u: np.ndarray
    achieved: float
    method: str


def _env_major(v: StinespringIsometry, dim_env: int) -> np.ndarray:
    """Reshape ``V`` to an (environment, output * input) matrix, zero-padding the environment."""
    t = v.v.reshape(v.dim_out, v.dim_env, -1)
    if dim_env > v.dim_env:
        t = np.concatenate([t, np.zeros((v.dim_out, dim_env - v.dim_env, t.shape[2]))], axis=1)
    return np.transpose(t, (1, 0, 2)).reshape(dim_env, -1)


def align_isometries(v1: StinespringIsometry, v2: StinespringIsometry) -> IsometryAlignment:
    """Candidate environment unitary ``U`` making ``(1 (x) U) V1`` close to ``V2``.

    ``U`` is the polar factor of ``M2 M1^dag``, which is optimal in Frobenius
    norm; ``achieved`` is the operator-norm distance it attains. Both
    environments are first padded to a common dimension.
    """
    din = v1.v.shape[1]
    if v2.v.shape[1] != din or v1.dim_out != v2.dim_out:
        raise DimensionError("isometries must share input and output dimensions")
    e = max(v1.dim_env, v2.dim_env)
    m1, m2 = _env_major(v1, e), _env_major(v2, e)
    if m1.shape == m2.shape and np.allclose(m1, m2, rtol=0, atol=1e-14):
        u, method = np.eye(e, dtype=complex), "identity"
    else:
        w, _, vh = np.linalg.svd(m2 @ m1.conj().T)
        u, method = w @ vh, "procrustes"
    diff = (u @ m1 - m2).reshape(e, v1.dim_out, din).transpose(1, 0, 2).reshape(-1, din)
    return IsometryAlignment(u, float(np.linalg.norm(diff, 2)), method)


def verify_stinespring_sandwich(
    e1: QuantumChannel, e2: QuantumChannel, options: SolverOptions | None = None
) -> VerificationReport:
    """Upper half of the Stinespring continuity bound: ``||E1 - E2||_diamond <= 2 ||U V1 - V2||``."""
    al = align_isometries(stinespring_of(e1), stinespring_of(e2))
    fd = diamond_distance(e1, e2, options)
    lhs, rhs = 2 * al.achieved, 2 * fd.dual_value
    components = {"achieved": al.achieved, "delta": fd.delta, "delta_upper": fd.dual_value}
    return _report("stinespring_sandwich", lhs, rhs, lhs - rhs, components, [_cert("delta", fd)])
