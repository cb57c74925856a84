"""Canonical measurement devices, noisy families, and seeded random devices."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .channels import (
    CLASSICAL,
    Apparatus,
    OutputFactor,
    QuantumChannel,
    joint_apparatus,
    ket,
    luders_apparatus,
)
from .opcore import Observable, psd_sqrt

FAMILIES = ("depolarized_luders", "mixed_ideal_joint", "x_measure_z_guess")


def _check_param(p: float) -> float:
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError(f"family parameter must lie in [0, 1], got {p}")
    return p


def x_measure_z_guess(x: Observable, z: Observable, p: float = 0.0) -> Apparatus:
    """Measure X (with white noise ``p``), report a uniformly random Z outcome.

    The quantum output carries the post-measurement state.
    """
    p = _check_param(p)
    d = x.dim
    root = [psd_sqrt((1 - p) * x.projector(i) + p * np.eye(d) / d) / np.sqrt(d) for i in range(d)]
    return joint_apparatus([[root[i]] * d for i in range(d)], x.labels, z.labels)


def mixed_ideal_joint(x: Observable, z: Observable, p: float) -> Apparatus:
    """With probability ``1 - p`` measure X and guess Z; otherwise measure Z and guess X.

    A two-level flag in the quantum output records which branch ran.
    """
    p = _check_param(p)
    d = x.dim
    f0, f1 = ket(0, 2)[:, None], ket(1, 2)[:, None]
    rows = [
        [
            np.sqrt(1 - p) * np.kron(x.projector(i), f0) / np.sqrt(d)
            + np.sqrt(p) * np.kron(z.projector(j), f1) / np.sqrt(d)
            for j in range(d)
        ]
        for i in range(d)
    ]
    return joint_apparatus(rows, x.labels, z.labels)


def depolarized_luders(x: Observable, p: float, z: Observable | None = None) -> Apparatus:
    """Lüders X instrument mixed with the fully depolarizing device at weight ``p``.

    Outputs are ``R`` (quantum) and ``X``; passing ``z`` appends a ``Z``
    register holding a uniformly random guess.
    """
    p = _check_param(p)
    d = x.dim
    base = luders_apparatus(x)
    kraus = [np.sqrt(1 - p) * k for k in base.channel.kraus] if p < 1 else []
    if p > 0:
        for r in range(d):
            for o in range(d):
                for i in range(d):
                    kraus.append(np.sqrt(p) / d * np.outer(np.kron(ket(r, d), ket(o, d)), ket(i, d)))
    factors = list(base.output_factors)
    if z is not None:
        guess = [np.kron(k, ket(j, d)[:, None]) / np.sqrt(d) for k in kraus for j in range(d)]
        kraus = guess
        factors.append(OutputFactor("Z", d, CLASSICAL, z.labels))
    return Apparatus(QuantumChannel(tuple(kraus)), tuple(factors))


def family_apparatus(family: str, x: Observable, z: Observable, p: float) -> Apparatus:
    """Device of a sweep family; every family exposes ``R``, ``X`` and ``Z`` registers."""
    if family == "depolarized_luders":
        return depolarized_luders(x, p, z)
    if family == "mixed_ideal_joint":
        return mixed_ideal_joint(x, z, p)
    if family == "x_measure_z_guess":
        return x_measure_z_guess(x, z, p)
    raise ValueError(f"unknown device family {family!r}; expected one of {FAMILIES}")


def x_dephasing(x: Observable, p: float) -> QuantumChannel:
    """``rho -> (1 - p) rho + p sum_x Q(x) rho Q(x)``."""
    p = _check_param(p)
    kraus = [np.sqrt(1 - p) * np.eye(x.dim)] + [np.sqrt(p) * q for q in x.projectors()]
    return QuantumChannel(tuple(kraus))


def depolarizing(d: int, p: float) -> QuantumChannel:
    """``rho -> (1 - p) rho + p Tr[rho] 1/d``."""
    p = _check_param(p)
    kraus = [np.sqrt(1 - p) * np.eye(d)]
    kraus += [np.sqrt(p / d) * np.outer(ket(i, d), ket(j, d)) for i in range(d) for j in range(d)]
    return QuantumChannel(tuple(kraus))


# -- random instances (all driven by an explicit numpy Generator) ---------


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1), dtype=complex)


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_channel(dim_in: int, dim_out: int, rng: np.random.Generator, n_kraus: int | None = None) -> QuantumChannel:
    n = dim_in * dim_out if n_kraus is None else n_kraus
    v = random_isometry(dim_out * n, dim_in, rng).reshape(dim_out, n, dim_in)
    return QuantumChannel(tuple(v[:, k, :] for k in range(n)))


def random_observable(d: int, rng: np.random.Generator) -> Observable:
    return Observable.from_unitary(random_unitary(d, rng))


def random_joint_apparatus(x: Observable, z: Observable, rng: np.random.Generator) -> Apparatus:
    """Random mixture of a Haar-random joint instrument and the two ideal one-sided devices.

    A three-level flag in the quantum output separates the branches, so the
    weights (Dirichlet distributed) enter the Kraus operators as square roots.
    """
    d = x.dim
    w = rng.dirichlet(np.ones(3))
    v = random_isometry(d * d * d, d, rng).reshape(d, d, d, d)  # (x, z, r, s)
    flags = [ket(k, 3)[:, None] for k in range(3)]
    rows = [
        [
            np.sqrt(w[0]) * np.kron(v[i, j], flags[0])
            + np.sqrt(w[1]) * np.kron(x.projector(i), flags[1]) / np.sqrt(d)
            + np.sqrt(w[2]) * np.kron(z.projector(j), flags[2]) / np.sqrt(d)
            for j in range(d)
        ]
        for i in range(d)
    ]
    return joint_apparatus(rows, x.labels, z.labels)


def random_apparatus(x: Observable, rng: np.random.Generator, dim_env: int = 2) -> Apparatus:
    """Random X-apparatus with outputs ``R`` (dimension d) and ``X``.

    Mixes the Lüders instrument, a Haar-random instrument with a hidden
    environment, and full depolarization with Dirichlet weights.
    """
    d = x.dim
    w = rng.dirichlet(np.ones(3))
    kraus = [np.sqrt(w[0]) * k for k in luders_apparatus(x).channel.kraus]
    v = random_isometry(d * dim_env * d, d, rng).reshape(d, dim_env, d, d)  # (r, e, x, s)
    for e in range(dim_env):
        for o in range(d):
            kraus.append(np.sqrt(w[1]) * np.kron(v[:, e, o, :], ket(o, d)[:, None]))
    for r in range(d):
        for o in range(d):
            for i in range(d):
                kraus.append(np.sqrt(w[2]) / d * np.outer(np.kron(ket(r, d), ket(o, d)), ket(i, d)))
    return Apparatus(QuantumChannel(tuple(kraus)), luders_apparatus(x).output_factors)
