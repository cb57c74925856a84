import numpy as np
import pytest

from qdistinguish.channels import channels_equal, ideal_measurement, luders_apparatus
from qdistinguish.devices import (
    FAMILIES,
    depolarized_luders,
    depolarizing,
    family_apparatus,
    mixed_ideal_joint,
    random_apparatus,
    random_channel,
    random_isometry,
    random_joint_apparatus,
    random_state,
    x_dephasing,
    x_measure_z_guess,
)
from qdistinguish.opcore import Observable, matrix_units_hermitian

X2, Z2 = Observable.computational(2), Observable.fourier(2)


def test_families_expose_three_registers():
    for fam in FAMILIES:
        for p in (0.0, 0.4, 1.0):
            a = family_apparatus(fam, X2, Z2, p)
            assert [f.name for f in a.output_factors][-2:] == ["X", "Z"]
            assert a.factor("R").kind == "quantum"
    with pytest.raises(ValueError, match="unknown device family"):
        family_apparatus("nope", X2, Z2, 0.5)
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        family_apparatus("mixed_ideal_joint", X2, Z2, 1.5)


def test_depolarized_luders_endpoints():
    assert channels_equal(depolarized_luders(X2, 0.0).channel, luders_apparatus(X2).channel)
    full = depolarized_luders(X2, 1.0).channel
    for h in matrix_units_hermitian(2):
        assert np.allclose(full.act(h), np.trace(h) * np.eye(4) / 4)


def test_z_guess_register_is_uniform():
    a = depolarized_luders(X2, 0.3, Z2)
    mz = a.marginal(["Z"])
    for h in matrix_units_hermitian(2):
        assert np.allclose(mz.act(h), np.trace(h) * np.eye(2) / 2)
    assert channels_equal(a.marginal(["X"]), depolarized_luders(X2, 0.3).marginal(["X"]))


def test_mixed_ideal_joint_endpoints():
    a0, a1 = mixed_ideal_joint(X2, Z2, 0.0), mixed_ideal_joint(X2, Z2, 1.0)
    assert channels_equal(a0.marginal(["X"]), ideal_measurement(X2).channel)
    assert channels_equal(a1.marginal(["Z"]), ideal_measurement(Z2).channel)


def test_noisy_x_measurement_marginal():
    a = x_measure_z_guess(X2, Z2, 0.2)
    mx = a.marginal(["X"])
    rho = random_state(2, np.random.default_rng(0))
    expected = 0.8 * np.diag(np.diag(rho).real) + 0.2 * np.eye(2) / 2
    assert np.allclose(mx(rho), expected)


def test_simple_channels():
    rho = random_state(2, np.random.default_rng(1))
    assert np.allclose(x_dephasing(X2, 1.0)(rho), np.diag(np.diag(rho)))
    assert np.allclose(depolarizing(2, 1.0)(rho), np.eye(2) / 2)


def test_random_generators_are_seeded_and_valid():
    a = random_channel(2, 3, np.random.default_rng(5))
    b = random_channel(2, 3, np.random.default_rng(5))
    assert all(np.array_equal(k1, k2) for k1, k2 in zip(a.kraus, b.kraus))
    v = random_isometry(6, 2, np.random.default_rng(2))
    assert np.allclose(v.conj().T @ v, np.eye(2))
    rng = np.random.default_rng(3)
    random_joint_apparatus(X2, Z2, rng)
    assert random_apparatus(X2, rng).dims == (2, 2)
    rho = random_state(3, rng, rank=1)
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 1
