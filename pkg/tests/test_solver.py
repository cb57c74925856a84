import json

import numpy as np
import pytest

from qdistinguish.sdp.hermitian import LmiBuilder, embed, extract, hermitian_basis
from qdistinguish.sdp.solver import SdpProblem, SolverError, SolverOptions, solve


def random_sym(n, rng):
    g = rng.normal(size=(n, n))
    return (g + g.T) / 2


def random_pd(n, rng):
    g = rng.normal(size=(n, n))
    return g @ g.T + 0.1 * np.eye(n)


def random_instance(rng, dims=(3, 2), m=4):
    """Strictly feasible primal and dual by construction."""
    a = [[random_sym(n, rng) for n in dims] for _ in range(m)]
    x0 = [random_pd(n, rng) for n in dims]
    y0 = rng.normal(size=m)
    b = [sum(np.sum(ai[k] * x0[k]) for k in range(len(dims))) for ai in a]
    c = [sum(y0[i] * a[i][k] for i in range(m)) - random_pd(n, rng) for k, n in enumerate(dims)]
    return SdpProblem.from_dense(c, a, b)


def test_operator_norm_lp():
    # max <C, X> with C = diag(1, 2), Tr X = 1  <=>  min t, t I - diag(1, 2) >= 0
    p = SdpProblem.from_dense([np.diag([1.0, 2.0])], [[np.eye(2)]], [1.0])
    sol = solve(p)
    assert sol.optimal
    assert sol.dual_value == pytest.approx(2, abs=1e-7)
    assert sol.primal_value == pytest.approx(2, abs=1e-7)


def test_eigenvalue_truncation():
    # max Tr[C Y], 0 <= Y <= I: slack block Z = I - Y
    c = [np.diag([1.0, -1.0]), np.zeros((2, 2))]
    a, b = [], []
    for i in range(2):
        for j in range(i, 2):
            e = np.zeros((2, 2))
            e[i, j] = e[j, i] = 1 if i == j else 0.5
            a.append([e, e])
            b.append(1.0 if i == j else 0.0)
    sol = solve(SdpProblem.from_dense(c, a, b))
    assert sol.optimal
    assert sol.primal_value == pytest.approx(1, abs=1e-7)
    assert np.allclose(sol.x[0], np.diag([1, 0]), atol=1e-6)


def test_weak_duality_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        sol = solve(random_instance(rng))
        assert sol.optimal
        assert sol.primal_value <= sol.dual_value + 1e-9
        assert sol.rel_gap <= 1e-8
        assert sol.primal_infeasibility <= 1e-8 and sol.dual_infeasibility <= 1e-8
        for x, s in zip(sol.x, sol.s):
            assert np.min(np.linalg.eigvalsh(x)) > -1e-9
            assert np.min(np.linalg.eigvalsh(s)) > -1e-9


def test_max_iterations_status_and_error():
    rng = np.random.default_rng(1)
    sol = solve(random_instance(rng), SolverOptions(max_iter=2))
    assert sol.status == "max_iterations"
    lmi = LmiBuilder()
    blk = lmi.block(2)
    lmi.add_constant(blk, -np.diag([1.0, 2.0]))
    lmi.scalar(1.0, {blk: np.eye(2)})
    with pytest.raises(SolverError) as info:
        lmi.solve(SolverOptions(max_iter=1))
    assert info.value.solution is not None


def test_problem_validation():
    with pytest.raises(ValueError, match="symmetric"):
        SdpProblem.from_dense([np.array([[0.0, 1.0], [0.0, 0.0]])], [[np.eye(2)]], [1.0])
    with pytest.raises(ValueError):
        SdpProblem((0,), (np.zeros((0, 0)),), (np.zeros((1, 0)),), [1.0])


def test_json_dumps_are_decimal():
    p = random_instance(np.random.default_rng(3))
    doc = json.loads(p.to_json())
    assert doc["block_dims"] == [3, 2]
    sol = solve(p)
    dump = json.loads(sol.to_json())
    assert dump["status"] == "optimal"
    assert dump["primal_value"] == pytest.approx(sol.primal_value)


def test_embedding_round_trip():
    rng = np.random.default_rng(4)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = g + g.conj().T
    assert np.allclose(extract(embed(h)), h)
    k = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    k = k + k.conj().T
    # real inner product of embeddings is twice Re Tr
    assert np.sum(embed(h) * embed(k)) == pytest.approx(2 * np.trace(h @ k).real)
    for traceless in (False, True):
        basis = hermitian_basis(3, traceless)
        gram = np.einsum("aij,bji->ab", basis, basis).real
        assert np.allclose(gram, np.eye(len(basis)))
        assert len(basis) == 9 - traceless


def test_embedding_preserves_values():
    rng = np.random.default_rng(5)
    for _ in range(10):
        p = random_instance(rng, dims=(2,), m=3)
        direct = solve(p)
        lmi = LmiBuilder()
        blk = lmi.block(2)
        lmi.add_constant(blk, -p.c[0])
        rows = p.a[0].toarray().reshape(p.m, 2, 2)
        for i in range(p.m):
            lmi.scalar(p.b[i], {blk: rows[i]})
        via = lmi.solve()
        # both runs stop at relative gap 1e-8, so compare on that scale
        tol = 2e-8 * (1 + 2 * abs(direct.dual_value))
        assert via.min_value == pytest.approx(direct.dual_value, abs=tol)
        assert via.max_value == pytest.approx(direct.primal_value, abs=tol)


def test_complex_lmi_gives_largest_eigenvalue():
    rng = np.random.default_rng(6)
    for _ in range(10):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = g + g.conj().T
        lmi = LmiBuilder()
        blk = lmi.block(2)
        lmi.add_constant(blk, -h)
        lmi.scalar(1.0, {blk: np.eye(2)})
        sol = lmi.solve()
        assert sol.min_value == pytest.approx(np.linalg.eigvalsh(h)[-1], abs=1e-7)
        # multiplier is the top eigenprojector
        assert np.trace(sol.multipliers[0]).real == pytest.approx(1, abs=1e-7)
