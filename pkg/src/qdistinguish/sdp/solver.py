"""Dense primal-dual interior-point solver for small semidefinite programs.

Standard form, with ``X`` block diagonal real symmetric::

    (P)  maximize  <C, X>    s.t.  <A_i, X> = b_i,  X >= 0
    (D)  minimize  b . y     s.t.  S = sum_i y_i A_i - C >= 0

Weak duality reads ``b.y - <C, X> = <S, X> >= 0`` for feasible pairs.
The iteration is an infeasible-start Mehrotra predictor-corrector method
with Nesterov-Todd scaling and a dense Cholesky-factored Schur complement.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
MAX_ITERATIONS = "max_iterations"
NUMERICAL_FAILURE = "numerical_failure"

# Kronecker-product Schur assembly is used up to this block order
_KRON_MAX_ORDER = 64
# extra iterations allowed after convergence to restore primal <= dual ordering
_MAX_POLISH = 10
_ORDER_TOL = 1e-13


class SolverError(RuntimeError):
    """An SDP did not reach optimality; ``solution`` carries the last iterate."""

    def __init__(self, message: str, solution: "SdpSolution | None" = None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class SolverOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98

    def updated(self, **overrides) -> "SolverOptions":
        known = {k: v for k, v in overrides.items() if k in self.__dataclass_fields__}
        return replace(self, **known)


@dataclass(frozen=True, eq=False)
class SdpProblem:
    """Block SDP data.

    ``a[k]`` is a sparse ``(m, n_k * n_k)`` matrix whose row ``i`` is the
    row-major vectorization of block ``k`` of ``A_i``.
    """

    block_dims: tuple
    c: tuple
    a: tuple
    b: np.ndarray

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if not dims or any(n < 1 for n in dims):
            raise ValueError(f"block dims must be positive, got {dims}")
        b = np.asarray(self.b, dtype=float).ravel()
        m = b.size
        c = tuple(np.asarray(ck, dtype=float) for ck in self.c)
        a = tuple(sp.csr_matrix(ak, dtype=float) for ak in self.a)
        if len(c) != len(dims) or len(a) != len(dims):
            raise ValueError("need one C block and one A block per block dim")
        for k, n in enumerate(dims):
            if c[k].shape != (n, n):
                raise ValueError(f"C block {k} has shape {c[k].shape}, expected {(n, n)}")
            if np.max(np.abs(c[k] - c[k].T), initial=0) > 1e-12 * (1 + np.max(np.abs(c[k]), initial=0)):
                raise ValueError(f"C block {k} is not symmetric")
            if a[k].shape != (m, n * n):
                raise ValueError(f"A block {k} has shape {a[k].shape}, expected {(m, n * n)}")
            perm = np.arange(n * n).reshape(n, n).T.ravel()
            if m and abs(a[k] - a[k][:, perm]).max() > 1e-12 * (1 + abs(a[k]).max()):
                raise ValueError(f"constraint matrices in block {k} are not symmetric")
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return self.b.size

    @classmethod
    def from_dense(cls, c, a, b) -> "SdpProblem":
        """Build from ``c`` (list of blocks) and ``a`` (list over constraints of lists of blocks)."""
        dims = tuple(np.asarray(ck).shape[0] for ck in c)
        rows = [
            sp.csr_matrix(np.array([np.asarray(ai[k], dtype=float).ravel() for ai in a]).reshape(len(a), n * n))
            for k, n in enumerate(dims)
        ]
        return cls(dims, tuple(c), tuple(rows), np.asarray(b, dtype=float))

    def to_json(self) -> str:
        """Diagnostic dump: dense blocks, decimal values."""
        return json.dumps(
            {
                "block_dims": list(self.block_dims),
                "b": self.b.tolist(),
                "c": [ck.tolist() for ck in self.c],
                "a": [ak.toarray().reshape(self.m, n, n).tolist() for ak, n in zip(self.a, self.block_dims)],
            }
        )


@dataclass(frozen=True, eq=False)
class SdpSolution:
    primal_value: float
    dual_value: float
    x: list = field(repr=False)
    y: np.ndarray = field(repr=False)
    s: list = field(repr=False)
    gap: float
    rel_gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    status: str

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def summary(self) -> dict:
        return {
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "rel_gap": self.rel_gap,
            "primal_infeasibility": self.primal_infeasibility,
            "dual_infeasibility": self.dual_infeasibility,
            "iterations": self.iterations,
            "status": self.status,
        }

    def to_json(self) -> str:
        d = self.summary()
        d.update(x=[xk.tolist() for xk in self.x], y=self.y.tolist(), s=[sk.tolist() for sk in self.s])
        return json.dumps(d)


def _sym(a):
    return (a + a.T) / 2


def _inner(xs, ys) -> float:
    return float(sum(np.vdot(x, y) for x, y in zip(xs, ys)))


def _max_step(lam: np.ndarray, d: np.ndarray) -> float:
    """Largest alpha with diag(lam) + alpha * d >= 0."""
    r = 1 / np.sqrt(lam)
    e = np.linalg.eigvalsh(_sym(d * r[:, None] * r[None, :]))[0]
    return np.inf if e >= 0 else -1.0 / e


class _Scaling:
    """Nesterov-Todd scaling for one block: G^T S G = G^-1 X G^-T = diag(lam)."""

    def __init__(self, x: np.ndarray, s: np.ndarray):
        lx = np.linalg.cholesky(x)
        ls = np.linalg.cholesky(s)
        u, lam, vt = np.linalg.svd(ls.T @ lx)
        rs = 1 / np.sqrt(lam)
        self.lam = lam
        self.g = (lx @ vt.T) * rs[None, :]
        self.ginv = (u.T @ ls.T) * rs[:, None]
        self.w = self.g @ self.g.T

    def scale_x(self, dx):
        return self.ginv @ dx @ self.ginv.T

    def scale_s(self, ds):
        return self.g.T @ ds @ self.g


def _schur_block(ak: sp.csr_matrix, w: np.ndarray) -> np.ndarray:
    n = w.shape[0]
    if n <= _KRON_MAX_ORDER:
        t = ak @ np.kron(w, w)
        return np.asarray(ak @ t.T)
    m = ak.shape[0]
    dense = ak.toarray().reshape(m, n, n)
    g = np.matmul(np.matmul(w, dense), w).reshape(m, n * n)
    return np.asarray(ak @ g.T)


def solve(problem: SdpProblem, options: SolverOptions | None = None) -> SdpSolution:
    """Solve ``problem``; never raises on non-convergence, see ``status``."""
    opts = options or SolverOptions()
    dims = problem.block_dims
    a = problem.a
    at = [ak.T.tocsr() for ak in a]
    b = problem.b
    m = problem.m
    # internal minimization form: min <cm, X>, A*y' + S = cm, with y = -y'
    cm = [-ck for ck in problem.c]
    ntot = sum(dims)

    def a_op(xs):
        out = np.zeros(m)
        for ak, xk in zip(a, xs):
            out += ak @ xk.ravel()
        return out

    def a_adj(y):
        return [_sym((atk @ y).reshape(n, n)) for atk, n in zip(at, dims)]

    norm_b = np.linalg.norm(b)
    norm_c = np.sqrt(sum(np.sum(ck**2) for ck in cm))

    xs, ss = [], []
    for k, n in enumerate(dims):
        anorm = np.sqrt(np.asarray(a[k].multiply(a[k]).sum(axis=1)).ravel()) if m else np.zeros(0)
        xi = max(10.0, np.sqrt(n), n * np.max((1 + np.abs(b)) / (1 + anorm), initial=1.0))
        eta = max(10.0, np.sqrt(n), np.linalg.norm(cm[k]), np.max(anorm, initial=0.0))
        xs.append(xi * np.eye(n))
        ss.append(eta * np.eye(n))
    y = np.zeros(m)

    status = MAX_ITERATIONS
    it = 0
    polish = 0
    stats = {}

    def measure():
        rp = b - a_op(xs)
        aty = a_adj(y)
        rd = [ck - sk - ak for ck, sk, ak in zip(cm, ss, aty)]
        pobj = _inner(cm, xs)
        dobj = float(b @ y)
        stats.update(
            rp=rp,
            rd=rd,
            pobj=pobj,
            dobj=dobj,
            mu=_inner(xs, ss) / ntot,
            pinf=np.linalg.norm(rp) / (1 + norm_b),
            dinf=np.sqrt(sum(np.sum(r**2) for r in rd)) / (1 + norm_c),
            relgap=abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj)),
        )

    measure()
    while True:
        log.debug(
            "iter %3d pobj %+.10e dobj %+.10e relgap %.2e pinf %.2e dinf %.2e",
            it, stats["pobj"], stats["dobj"], stats["relgap"], stats["pinf"], stats["dinf"],
        )
        converged = stats["relgap"] <= opts.gap_tol and stats["pinf"] <= opts.feas_tol and stats["dinf"] <= opts.feas_tol
        if converged:
            # residual infeasibility can leave the objectives in reversed order;
            # a few more steps shrink it until weak duality reads correctly
            reversed_gap = stats["pobj"] - stats["dobj"] < -_ORDER_TOL * (1 + abs(stats["pobj"]) + abs(stats["dobj"]))
            if not reversed_gap or polish >= _MAX_POLISH or it >= opts.max_iter:
                status = OPTIMAL
                break
            polish += 1
        if it >= opts.max_iter:
            status = MAX_ITERATIONS
            break
        try:
            scal = [_Scaling(xk, sk) for xk, sk in zip(xs, ss)]
        except np.linalg.LinAlgError:
            status = NUMERICAL_FAILURE
            break
        mat = np.zeros((m, m))
        for ak, sc in zip(a, scal):
            mat += _schur_block(ak, sc.w)
        mat = _sym(mat)
        try:
            factor = sla.cho_factor(mat, lower=True, check_finite=True)
        except (np.linalg.LinAlgError, ValueError):
            # one retry with a relative diagonal shift before giving up
            try:
                shift = 1e-14 * max(1.0, np.max(np.abs(np.diag(mat))))
                factor = sla.cho_factor(mat + shift * np.eye(m), lower=True)
            except (np.linalg.LinAlgError, ValueError):
                status = NUMERICAL_FAILURE
                break

        rp, rd, mu = stats["rp"], stats["rd"], stats["mu"]

        def direction(rc):
            rhs = rp - a_op([r - sc.w @ d @ sc.w for r, d, sc in zip(rc, rd, scal)])
            dy = sla.cho_solve(factor, rhs)
            # one step of iterative refinement
            dy += sla.cho_solve(factor, rhs - mat @ dy)
            ds = [d - g for d, g in zip(rd, a_adj(dy))]
            dx = [_sym(r - sc.w @ d @ sc.w) for r, d, sc in zip(rc, ds, scal)]
            return dx, dy, ds

        def steps(dx, ds):
            ap = min(_max_step(sc.lam, sc.scale_x(d)) for sc, d in zip(scal, dx))
            ad = min(_max_step(sc.lam, sc.scale_s(d)) for sc, d in zip(scal, ds))
            return ap, ad

        # predictor
        dx_a, dy_a, ds_a = direction([-xk for xk in xs])
        ap, ad = steps(dx_a, ds_a)
        ap1, ad1 = min(1.0, ap), min(1.0, ad)
        mu_aff = _inner([xk + ap1 * d for xk, d in zip(xs, dx_a)], [sk + ad1 * d for sk, d in zip(ss, ds_a)]) / ntot
        sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)

        # corrector
        rc = []
        for sc, dxa, dsa in zip(scal, dx_a, ds_a):
            lam = sc.lam
            px, ps = sc.scale_x(dxa), sc.scale_s(dsa)
            r = sigma * mu * np.eye(lam.size) - np.diag(lam**2) - (px @ ps + ps @ px) / 2
            t = r / ((lam[:, None] + lam[None, :]) / 2)
            rc.append(sc.g @ t @ sc.g.T)
        dx, dy, ds = direction(rc)
        ap, ad = steps(dx, ds)
        ap, ad = min(1.0, opts.step_fraction * ap), min(1.0, opts.step_fraction * ad)
        if not np.all(np.isfinite(dy)) or max(ap, ad) < 1e-12:
            status = NUMERICAL_FAILURE
            break
        xs = [xk + ap * d for xk, d in zip(xs, dx)]
        ss = [sk + ad * d for sk, d in zip(ss, ds)]
        y = y + ad * dy
        it += 1
        measure()

    primal = -stats["pobj"]
    dual = -stats["dobj"]
    return SdpSolution(
        primal_value=primal,
        dual_value=dual,
        x=xs,
        y=-y,
        s=ss,
        gap=dual - primal,
        rel_gap=stats["relgap"],
        primal_infeasibility=stats["pinf"],
        dual_infeasibility=stats["dinf"],
        iterations=it,
        status=status,
    )
