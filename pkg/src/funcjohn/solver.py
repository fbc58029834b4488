"""Exchange (cutting-plane) solvers for the John and Loewner s-problems.

Both problems are convex semi-infinite programs once the matrix part is
restricted to positive definite matrices:

* John:    max  s ln(alpha) + ln det A
           s.t. ln(alpha) + psi_f(A y + a) <= psi_g(y)   for y in supp g
* Loewner: min  s ln(beta) - ln det B
           s.t. psi_g(B x + b) - psi_f(x) <= ln(beta)     for x in supp f

A finite subset of the constraints is solved with a conic solver, the margin
search of `positions` supplies the most violated points, and the loop stops
when the relaxation optimum is feasible.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .contact import ExtendedOperator
from .errors import NumericalFailure
from .funcmodel import (Ellipsoid, InnerBody, LogConcaveFn, PiecewisePsi, Polytope,
                        _epigraph_vertices, s_integral)
from .positions import (JOHN, LOWNER, MarginResult, Position, SearchConfig, as_body,
                        john_margin, lowner_margin, s_integral_of)

log = logging.getLogger(__name__)

CONVERGED = "Converged"
ITER_LIMIT = "IterLimit"
INFEASIBLE = "Infeasible"
# consecutive iterations whose worst violation sits on the truncated search box
EDGE_LIMIT = 4


@dataclass
class SolveOptions:
    s: float = 1.0
    max_outer_iters: int = 60
    tol_feas: float = 1e-7
    tol_obj: float = 1e-9
    pd_floor: float = 1e-8
    seed: int = 0
    fixed_center: bool = False
    search: SearchConfig = field(default_factory=SearchConfig)
    cuts_per_dim: int = 40
    cap: float = 1e4
    solver_tol: float = 1e-10

    def __post_init__(self):
        if not (self.s > 0 and self.tol_feas > 0 and self.tol_obj > 0 and self.pd_floor > 0):
            raise ValueError("s, tolerances and pd_floor must be positive")


@dataclass
class TraceRow:
    iteration: int
    objective: float
    violation: float
    cuts: int

    def as_dict(self) -> dict:
        return {"iteration": self.iteration, "objective": self.objective,
                "violation": self.violation, "cuts": self.cuts}


@dataclass
class SolveResult:
    position: Position
    objective: float
    trace: list
    status: str
    margin: Optional[MarginResult] = None
    problem: str = JOHN
    s: float = 1.0
    fixed_center: bool = False
    base_integral: float = float("nan")
    cut_points: Optional[np.ndarray] = None  # final cut set in search-space coordinates

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


@dataclass
class Cuts:
    points: list = field(default_factory=list)  # search-space points
    exact: bool = False  # True when the cut set already is the full constraint set


def _subproblem_vars(d: int, fixed_center: bool):
    import cvxpy as cp
    M = cp.Variable((d, d), PSD=True) if d > 1 else cp.Variable((1, 1), PSD=True)
    c = cp.Variable(d)
    t = cp.Variable()
    cons = [c == 0] if fixed_center else []
    return M, c, t, cons


def _solve(prob, opts: SolveOptions, dump):
    import cvxpy as cp
    tol = opts.solver_tol
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            try:
                prob.solve(solver="CLARABEL", tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol,
                           tol_ktratio=1e-8, max_iter=400, chordal_decomposition_enable=False)
            except BaseException as exc:
                # Rust panics surface as pyo3 PanicException, a BaseException subclass
                if type(exc).__name__ != "PanicException":
                    raise
                raise cp.error.SolverError(f"CLARABEL panicked: {exc}") from None
    except cp.error.SolverError as exc:
        try:
            prob.solve(solver="SCS", eps=1e-9, max_iters=200000)
        except cp.error.SolverError:
            raise NumericalFailure(f"conic solver failed: {exc}", dump=dump) from exc
    return prob.status


def finite_subproblem(problem: str, f: LogConcaveFn, g, cuts: Cuts, opts: SolveOptions):
    """Solve the finite convex program over the current cuts.

    Returns (M, c, t, value): for John the position (A, a, ln alpha), for
    Loewner (B, b, ln beta), or None when the cut set is infeasible.
    """
    import cvxpy as cp
    d = f.dim
    M, c, t, cons = _subproblem_vars(d, opts.fixed_center)
    eye = np.eye(d)
    cons += [M >> opts.pd_floor * eye, M << opts.cap * eye]
    if problem == JOHN:
        g_fn = g.envelope() if isinstance(g, InnerBody) else g
        fb = as_body(f)
        gb = as_body(g_fn) if not isinstance(g, InnerBody) else None
        if fb is not None and gb is not None and isinstance(fb[0], Polytope) and isinstance(gb[0], Ellipsoid):
            P, E = fb[0], gb[0]
            for k in range(P.normals.shape[0]):
                n = P.normals[k]
                cons.append(n @ (M @ E.center + c) + cp.norm(E.shape.T @ (M @ n)) <= P.offsets[k])
            cons.append(t + fb[1] <= gb[1])
        else:
            psi_g = _inner_psi(g)
            for y in cuts.points:
                e, dom = f.cvx_psi(M @ y + c)
                cons += dom
                cons.append(t + e <= psi_g(y))
        _, pf = f.max_point()
        cons.append(t <= -pf + _inner_min(g))
        obj = cp.Maximize(opts.s * t + cp.log_det(M))
    else:
        psi_f = _inner_psi(f)
        for x in cuts.points:
            e, dom = g.cvx_psi(M @ x + c)
            cons += dom
            cons.append(e - psi_f(x) <= t)
        obj = cp.Minimize(opts.s * t - cp.log_det(M))
    prob = cp.Problem(obj, cons)
    status = _solve(prob, opts, {"problem": problem, "cuts": [np.asarray(p).tolist() for p in cuts.points]})
    if status in ("infeasible", "infeasible_inaccurate"):
        return None
    if status not in ("optimal", "optimal_inaccurate") or M.value is None:
        raise NumericalFailure(f"subproblem status {status}",
                               dump={"problem": problem, "status": status, "cuts": len(cuts.points)})
    Mv = np.array(M.value, dtype=float).reshape(d, d)
    Mv = 0.5 * (Mv + Mv.T)
    cv = np.zeros(d) if opts.fixed_center else np.array(c.value, dtype=float).reshape(d)
    return Mv, cv, float(t.value), float(prob.value)


def _inner_psi(inner):
    if isinstance(inner, InnerBody) and inner.is_finite:
        pts, vals = inner.points, inner.psi_atoms()

        def psi(y):
            k = np.flatnonzero(np.max(np.abs(pts - y), axis=1) <= 1e-12)
            return float(vals[k].min())
        return psi
    fn = inner.envelope() if isinstance(inner, InnerBody) else inner
    return lambda y: float(fn.psi(y))


def _inner_min(g) -> float:
    if isinstance(g, InnerBody) and g.is_finite:
        return float(g.psi_atoms().min())
    fn = g.envelope() if isinstance(g, InnerBody) else g
    return fn.max_point()[1]


def _exact_points(inner) -> Optional[list]:
    """Finite point sets that are the whole constraint set (None if there is none)."""
    if isinstance(inner, InnerBody):
        if inner.is_finite:
            return [p.copy() for p in inner.points]
        inner = inner.fn
    body = as_body(inner)
    if body is not None and isinstance(body[0], Polytope):
        return [v.copy() for v in body[0].vertices]
    if isinstance(inner, PiecewisePsi) and inner.domain is not None:
        return [v[:-1].copy() for v in _epigraph_vertices(inner)]
    return None


def _initial_points(inner, rng, n: int) -> list:
    fn = inner.envelope() if isinstance(inner, InnerBody) else inner
    x0, _ = fn.max_point()
    lo, hi = fn.support_box()
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        lo = np.where(np.isfinite(lo), lo, x0 - 3.0)
        hi = np.where(np.isfinite(hi), hi, x0 + 3.0)
    d = fn.dim
    k = 9 if d < 3 else 5
    axes = [np.linspace(l, h, k) for l, h in zip(lo, hi)]
    G = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T
    G = lo + (G - lo) * (1 - 2e-6) + 1e-6 * (hi - lo)
    jitter = rng.uniform(-0.25, 0.25, size=G.shape) * (hi - lo) / (k - 1)
    G = G + jitter
    G = G[np.isfinite(fn.psi(G))]
    pts = [x0] + list(G)
    if len(pts) > n:
        idx = rng.choice(np.arange(1, len(pts)), size=n - 1, replace=False)
        pts = [x0] + [pts[i] for i in sorted(idx)]
    return pts


def _slack_of_cut(problem, f, g, pos: Position, y) -> float:
    # nonnegative slack in log units at the current iterate, inf for domain-free points
    if problem == JOHN:
        u = pos.A @ y + pos.a
        return float(_inner_psi(g)(y) - f.psi(u) - math.log(pos.alpha))
    x = y
    return float(f.psi(x) - pos.base_fn.psi(pos.A.T @ x + pos.a) - math.log(pos.alpha))


def _manage(cuts: Cuts, problem, f, g, pos, opts: SolveOptions):
    cap = opts.cuts_per_dim * f.dim
    if cuts.exact or len(cuts.points) <= cap:
        return
    slack = np.array([_slack_of_cut(problem, f, g, pos, y) for y in cuts.points])
    slack = np.where(np.isfinite(slack), slack, -np.inf)
    order = np.argsort(-slack, kind="stable")
    drop = set()
    for i in order:
        if len(cuts.points) - len(drop) <= cap:
            break
        if slack[i] > 10 * opts.tol_feas:
            drop.add(int(i))
    cuts.points = [p for i, p in enumerate(cuts.points) if i not in drop]


def _add_witnesses(cuts: Cuts, margin: MarginResult, tol: float) -> int:
    added = 0
    for w in margin.witnesses:
        if w.margin > -0.1 * tol and w.margin != -math.inf:
            continue
        if any(np.max(np.abs(w.point - p)) <= 1e-12 for p in cuts.points):
            continue
        cuts.points.append(w.point.copy())
        added += 1
    return added


def _position(problem, M, c, t, g) -> Position:
    if problem == JOHN:
        return Position(g, ExtendedOperator(M, math.exp(t), c), JOHN)
    # h(x) = beta g(B x + b) is stored as (1/alpha) g(A^T x + a)
    return Position(g, ExtendedOperator(M.T, math.exp(-t), c), LOWNER)


def _run(problem: str, f: LogConcaveFn, g, opts: SolveOptions) -> SolveResult:
    rng = np.random.default_rng(opts.seed)
    inner = g if problem == JOHN else f
    d = f.dim
    exact_pts = _exact_points(inner)
    if exact_pts is not None:
        cuts = Cuts(exact_pts, exact=True)
    else:
        cuts = Cuts(_initial_points(inner, rng, opts.cuts_per_dim * d // 2))
    g_fn = g.envelope() if isinstance(g, InnerBody) else g
    base_int = s_integral(g_fn, opts.s).value
    margin_fn = john_margin if problem == JOHN else lowner_margin
    trace = []
    warm = []
    pos = None
    margin = None
    edge_run = 0
    for it in range(opts.max_outer_iters):
        sol = finite_subproblem(problem, f, g, cuts, opts)
        if sol is None:
            return SolveResult(pos or Position.identity(g, problem), float("nan"), trace, INFEASIBLE, margin,
                               problem, opts.s, opts.fixed_center, base_int, _pts(cuts))
        M, c, t, _ = sol
        pos = _position(problem, M, c, t, g)
        margin = margin_fn(f, pos, opts.search, warm=warm)
        obj = s_integral_of(pos, opts.s, base_int)
        trace.append(TraceRow(it, obj, margin.violation, len(cuts.points)))
        log.debug("iter %d objective %.12g violation %.3g cuts %d", it, obj, margin.violation, len(cuts.points))
        warm = [w.point for w in margin.witnesses[:8]]
        ev = np.linalg.eigvalsh(M)
        cap_hit = ev.max() >= 0.999 * opts.cap
        if margin.violation <= opts.tol_feas and not cap_hit:
            polished = _polish(problem, f, g, cuts, pos, opts)
            if polished is not None:
                m2 = margin_fn(f, polished, opts.search, warm=warm)
                if m2.violation <= opts.tol_feas:
                    pos, margin = polished, m2
                    obj = s_integral_of(pos, opts.s, base_int)
                    trace.append(TraceRow(it, obj, margin.violation, len(cuts.points)))
            final = margin if margin.exact else margin_fn(f, pos, opts.search.doubled(), warm=warm)
            if final.violation <= opts.tol_feas:
                return SolveResult(pos, obj, trace, CONVERGED, final, problem, opts.s,
                                   opts.fixed_center, base_int, _pts(cuts))
            margin = final
        edge_run = edge_run + 1 if margin.edge else 0
        if ev.min() <= 10 * opts.pd_floor or edge_run >= EDGE_LIMIT:
            return SolveResult(pos, obj, trace, INFEASIBLE, margin, problem, opts.s,
                               opts.fixed_center, base_int, _pts(cuts))
        if cap_hit and margin.violation <= opts.tol_feas:
            opts = _with_cap(opts, 10 * opts.cap)
            continue
        if cuts.exact:
            # the cut set is the whole constraint set; remaining violation is numerical
            return SolveResult(pos, obj, trace, ITER_LIMIT, margin, problem, opts.s,
                               opts.fixed_center, base_int, _pts(cuts))
        if _add_witnesses(cuts, margin, opts.tol_feas) == 0:
            return SolveResult(pos, obj, trace, ITER_LIMIT, margin, problem, opts.s,
                               opts.fixed_center, base_int, _pts(cuts))
        _manage(cuts, problem, f, g, pos, opts)
    return SolveResult(pos, trace[-1].objective if trace else float("nan"), trace, ITER_LIMIT, margin,
                       problem, opts.s, opts.fixed_center, base_int, _pts(cuts))


def _pts(cuts: Cuts) -> Optional[np.ndarray]:
    return np.array(cuts.points, dtype=float) if cuts.points else None


def _polish(problem, f, g, cuts: Cuts, pos: Position, opts: SolveOptions) -> Optional[Position]:
    """Refine the conic solution with SLSQP on the same cuts when all pieces are smooth there."""
    outer = f if problem == JOHN else g
    if as_body(outer) is not None or not cuts.points:
        return None
    d = f.dim
    iu = np.triu_indices(d)
    nm = iu[0].size
    free_c = not opts.fixed_center
    Y = np.array(cuts.points)
    psi_in = np.array([_inner_psi(g if problem == JOHN else f)(y) for y in Y])
    sign = 1.0 if problem == JOHN else -1.0

    def unpack(z):
        M = np.zeros((d, d))
        M[iu] = z[:nm]
        M = M + M.T - np.diag(np.diag(M))
        c = z[nm:nm + d] if free_c else np.zeros(d)
        return M, c, z[-1]

    if problem == JOHN:
        M0, c0, t0 = pos.A, pos.a, math.log(pos.alpha)
    else:
        M0, c0, t0 = pos.A.T, pos.a, -math.log(pos.alpha)
    z0 = np.concatenate([M0[iu], c0 if free_c else [], [t0]])

    def images(z):
        M, c, _ = unpack(z)
        return Y @ M.T + c

    def cons(z):
        _, _, t = unpack(z)
        vals = outer._psi(images(z))
        if problem == JOHN:
            return psi_in - t - vals
        return t + psi_in - vals

    def cons_jac(z):
        G = outer._grad(images(z))  # gradient of psi_outer at M y + c
        J = np.zeros((Y.shape[0], z.size))
        for k, (i, j) in enumerate(zip(*iu)):
            col = G[:, i] * Y[:, j] + (G[:, j] * Y[:, i] if i != j else 0.0)
            J[:, k] = -col
        if free_c:
            J[:, nm:nm + d] = -G
        J[:, -1] = -1.0 if problem == JOHN else 1.0
        return J

    def obj(z):
        M, _, t = unpack(z)
        sgn, logdet = np.linalg.slogdet(M)
        if sgn <= 0:
            return math.inf
        return -sign * (opts.s * t) - logdet if problem == JOHN else opts.s * t - logdet

    def obj_grad(z):
        M, _, _ = unpack(z)
        Minv = np.linalg.inv(M)
        gz = np.zeros(z.size)
        for k, (i, j) in enumerate(zip(*iu)):
            gz[k] = -(Minv[i, j] if i == j else 2 * Minv[i, j])
        gz[-1] = -opts.s if problem == JOHN else opts.s
        return gz

    with np.errstate(all="ignore"):
        if not (np.all(np.isfinite(cons(z0))) and np.all(np.isfinite(cons_jac(z0)))):
            return None
        from scipy.optimize import minimize
        res = minimize(obj, z0, jac=obj_grad, method="SLSQP",
                       constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                       options={"ftol": 1e-16, "maxiter": 200})
    log.debug("polish: %s", res.message)
    # z0 may be infeasible by ~tol_feas, so restoring feasibility can cost a little
    slack0 = max(0.0, -float(np.min(cons(z0))))
    if not np.all(np.isfinite(res.x)) or obj(res.x) > obj(z0) + 1e-12 + 10 * (1 + opts.s) * slack0:
        return None
    M, c, t = unpack(res.x)
    if np.linalg.eigvalsh(M).min() <= opts.pd_floor:
        return None
    return _position(problem, M, c, t, g)


def _with_cap(opts: SolveOptions, cap: float) -> SolveOptions:
    from dataclasses import replace
    return replace(opts, cap=cap)


def solve_john(f: LogConcaveFn, g: Union[LogConcaveFn, InnerBody], opts: Optional[SolveOptions] = None) -> SolveResult:
    """Largest s-integral position h = alpha g(A^{-1}(x - a)) with h <= f, A positive definite."""
    return _run(JOHN, f, g, opts or SolveOptions())


def solve_lowner(f: LogConcaveFn, g: LogConcaveFn, opts: Optional[SolveOptions] = None) -> SolveResult:
    """Smallest s-integral position h = beta g(B x + b) with f <= h, B positive definite."""
    if isinstance(g, InnerBody):
        raise TypeError("the outer function of the Loewner problem must be log-concave")
    return _run(LOWNER, f, g, opts or SolveOptions())
