"""Edge-weight allocation under a total budget.

The gain ``f(w) = lambda_max(E^T L_w^+ E)`` is convex on the simplex
``{w >= 0, sum(w) = c}``, so it is minimized by projected subgradient
descent. A lattice search over the simplex serves as an independent
check, and the algebraic-connectivity maximizer gives the
port-agnostic allocation for comparison.

Minimizers of ``f`` need not be unique (the four-node example network
has a whole segment of them). By default the descent is followed by a
tie-break that, among allocations whose gain is within ``tie_tol`` of
the best found, picks the one with the smallest total port resistance
``trace(E^T L_w^+ E)`` (twice the squared H2 norm).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .analysis import HinfCertificate, hinf_norm
from .graph import (
    RANK_RTOL,
    GraphError,
    PortSet,
    WeightedGraph,
    components,
    incidence,
    laplacian,
    pseudo_inverse,
    same_component,
    spectrum,
)

__all__ = [
    "AllocationProblem",
    "AllocatorOptions",
    "AllocationResult",
    "InfeasibleProblem",
    "TooManyEdges",
    "project_simplex",
    "gain_and_subgradient",
    "connectivity_and_supergradient",
    "port_resistance_and_gradient",
    "optimize_weights",
    "grid_oracle",
    "maximize_connectivity",
]


class InfeasibleProblem(GraphError):
    """No allocation on the budget simplex connects every port."""


class TooManyEdges(ValueError):
    pass


@dataclass(frozen=True)
class AllocationProblem:
    """Topology (weights ignored), ports and the budget ``c``."""

    topology: WeightedGraph
    ports: PortSet
    budget: float = 1.0

    def __post_init__(self):
        if not self.budget > 0:
            raise ValueError("budget must be positive")
        if self.topology.n_edges == 0:
            raise InfeasibleProblem("topology has no edges")
        if self.ports.n_nodes != self.topology.n_nodes:
            raise GraphError("ports and topology disagree on the node count")
        if not same_component(self.uniform_graph(), self.ports.ports):
            raise InfeasibleProblem("no allocation connects every port")

    @property
    def m(self) -> int:
        return self.topology.n_edges

    def uniform_weights(self) -> np.ndarray:
        return np.full(self.m, self.budget / self.m)

    def uniform_graph(self) -> WeightedGraph:
        return self.graph(self.uniform_weights())

    def graph(self, weights) -> WeightedGraph:
        return self.topology.with_weights(np.clip(weights, 0.0, None))


@dataclass(frozen=True)
class AllocatorOptions:
    max_iters: int = 5000
    rtol: float = 1e-7
    patience: int = 200
    step0: float | None = None  # defaults to the budget
    seed: int = 0
    restarts: int = 3
    oracle_step: float = 0.01
    tie_break: bool = True
    tie_tol: float = 1e-7


@dataclass
class AllocationResult:
    weights: np.ndarray
    gamma: float
    iterations: int
    history: list = field(default_factory=list)
    certificate: HinfCertificate | None = None
    restarts: int = 0
    converged: bool = True
    objective: float = math.nan
    descent_gamma: float = math.nan


def project_simplex(v, total: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = total}`` (sort and threshold)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def gain_and_subgradient(topology: WeightedGraph, ports: PortSet, weights):
    """``f(w)`` and one subgradient ``-(b_e^T L^+ E v)^2``, ``v`` a top eigenvector of the gain matrix.

    Returns ``(inf, None)`` when the weights disconnect a port.
    """
    g = topology.with_weights(weights)
    if not same_component(g, ports.ports):
        return math.inf, None
    E = ports.matrix()
    Lp = pseudo_inverse(laplacian(g))
    LpE = Lp @ E
    M = E.T @ LpE
    vals, vecs = spectrum(0.5 * (M + M.T))
    v = vecs[:, -1]
    u = LpE @ v
    grad = -((incidence(topology).T @ u) ** 2)
    return float(vals[-1]), grad


def port_resistance_and_gradient(topology: WeightedGraph, ports: PortSet, weights):
    """``trace(E^T L_w^+ E)`` (sum of port resistances) and its gradient."""
    g = topology.with_weights(weights)
    E = ports.matrix()
    X = pseudo_inverse(laplacian(g)) @ E
    BX = incidence(topology).T @ X
    return float(np.sum(E * X)), -np.sum(BX**2, axis=1)


def _least_resistance_refinement(prob: AllocationProblem, w0, gamma_cap):
    """Minimize total port resistance subject to ``f(w) <= gamma_cap`` on the simplex.

    Smooth small problem solved with SLSQP from the descent's best point,
    in budget-normalized units so solver tolerances do not depend on ``c``.
    Returns ``None`` unless the solver ends at a certified-feasible point
    that is no worse than ``w0``.
    """
    topo, ports, c = prob.topology, prob.ports, prob.budget
    f0 = gain_and_subgradient(topo, ports, w0)[0]
    # aim halfway into the slack so the final projection cannot overshoot
    target = (0.5 * (f0 + gamma_cap)) * c

    def connected(u):
        return same_component(topo.with_weights(np.clip(u, 0.0, None)), ports.ports)

    def fun(u):
        if not connected(u):
            return math.inf
        return port_resistance_and_gradient(topo, ports, np.clip(u, 0.0, None))[0]

    def jac(u):
        if not connected(u):
            return np.zeros(prob.m)
        return port_resistance_and_gradient(topo, ports, np.clip(u, 0.0, None))[1]

    def cons(u):
        f, _ = gain_and_subgradient(topo, ports, np.clip(u, 0.0, None))
        return (target - f) if math.isfinite(f) else -target

    def cons_jac(u):
        _, grad = gain_and_subgradient(topo, ports, np.clip(u, 0.0, None))
        return np.zeros(prob.m) if grad is None else -grad

    try:
        res = minimize(
            fun,
            np.asarray(w0) / c,
            jac=jac,
            method="SLSQP",
            bounds=[(0.0, 1.0)] * prob.m,
            constraints=[
                {"type": "eq", "fun": lambda u: np.sum(u) - 1.0, "jac": lambda u: np.ones_like(u)},
                {"type": "ineq", "fun": cons, "jac": cons_jac},
            ],
            options={"maxiter": 500, "ftol": 1e-12},
        )
    except (ValueError, FloatingPointError, np.linalg.LinAlgError):
        return None
    w = project_simplex(c * np.clip(res.x, 0.0, None), c)
    f, _ = gain_and_subgradient(topo, ports, w)
    if not (math.isfinite(f) and f <= gamma_cap):
        return None
    if port_resistance_and_gradient(topo, ports, w)[0] > port_resistance_and_gradient(topo, ports, w0)[0]:
        return None
    return w


def connectivity_and_supergradient(topology: WeightedGraph, weights):
    """``lambda_2(w)`` and the supergradient averaged over its eigenspace."""
    g = topology.with_weights(weights)
    if g.n_nodes < 2:
        return 0.0, np.zeros(topology.n_edges)
    vals, vecs = spectrum(laplacian(g))
    lam2 = float(vals[1])
    tol = 1e-9 * max(1.0, abs(vals[-1]))
    idx = [i for i in range(1, vals.size) if abs(vals[i] - lam2) <= tol]
    proj = incidence(topology).T @ vecs[:, idx]
    sup = np.mean(proj**2, axis=1)
    if len(set(components(g).tolist())) > 1:
        lam2 = 0.0
    return lam2, sup


def _descend(objective, x0, total, opts: AllocatorOptions, sign: float):
    """Projected (super)gradient loop with best-iterate tracking.

    ``sign = +1`` minimizes, ``-1`` maximizes. Returns
    ``(best_x, best_value, iterations, history, converged)``.
    """
    step0 = total if opts.step0 is None else opts.step0
    x = project_simplex(x0, total)
    fx, gx = objective(x)
    best_x, best = x.copy(), fx
    history = [(best, 0.0)]
    converged = False
    k = 0
    for k in range(1, opts.max_iters + 1):
        norm = float(np.linalg.norm(gx)) if gx is not None else 0.0
        if norm == 0.0:
            converged = True
            break
        alpha = step0 / math.sqrt(k)
        for _ in range(60):
            trial = project_simplex(x - sign * alpha * gx / norm, total)
            ft, gt = objective(trial)
            if math.isfinite(ft):
                break
            alpha *= 0.5
        else:
            break
        x, fx, gx = trial, ft, gt
        if sign * fx < sign * best:
            best_x, best = x.copy(), fx
        history.append((best, alpha))
        if k >= opts.patience:
            old = history[k - opts.patience][0]
            if abs(old - best) <= opts.rtol * abs(best):
                converged = True
                break
    return best_x, best, k, history, converged


def _starts(prob: AllocationProblem, opts: AllocatorOptions):
    rng = np.random.default_rng(opts.seed)
    yield prob.uniform_weights()
    for _ in range(opts.restarts):
        yield prob.budget * rng.dirichlet(np.ones(prob.m))


def optimize_weights(prob: AllocationProblem, opts: AllocatorOptions | None = None) -> AllocationResult:
    """Minimize the H-infinity norm over the budget simplex.

    Runs from the uniform allocation plus ``opts.restarts`` random simplex
    points, keeps the best iterate seen, and re-certifies it with
    :func:`~flowgain.analysis.hinf_norm`.
    """
    opts = opts or AllocatorOptions()

    def objective(w):
        return gain_and_subgradient(prob.topology, prob.ports, w)

    best = None
    total_iters = 0
    for start in _starts(prob, opts):
        f0 = objective(start)[0]
        if not math.isfinite(f0):
            # random start that splits a port: pull it toward the uniform point
            start = 0.5 * (start + prob.uniform_weights())
        x, fx, iters, history, converged = _descend(objective, start, prob.budget, opts, sign=1.0)
        total_iters += iters
        if best is None or fx < best[1]:
            best = (x, fx, history, converged)
    x, descent_gamma, history, converged = best
    if opts.tie_break:
        refined = _least_resistance_refinement(prob, x, descent_gamma * (1.0 + opts.tie_tol))
        if refined is not None:
            x = refined
    cert = hinf_norm(prob.graph(x), prob.ports)
    return AllocationResult(
        weights=x,
        gamma=cert.gamma,
        iterations=total_iters,
        history=history,
        certificate=cert,
        restarts=opts.restarts,
        converged=converged,
        objective=cert.gamma,
        descent_gamma=descent_gamma,
    )


def maximize_connectivity(prob: AllocationProblem, opts: AllocatorOptions | None = None) -> AllocationResult:
    """Maximize ``lambda_2(L_w)`` over the budget simplex.

    ``gamma`` on the result is the true H-infinity norm at the
    connectivity-optimal weights; ``objective`` holds ``lambda_2``.
    """
    opts = opts or AllocatorOptions()
    if len(set(components(prob.uniform_graph()).tolist())) > 1:
        raise InfeasibleProblem("topology is disconnected")

    def objective(w):
        return connectivity_and_supergradient(prob.topology, w)

    best = None
    total_iters = 0
    for start in _starts(prob, opts):
        x, fx, iters, history, converged = _descend(objective, start, prob.budget, opts, sign=-1.0)
        total_iters += iters
        if best is None or fx > best[1]:
            best = (x, fx, history, converged)
    x, lam2, history, converged = best
    cert = hinf_norm(prob.graph(x), prob.ports)
    return AllocationResult(
        weights=x,
        gamma=cert.gamma,
        iterations=total_iters,
        history=history,
        certificate=cert,
        restarts=opts.restarts,
        converged=converged,
        objective=lam2,
    )


def _lattice(m, N):
    # compositions of N into m nonnegative parts, via stars and bars
    for bars in itertools.combinations(range(N + m - 1), m - 1):
        parts = np.diff(np.concatenate([[-1], bars, [N + m - 1]])) - 1
        yield parts


def _batched_gain(W, B, E):
    """Gain for each row of ``W`` (all rows share one support pattern)."""
    L = np.einsum("pe,ie,je->pij", W, B, B)
    vals, vecs = np.linalg.eigh(L)
    top = np.max(np.abs(vals), axis=1, keepdims=True)
    keep = np.abs(vals) > RANK_RTOL * top
    inv = np.where(keep, 1.0 / np.where(keep, vals, 1.0), 0.0)
    VE = np.einsum("pij,ik->pjk", vecs, E)
    M = np.einsum("pjk,pj,pjl->pkl", VE, inv, VE)
    return np.linalg.eigvalsh(M)[:, -1]


def grid_oracle(prob: AllocationProblem, step: float = 0.01, chunk: int = 50_000) -> AllocationResult:
    """Exhaustive search over the simplex lattice with spacing ``step * c``.

    Small problems only (``m <= 5``). Lattice points that split a port are
    skipped; the minimizer is re-certified with ``hinf_norm``.
    """
    m = prob.m
    if m > 5:
        raise TooManyEdges(f"grid oracle supports at most 5 edges, got {m}")
    N = int(round(1.0 / step))
    if N < 1 or abs(N * step - 1.0) > 1e-9:
        raise ValueError("step must divide 1")
    B = incidence(prob.topology)
    E = prob.ports.matrix()
    pairs = prob.topology.pairs

    # port connectivity depends only on which edges carry weight
    masks = np.array([[bool(b) for b in bits] for bits in itertools.product([0, 1], repeat=m)])
    ok = {}
    for mask in masks:
        sub = WeightedGraph(prob.topology.n_nodes, [(u, v, 1.0) for (u, v), on in zip(pairs, mask) if on])
        ok[tuple(mask)] = same_component(sub, prob.ports.ports)

    best_val, best_w, evaluated = math.inf, None, 0
    counts_iter = _lattice(m, N)
    while True:
        block = np.array(list(itertools.islice(counts_iter, chunk)))
        if block.size == 0:
            break
        block = block.reshape(-1, m)
        support = block > 0
        for mask in np.unique(support, axis=0):
            if not ok[tuple(mask)]:
                continue
            rows = np.all(support == mask, axis=1)
            W = block[rows] * (prob.budget / N)
            gam = _batched_gain(W, B, E)
            evaluated += W.shape[0]
            i = int(np.argmin(gam))
            if gam[i] < best_val:
                best_val, best_w = float(gam[i]), W[i].copy()
    if best_w is None:
        raise InfeasibleProblem("no lattice point connects every port")
    cert = hinf_norm(prob.graph(best_w), prob.ports)
    return AllocationResult(
        weights=best_w,
        gamma=cert.gamma,
        iterations=evaluated,
        certificate=cert,
        restarts=0,
        converged=True,
        objective=cert.gamma,
    )
