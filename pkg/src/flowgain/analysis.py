"""Induced L2 gain of the diffusion network ``x' = -L_w x + E d, y = E^T x``.

Because the closed loop is state-space symmetric its H-infinity norm is
attained at zero frequency, so the gain is the top eigenvalue of the
static gain matrix ``M = E^T L_w^+ E``. The remaining functions here are
independent certificates of that number: the block LMI, its Schur
complement, the Riccati inequality with storage ``P = gamma I``, the
single-negative-edge signed Laplacian test, and the algebraic
connectivity bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import (
    PSD_RTOL,
    DisconnectedPort,
    GraphError,
    PortSet,
    SignedGraph,
    WeightedGraph,
    components,
    edge_vector,
    effective_resistance,
    algebraic_connectivity,
    is_psd,
    laplacian,
    pseudo_inverse,
    psd_tolerance,
    same_component,
    signed_laplacian,
    spectrum,
)

__all__ = [
    "HinfCertificate",
    "BoundReport",
    "SignedCheck",
    "CertificateMismatch",
    "PositivePartDisconnected",
    "gain_matrix",
    "hinf_norm",
    "lmi_matrix",
    "lmi_feasible",
    "schur_feasible",
    "riccati_residual",
    "riccati_feasible",
    "signed_psd_check",
    "numeric_psd_threshold",
    "siso_gain_via_resistance",
    "connectivity_bound",
    "slowest_rate",
]


class CertificateMismatch(RuntimeError):
    """Two routes to the same verdict disagreed away from the boundary."""


class PositivePartDisconnected(GraphError):
    pass


@dataclass(frozen=True)
class HinfCertificate:
    """Gain of a network together with the evidence for it.

    ``gamma`` is ``math.inf`` when some port joins two components; the
    matrix fields are then ``None`` and the margins ``nan``.
    """

    gamma: float
    gain_matrix: Optional[np.ndarray]
    achieving_direction: Optional[np.ndarray]
    lmi_margin: float
    riccati_margin: float

    @property
    def infinite(self) -> bool:
        return math.isinf(self.gamma)


@dataclass(frozen=True)
class BoundReport:
    bound: float
    lambda2: float
    lambda_max_EEt: float


@dataclass(frozen=True)
class SignedCheck:
    psd: bool
    threshold: float
    lambda_min: float
    numeric_psd: bool
    analytic_psd: bool


def _require_ports(g: WeightedGraph, p: PortSet):
    if p.n_nodes != g.n_nodes:
        raise GraphError(f"port set is on {p.n_nodes} nodes, graph has {g.n_nodes}")
    if p.k == 0:
        raise GraphError("at least one port is required")


def _require_gamma(gamma):
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")


def gain_matrix(g: WeightedGraph, p: PortSet) -> np.ndarray:
    """Static gain ``E^T L_w^+ E`` (k x k). Raises DisconnectedPort if a port is split."""
    _require_ports(g, p)
    if not same_component(g, p.ports):
        raise DisconnectedPort("a port joins two different components")
    E = p.matrix()
    M = E.T @ pseudo_inverse(laplacian(g)) @ E
    return 0.5 * (M + M.T)


def _top_direction(vals, vecs):
    # first column of the (numerically) top eigenspace, sign fixed so the
    # largest-magnitude entry is positive
    tol = 1e-12 * max(1.0, abs(vals[-1]))
    idx = int(np.flatnonzero(vals >= vals[-1] - tol)[0])
    v = vecs[:, idx].copy()
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


def hinf_norm(g: WeightedGraph, p: PortSet) -> HinfCertificate:
    """H-infinity norm from the zero-frequency gain, plus LMI and Riccati margins."""
    _require_ports(g, p)
    if not same_component(g, p.ports):
        return HinfCertificate(math.inf, None, None, math.nan, math.nan)
    M = gain_matrix(g, p)
    vals, vecs = spectrum(M)
    gamma = float(vals[-1])
    lmi_margin = float(spectrum(lmi_matrix(g, p, gamma)).eigenvalues[0])
    ric = float(spectrum(riccati_residual(g, p, gamma)).eigenvalues[-1])
    return HinfCertificate(gamma, M, _top_direction(vals, vecs), lmi_margin, ric)


def lmi_matrix(g: WeightedGraph, p: PortSet, gamma: float) -> np.ndarray:
    """Block matrix ``[[L_w, E], [E^T, gamma I]]``."""
    _require_gamma(gamma)
    E = p.matrix()
    top = np.hstack([laplacian(g), E])
    bottom = np.hstack([E.T, gamma * np.eye(p.k)])
    return np.vstack([top, bottom])


def lmi_feasible(g: WeightedGraph, p: PortSet, gamma: float, rtol: float = PSD_RTOL):
    """``(feasible, lambda_min)`` for the block LMI at ``gamma``.

    The verdict is taken on the congruent block ``D A D`` with
    ``D = diag(I, gamma^{-1/2} I)``, which has the same inertia but no
    ``gamma``-sized entries to inflate the tolerance. ``lambda_min`` is
    reported for the unscaled block; the two share a sign.
    """
    _require_ports(g, p)
    A = lmi_matrix(g, p, gamma)
    d = np.ones(A.shape[0])
    d[g.n_nodes :] = 1.0 / np.sqrt(gamma)
    feasible, _ = is_psd(A * np.outer(d, d), rtol)
    return feasible, float(spectrum(A).eigenvalues[0])


def schur_feasible(g: WeightedGraph, p: PortSet, gamma: float, rtol: float = PSD_RTOL):
    """``(feasible, lambda_min)`` for ``L_w - E E^T / gamma``, i.e. the signed Laplacian."""
    _require_ports(g, p)
    _require_gamma(gamma)
    E = p.matrix()
    return is_psd(laplacian(g) - (E @ E.T) / gamma, rtol)


def riccati_residual(g: WeightedGraph, p: PortSet, gamma: float, p_matrix=None) -> np.ndarray:
    """Left side of ``-P L - L P + E E^T + P E E^T P / gamma^2 <= 0``.

    ``p_matrix`` defaults to ``gamma * I``.
    """
    _require_ports(g, p)
    _require_gamma(gamma)
    n = g.n_nodes
    if p_matrix is None:
        P = gamma * np.eye(n)
    else:
        P = np.asarray(p_matrix, dtype=float)
        if P.shape != (n, n):
            raise ValueError(f"storage matrix must be {n}x{n}")
        if spectrum(P).eigenvalues[0] <= 0:
            raise ValueError("storage matrix must be positive definite")
    L = laplacian(g)
    EEt = p.matrix() @ p.matrix().T
    R = -P @ L - L.T @ P + EEt + (P @ EEt @ P) / gamma**2
    return 0.5 * (R + R.T)


def riccati_feasible(g: WeightedGraph, p: PortSet, gamma: float, p_matrix=None, rtol: float = PSD_RTOL):
    """``(holds, lambda_max)`` for the Riccati inequality."""
    vals = spectrum(riccati_residual(g, p, gamma, p_matrix)).eigenvalues
    top = float(vals[-1])
    return top <= psd_tolerance(vals, rtol), top


def _lambda_min_perp(A):
    """Smallest eigenvalue of a zero-row-sum symmetric matrix on the complement of 1."""
    n = A.shape[0]
    vals = spectrum(A).eigenvalues
    shift = 1.0 + float(np.max(np.abs(vals)))
    shifted = A + (2.0 * shift / n) * np.ones((n, n))
    return float(spectrum(shifted).eigenvalues[0])


def signed_psd_check(positive: WeightedGraph, neg_edge, neg_weight: float, rtol: float = PSD_RTOL) -> SignedCheck:
    """PSD test of a connected positive graph plus one negative edge, done two ways.

    Numerically via the smallest eigenvalue of the signed Laplacian, and
    analytically by comparing ``|neg_weight|`` with ``1 / R_uv`` on the
    positive part. The two must agree unless ``|neg_weight|`` sits in the
    thin band where the eigenvalue tolerance blurs the verdict.
    """
    u, v = int(neg_edge[0]), int(neg_edge[1])
    if not neg_weight < 0:
        raise ValueError("neg_weight must be negative")
    if len(set(components(positive).tolist())) > 1:
        raise PositivePartDisconnected("positive part of the signed graph is disconnected")
    R = effective_resistance(positive, u, v)
    threshold = 1.0 / R
    sg = SignedGraph(positive, [(u, v, neg_weight)])
    Ls = signed_laplacian(sg)
    numeric, lam_min = is_psd(Ls, rtol)
    analytic = abs(neg_weight) <= threshold

    # width of the band in which the eps-tolerance can flip the numeric
    # verdict: lambda_min moves with slope R^2 / |L^+ b|^2 in |neg_weight|
    Lp = pseudo_inverse(laplacian(positive))
    x = Lp @ edge_vector(positive.n_nodes, u, v)
    slope = R**2 / float(x @ x)
    eps = psd_tolerance(spectrum(Ls).eigenvalues, rtol)
    band = max(1e-8, 2.0 * eps / (slope * threshold))
    if numeric != analytic and abs(abs(neg_weight) - threshold) > band * threshold:
        raise CertificateMismatch(
            f"numeric ({numeric}) and analytic ({analytic}) PSD verdicts differ at {neg_weight}"
        )
    return SignedCheck(numeric, threshold, lam_min, numeric, analytic)


def numeric_psd_threshold(positive: WeightedGraph, neg_edge, rel_tol: float = 1e-13) -> float:
    """Largest ``a`` with ``L_+ - a (e_u - e_v)(e_u - e_v)^T`` PSD, found by bisection.

    Uses only the sign of the smallest eigenvalue on the complement of
    the all-ones vector; no resistance formula is involved.
    """
    u, v = int(neg_edge[0]), int(neg_edge[1])
    if len(set(components(positive).tolist())) > 1:
        raise PositivePartDisconnected("positive part of the signed graph is disconnected")
    L = laplacian(positive)
    b = edge_vector(positive.n_nodes, u, v)
    bb = np.outer(b, b)

    def psd(a):
        return _lambda_min_perp(L - a * bb) >= 0.0

    lo, hi = 0.0, max(1.0, float(np.trace(L)))
    while psd(hi):
        lo, hi = hi, 2.0 * hi
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if psd(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def siso_gain_via_resistance(g: WeightedGraph, port) -> float:
    """Gain of a single-port network, read off as the effective resistance across the port."""
    i, j = int(port[0]), int(port[1])
    return effective_resistance(g, i, j)


def connectivity_bound(g: WeightedGraph, p: PortSet) -> BoundReport:
    """Upper bound ``lambda_max(E E^T) / lambda_2(L_w)``; infinite for disconnected graphs."""
    _require_ports(g, p)
    E = p.matrix()
    lam_e = float(spectrum(E @ E.T).eigenvalues[-1])
    lam2 = algebraic_connectivity(g)
    bound = lam_e / lam2 if lam2 > 0 else math.inf
    return BoundReport(bound, lam2, lam_e)


def slowest_rate(g: WeightedGraph) -> float:
    """Smallest Laplacian eigenvalue above the rank tolerance (0 if there is none).

    Differs from the algebraic connectivity when isolated nodes or
    components are present; it sets the decay time of the observable modes.
    """
    vals = spectrum(laplacian(g)).eigenvalues
    top = float(np.max(np.abs(vals))) if vals.size else 0.0
    pos = vals[vals > 1e-10 * top] if top > 0 else vals[:0]
    return float(pos[0]) if pos.size else 0.0
