"""Frequency-domain machinery for the N-vehicle error chain.

The chain operator S is tridiagonal with diagonal s^2 + q, subdiagonal
-p1 and superdiagonal -p2.  This module provides its assembly and a
direct tridiagonal solve (the oracle), the verification that the
geometric flow matrix reduces S to a corner form, the boundary-column
entries of that corner form, and the closed-form per-vehicle transfer
functions for a disturbance on the leader.

Closed forms are expressed through mu = (s^2+q+m)/2 and nu =
(s^2+q-m)/2, the two roots of x^2 - (s^2+q)x + p1*p2: the per-vehicle
transfer function for a leader-only disturbance is

    H_k = C1^(k-1) * (mu - nu*(C1*C2)^(N-k)) / (mu^2 - nu^2*(C1*C2)^(N-1))

which the tests cross-check against the tridiagonal solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegeneratePointError, SingularMatrixError
from .freq_analysis import DEFAULT_GRID, FrequencyGrid
from .tf_core import ControllerGains, _as_points, _flow_pair

__all__ = [
    "ChainResponse",
    "BoundaryEntries",
    "DenominatorMinima",
    "assemble_S",
    "solve_direct",
    "verify_msq",
    "boundary_entries",
    "flow_vectors",
    "closedform_chain_response",
    "transfer_at",
    "check_denominator_conditions",
]

# verification-only dense construction; production paths are O(N)
_MAX_DENSE_N = 200

_DEGENERACY_RTOL = 1e-10


def _check_n(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ConfigError(f"chain size must be an integer >= 2, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class ChainResponse:
    """Per-vehicle response at a fixed s for a leader-only disturbance.

    e[k-1] is the error of vehicle k, h[k-1] the transfer value e_k/d'_1,
    g[k-1] the bounded prefactor with h = g * C1^(k-2) for k >= 2, and
    flow_front/flow_rear the two disturbance flows.
    """

    e: np.ndarray
    h: np.ndarray
    g: np.ndarray
    flow_front: np.ndarray
    flow_rear: np.ndarray


@dataclass(frozen=True)
class BoundaryEntries:
    """First and last columns of the corner form, rows 1..N."""

    first_col: np.ndarray
    last_col: np.ndarray

    @property
    def q11(self) -> complex:
        return complex(self.first_col[0])

    @property
    def q1n(self) -> complex:
        return complex(self.last_col[0])

    @property
    def qn1(self) -> complex:
        return complex(self.first_col[-1])

    @property
    def qnn(self) -> complex:
        return complex(self.last_col[-1])


@dataclass(frozen=True)
class DenominatorMinima:
    """Grid minima of the three non-degeneracy quantities."""

    min_abs_m: float
    min_abs_w_plus_m: float
    min_abs_corner_det: float


def _parts(g: ControllerGains, s: np.ndarray):
    w, m, c1, c2 = _flow_pair(g, s)
    mu = (w + m) / 2.0
    wpm = w + m
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = 2.0 * g.p1(s) * g.p2(s) / wpm
    bad = wpm == 0
    if np.any(bad):
        nu = np.where(bad, (w - m) / 2.0, nu)
    return w, m, mu, nu, c1, c2


def _m_scale(g: ControllerGains, s: np.ndarray) -> np.ndarray:
    return np.maximum(np.abs(s * s + g.q(s)), 2.0 * np.sqrt(np.abs(g.p1(s) * g.p2(s))))


def assemble_S(g: ControllerGains, n: int, s: complex) -> np.ndarray:
    """Tridiagonal chain operator at s: diag s^2+q, sub -p1, super -p2."""
    n = _check_n(n)
    w = complex(s * s + g.q(s))
    S = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(S, w)
    idx = np.arange(n - 1)
    S[idx + 1, idx] = -complex(g.p1(s))
    S[idx, idx + 1] = -complex(g.p2(s))
    return S


def solve_direct(g: ControllerGains, n: int, s: complex, dprime) -> np.ndarray:
    """Solve S e = d' by tridiagonal elimination (the oracle path).

    Pivots below 1e-12 times the matrix scale abort with a singularity
    error carrying s.
    """
    n = _check_n(n)
    d = np.asarray(dprime, dtype=complex)
    if d.shape != (n,):
        raise ConfigError(f"disturbance vector must have length {n}, got shape {d.shape}")
    w = complex(s * s + g.q(s))
    p1v = complex(g.p1(s))
    p2v = complex(g.p2(s))
    scale = max(abs(w), abs(p1v), abs(p2v))

    # Thomas algorithm with a pivot-magnitude safeguard
    cp = np.zeros(n, dtype=complex)
    dp = np.zeros(n, dtype=complex)
    den = w
    if abs(den) < 1e-12 * scale:
        raise SingularMatrixError(f"near-singular chain operator at s = {s!r}", s=s)
    cp[0] = -p2v / den
    dp[0] = d[0] / den
    for i in range(1, n):
        den = w + p1v * cp[i - 1]
        if abs(den) < 1e-12 * scale:
            raise SingularMatrixError(f"near-singular chain operator at s = {s!r}", s=s)
        cp[i] = -p2v / den
        dp[i] = (d[i] + p1v * dp[i - 1]) / den
    for i in range(n - 2, -1, -1):
        dp[i] -= cp[i] * dp[i + 1]
    return dp


def verify_msq(g: ControllerGains, n: int, s: complex) -> float:
    """Max deviation of the flow-matrix product from its corner pattern.

    Builds the dense matrix of flow powers M (scaled by 1/m), multiplies
    by S and measures how far the interior columns are from identity
    columns; the first and last columns are unconstrained.
    """
    n = _check_n(n)
    if n > _MAX_DENSE_N:
        raise ConfigError(f"dense verification capped at n = {_MAX_DENSE_N}, got {n}")
    arr, _ = _as_points(s)
    w, m, mu, nu, c1, c2 = _parts(g, arr)
    if abs(complex(m)) < 1e-12 * float(_m_scale(g, arr)):
        raise DegeneratePointError(f"m(s) ~ 0 at s = {s!r}", s=complex(arr[()]))
    idx = np.arange(n)
    expo = idx[None, :] - idx[:, None]  # column minus row
    c1_c, c2_c, m_c = complex(c1), complex(c2), complex(m)
    M = np.where(
        expo > 0, c2_c ** np.maximum(expo, 0), c1_c ** np.maximum(-expo, 0)
    ) / m_c
    Q = M @ assemble_S(g, n, s)
    # interior columns must be exact identity columns; for n = 2 there are
    # none and the corner columns are unconstrained
    interior = Q[:, 1 : n - 1] - np.eye(n, dtype=complex)[:, 1 : n - 1]
    return float(np.max(np.abs(interior))) if interior.size else 0.0


def boundary_entries(g: ControllerGains, n: int, s: complex) -> BoundaryEntries:
    """First/last columns of the corner form, from their defining relations."""
    n = _check_n(n)
    arr, _ = _as_points(s)
    w, m, mu, nu, c1, c2 = _parts(g, arr)
    if abs(m) < 1e-12 * float(_m_scale(g, arr)):
        raise DegeneratePointError(f"m(s) ~ 0 at s = {s!r}", s=complex(arr[()]))
    w = complex(w)
    m = complex(m)
    c1 = complex(c1)
    c2 = complex(c2)
    p1v = complex(g.p1(arr))
    p2v = complex(g.p2(arr))
    k = np.arange(1, n + 1)
    first = np.empty(n, dtype=complex)
    last = np.empty(n, dtype=complex)
    first[0] = (w - c2 * p1v) / m
    first[1:] = (c1 ** (k[1:] - 1) * w - c1 ** (k[1:] - 2) * p1v) / m
    last[-1] = (w - c1 * p2v) / m
    last[:-1] = (c2 ** (n - k[:-1]) * w - c2 ** (n - k[:-1] - 1) * p2v) / m
    return BoundaryEntries(first_col=first, last_col=last)


def flow_vectors(g: ControllerGains, s: complex, dprime) -> tuple[np.ndarray, np.ndarray]:
    """Front and rear disturbance flows by their recursions.

    f_1 = 0, f_k = C1*(f_{k-1} + d'_{k-1}); g_N = 0, g_k = C2*(g_{k+1} + d'_{k+1}).
    """
    d = np.asarray(dprime, dtype=complex)
    n = d.shape[0]
    arr, _ = _as_points(s)
    _, _, _, _, c1, c2 = _parts(g, arr)
    c1 = complex(c1)
    c2 = complex(c2)
    f = np.zeros(n, dtype=complex)
    for k in range(1, n):
        f[k] = c1 * (f[k - 1] + d[k - 1])
    g_rear = np.zeros(n, dtype=complex)
    for k in range(n - 2, -1, -1):
        g_rear[k] = c2 * (g_rear[k + 1] + d[k + 1])
    return f, g_rear


def closedform_chain_response(
    g: ControllerGains, n: int, s: complex, d1prime: complex = 1.0
) -> ChainResponse:
    """Closed-form chain response to a disturbance on the leader only.

    Assembled from three contributions per interior vehicle: the head
    response fed back through the first boundary column, the local front
    flow, and the tail response reflected through the last boundary
    column.  Degenerate denominators raise instead of blowing up.
    """
    n = _check_n(n)
    arr, _ = _as_points(s)
    w, m, mu, nu, c1, c2 = _parts(g, arr)
    m_c = complex(m)
    mu_c = complex(mu)
    nu_c = complex(nu)
    c1_c = complex(c1)
    c2_c = complex(c2)
    if abs(m_c) < _DEGENERACY_RTOL * float(_m_scale(g, arr)):
        raise DegeneratePointError(f"m(s) ~ 0 at s = {s!r}", s=complex(arr[()]))
    t = c1_c * c2_c
    tail = nu_c * nu_c * t ** (n - 1)
    denom = mu_c * mu_c - tail
    if abs(denom) < _DEGENERACY_RTOL * max(abs(mu_c) ** 2, abs(tail)):
        raise DegeneratePointError(
            f"chain denominator ~ 0 at s = {s!r}", s=complex(arr[()])
        )

    h1 = (mu_c - nu_c * t ** (n - 1)) / denom
    g_tail = c1_c * m_c / denom

    gpref = np.empty(n, dtype=complex)
    h = np.empty(n, dtype=complex)
    gpref[0] = h1
    h[0] = h1
    ks = np.arange(2, n)
    if ks.size:
        head_term = c1_c * (1.0 - nu_c * h1) / m_c
        gpref[1 : n - 1] = head_term - nu_c * g_tail * t ** (n - ks) / m_c
        h[1 : n - 1] = gpref[1 : n - 1] * c1_c ** (ks - 2)
    gpref[n - 1] = g_tail
    h[n - 1] = g_tail * c1_c ** (n - 2)

    dvec = np.zeros(n, dtype=complex)
    dvec[0] = d1prime
    front, rear = flow_vectors(g, s, dvec)
    return ChainResponse(e=h * d1prime, h=h, g=gpref, flow_front=front, flow_rear=rear)


def transfer_at(g: ControllerGains, n: int, k: int, s) -> np.ndarray:
    """Vectorized transfer value e_k/d'_1 over an array of points s."""
    n = _check_n(n)
    if not 1 <= k <= n:
        raise ConfigError(f"vehicle index must be in 1..{n}, got {k}")
    arr, scalar = _as_points(s)
    w, m, mu, nu, c1, c2 = _parts(g, arr)
    t = c1 * c2
    tail = nu * nu * t ** (n - 1)
    denom = mu * mu - tail
    bad = np.abs(denom) < _DEGENERACY_RTOL * np.maximum(np.abs(mu) ** 2, np.abs(tail))
    if np.any(bad):
        s_bad = arr[bad].flat[0] if arr.ndim else complex(arr[()])
        raise DegeneratePointError(
            f"chain denominator ~ 0 at s = {s_bad!r}", s=complex(s_bad)
        )
    h = c1 ** (k - 1) * (mu - nu * t ** (n - k)) / denom
    return complex(h[()]) if scalar else h


def check_denominator_conditions(
    g: ControllerGains, n: int, grid: FrequencyGrid = DEFAULT_GRID
) -> DenominatorMinima:
    """Grid minima of |m|, |s^2+q+m| and the corner determinant.

    omega = 0 is included alongside the grid.  Zero minima are reported,
    not raised: they flag gains for which the closed forms degenerate
    somewhere on the axis.
    """
    n = _check_n(n)
    omegas = np.concatenate(([0.0], grid.omegas()))
    s = 1j * omegas
    w, m, mu, nu, c1, c2 = _parts(g, s)
    abs_m = np.abs(m)
    abs_wpm = np.abs(w + m)
    with np.errstate(divide="ignore", invalid="ignore"):
        q11 = (w - c2 * g.p1(s)) / m
        qnn = (w - c1 * g.p2(s)) / m
        q1n = (c2 ** (n - 1) * w - c2 ** (n - 2) * g.p2(s)) / m
        qn1 = (c1 ** (n - 1) * w - c1 ** (n - 2) * g.p1(s)) / m
        det = np.abs(q11 * qnn - q1n * qn1)
    det = np.where(np.isfinite(det), det, np.inf)
    return DenominatorMinima(
        min_abs_m=float(abs_m.min()),
        min_abs_w_plus_m=float(abs_wpm.min()),
        min_abs_corner_det=float(det.min()),
    )
