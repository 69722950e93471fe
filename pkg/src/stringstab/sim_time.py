"""Time-domain simulation of the closed-loop vehicle chain.

State is (x_0..x_N, v_0..v_N) for N+1 double-integrator vehicles under
the bidirectional coupling law; the leader (vehicle 0) couples only to
its follower and the tail vehicle only to its predecessor.  Integration
is classical fixed-step 4th-order Runge-Kutta; for this linear system
the stage combination collapses to one precomputed update matrix plus
three input-weight matrices, which is applied step by step.  Spacing
errors and the (L2,l2) norms are accumulated at full step resolution by
trapezoidal quadrature; stored samples may be decimated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DivergenceError
from .tf_core import ControllerGains

__all__ = [
    "WAVEFORMS",
    "PlatoonState",
    "DisturbanceSpec",
    "SimConfig",
    "SimResult",
    "step_guard_limit",
    "default_dt",
    "default_t_end",
    "assemble_closed_loop",
    "error_dynamics_matrix",
    "spectral_abscissa",
    "integrate",
    "l2l2_norm",
    "sweep_N",
]

WAVEFORMS = ("impulse", "pulse", "sine", "chirp")

_GUARD = 0.1
_DECAY_TARGET = 1e-4  # slowest-mode amplitude decay defining the default horizon
_T_END_CAP = 1e4


@dataclass(frozen=True)
class PlatoonState:
    """Positions and velocities for vehicles 0..N."""

    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if x.ndim != 1 or x.shape != v.shape:
            raise ConfigError(
                f"x and v must be 1-d arrays of equal length, got {x.shape} and {v.shape}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class DisturbanceSpec:
    """Acceleration disturbance applied to one vehicle.

    Waveforms: "impulse" (one-step pulse of area ``amplitude``), "pulse"
    (rectangle), "sine" (sine burst at ``omega`` rad/s), "chirp" (linear
    frequency ramp from ``omega`` to ``omega_end`` over the duration).
    The active window is [start, start + duration); for clean 4th-order
    convergence its edges should land on the step grid.
    """

    vehicle: int
    waveform: str = "pulse"
    amplitude: float = 1.0
    start: float = 1.0
    duration: float = 1.0
    omega: float = 1.0
    omega_end: Optional[float] = None

    def __post_init__(self):
        if self.waveform not in WAVEFORMS:
            raise ConfigError(
                f"waveform must be one of {WAVEFORMS}, got {self.waveform!r}"
            )
        if not (isinstance(self.vehicle, (int, np.integer)) and self.vehicle >= 0):
            raise ConfigError(f"vehicle index must be a nonnegative int, got {self.vehicle!r}")
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise ConfigError(f"duration must be positive, got {self.duration!r}")
        if not (np.isfinite(self.start) and self.start >= 0):
            raise ConfigError(f"start must be nonnegative, got {self.start!r}")
        if not np.isfinite(self.amplitude):
            raise ConfigError(f"amplitude must be finite, got {self.amplitude!r}")
        if self.waveform in ("sine", "chirp") and not (
            np.isfinite(self.omega) and self.omega > 0
        ):
            raise ConfigError(f"omega must be positive for {self.waveform}, got {self.omega!r}")

    def _values(self, times: np.ndarray, dt: float, left_limit: bool) -> np.ndarray:
        """Waveform samples; the window is half-open on the side given by the limit."""
        end = self.start + (dt if self.waveform == "impulse" else self.duration)
        if left_limit:
            active = (times > self.start) & (times <= end)
        else:
            active = (times >= self.start) & (times < end)
        out = np.zeros_like(times)
        if self.waveform == "impulse":
            out[active] = self.amplitude / dt
        elif self.waveform == "pulse":
            out[active] = self.amplitude
        elif self.waveform == "sine":
            tau = times[active] - self.start
            out[active] = self.amplitude * np.sin(self.omega * tau)
        else:  # chirp
            tau = times[active] - self.start
            om_end = self.omega_end if self.omega_end is not None else 10.0 * self.omega
            phase = self.omega * tau + (om_end - self.omega) * tau * tau / (2.0 * self.duration)
            out[active] = self.amplitude * np.sin(phase)
        return out


def step_guard_limit(g: ControllerGains) -> float:
    """Largest dt allowed by the step-size guard for these gains."""
    return _GUARD / math.sqrt(max(g.a1, g.a2) + max(g.b1, g.b2) ** 2)


def default_dt(g: ControllerGains) -> float:
    """Largest step of the form {1,2,5}*10^e within the guard."""
    limit = step_guard_limit(g)
    exp = math.floor(math.log10(limit))
    for mant in (5.0, 2.0, 1.0):
        cand = mant * 10.0 ** exp
        if cand <= limit:
            return cand
    return 10.0 ** exp  # unreachable, limit >= 1e{exp}


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: chain, gains, step, horizon and disturbances."""

    gains: ControllerGains
    n: int
    dt: float
    t_end: float
    disturbances: tuple[DisturbanceSpec, ...] = ()
    initial: Optional[PlatoonState] = None
    store_every: int = 1
    store_states: bool = False

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ConfigError(f"n must be an integer >= 1, got {self.n!r}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not (np.isfinite(self.t_end) and self.t_end >= 10 * self.dt):
            raise ConfigError(f"t_end must be at least 10*dt, got {self.t_end!r}")
        limit = step_guard_limit(self.gains)
        if self.dt > limit * (1 + 1e-12):
            raise ConfigError(
                f"dt = {self.dt} violates the step-size guard "
                f"dt*sqrt(max(a1,a2)+max(b1,b2)^2) <= {_GUARD} (max dt {limit:.6g})"
            )
        if not (isinstance(self.store_every, (int, np.integer)) and self.store_every >= 1):
            raise ConfigError(f"store_every must be an integer >= 1, got {self.store_every!r}")
        object.__setattr__(self, "disturbances", tuple(self.disturbances))
        for d in self.disturbances:
            if d.vehicle > self.n:
                raise ConfigError(
                    f"disturbance vehicle {d.vehicle} outside chain 0..{self.n}"
                )
        if self.initial is not None and self.initial.x.shape[0] != self.n + 1:
            raise ConfigError(
                f"initial state must cover {self.n + 1} vehicles, got {self.initial.x.shape[0]}"
            )


@dataclass(frozen=True)
class SimResult:
    """Sampled spacing errors and their norms.

    ``e[i, k-1]`` is the spacing error of vehicle k at ``t[i]``.  Norms
    are accumulated at full step resolution regardless of decimation.
    """

    t: np.ndarray
    e: np.ndarray
    per_vehicle_l2: np.ndarray
    total_norm: float
    d_norm: float
    x: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None


def assemble_closed_loop(g: ControllerGains, n: int) -> np.ndarray:
    """Closed-loop state matrix over (x_0..x_N, v_0..v_N)."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ConfigError(f"n must be an integer >= 1, got {n!r}")
    m = n + 1
    K = np.zeros((m, m))
    B = np.zeros((m, m))
    for k in range(m):
        if k < n:  # coupling to the follower
            K[k, k] -= g.a2
            K[k, k + 1] += g.a2
            B[k, k] -= g.b2
            B[k, k + 1] += g.b2
        if k > 0:  # coupling to the predecessor
            K[k, k] -= g.a1
            K[k, k - 1] += g.a1
            B[k, k] -= g.b1
            B[k, k - 1] += g.b1
    A = np.zeros((2 * m, 2 * m))
    A[:m, m:] = np.eye(m)
    A[m:, :m] = K
    A[m:, m:] = B
    return A


def error_dynamics_matrix(g: ControllerGains, n: int) -> np.ndarray:
    """State matrix of the spacing-error dynamics over (e, e_dot)."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ConfigError(f"n must be an integer >= 1, got {n!r}")
    AS = np.zeros((n, n))
    BS = np.zeros((n, n))
    for i in range(n):
        AS[i, i] = g.a1 + g.a2
        BS[i, i] = g.b1 + g.b2
        if i > 0:
            AS[i, i - 1] = -g.a1
            BS[i, i - 1] = -g.b1
        if i < n - 1:
            AS[i, i + 1] = -g.a2
            BS[i, i + 1] = -g.b2
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    A[n:, :n] = -AS
    A[n:, n:] = -BS
    return A


def spectral_abscissa(g: ControllerGains, n: int) -> float:
    """Max real part of the error-dynamics eigenvalues; negative = stable.

    Works on the e-coordinate system, which excludes the structural
    translation modes of the full position dynamics.
    """
    if n > 2000:
        raise ConfigError(f"dense eigenvalue computation capped at n = 2000, got {n}")
    ev = np.linalg.eigvals(error_dynamics_matrix(g, n))
    return float(ev.real.max())


def default_t_end(g: ControllerGains, n: int, dt: float) -> float:
    """Horizon for the slowest error mode to decay by 1e-4, capped at 1e4 s."""
    sigma = spectral_abscissa(g, n)
    if sigma < 0:
        horizon = min(math.log(1.0 / _DECAY_TARGET) / (-sigma), _T_END_CAP)
    else:
        horizon = _T_END_CAP
    horizon = max(horizon, 10 * dt)
    return math.ceil(horizon / dt) * dt


def _rk4_update(A: np.ndarray, dt: float):
    """Collapse the four RK4 stages of zdot = A z + b(t) into matrices.

    z+ = Phi z + G1 b(t) + G2 b(t+dt/2) + G3 b(t+dt), algebraically
    identical to the classical stage evaluation for a linear system.
    """
    I = np.eye(A.shape[0])
    A2 = A @ A
    A3 = A2 @ A
    A4 = A3 @ A
    phi = I + dt * A + dt**2 / 2 * A2 + dt**3 / 6 * A3 + dt**4 / 24 * A4
    g1 = dt / 6 * (I + dt * A + dt**2 / 2 * A2 + dt**3 / 4 * A3)
    g2 = dt / 6 * (4 * I + 2 * dt * A + dt**2 / 2 * A2)
    g3 = dt / 6 * I
    return phi, g1, g2, g3


def integrate(cfg: SimConfig) -> SimResult:
    """Run the simulation and accumulate spacing errors and norms.

    Raises a divergence error carrying the first bad time if the state
    becomes non-finite.
    """
    sigma = spectral_abscissa(cfg.gains, cfg.n)
    if sigma >= 0:
        warnings.warn(
            f"error dynamics not certified stable (spectral abscissa {sigma:.3g})",
            stacklevel=2,
        )

    n = cfg.n
    m = n + 1
    dt = cfg.dt
    steps = int(round(cfg.t_end / dt))
    A = assemble_closed_loop(cfg.gains, n)
    phi, g1, g2, g3 = _rk4_update(A, dt)

    # stage-sampled inputs: one column of each weight matrix per disturbance
    t0 = np.arange(steps) * dt
    specs = []
    for spec in cfg.disturbances:
        idx = m + spec.vehicle
        d_start = spec._values(t0, dt, left_limit=False)
        d_mid = spec._values(t0 + dt / 2, dt, left_limit=False)
        d_end = spec._values(t0 + dt, dt, left_limit=True)
        specs.append((g1[:, idx].copy(), g2[:, idx].copy(), g3[:, idx].copy(),
                      d_start, d_mid, d_end))
    active = np.zeros(steps, dtype=bool)
    for _, _, _, d1, d2, d3 in specs:
        active |= (d1 != 0) | (d2 != 0) | (d3 != 0)

    if cfg.initial is not None:
        z = np.concatenate([cfg.initial.x, cfg.initial.v]).astype(float)
    else:
        z = np.zeros(2 * m)

    stored_idx = range(0, steps + 1, cfg.store_every)
    n_stored = len(stored_idx)
    t_store = np.array([i * dt for i in stored_idx])
    e_store = np.empty((n_stored, n))
    x_store = np.empty((n_stored, m)) if cfg.store_states else None
    v_store = np.empty((n_stored, m)) if cfg.store_states else None

    acc = np.zeros(n)
    e = z[0:n] - z[1 : n + 1]
    sq = e * e
    first_sq = sq.copy()
    acc += sq
    row = 0
    if 0 in stored_idx:
        e_store[0] = e
        if cfg.store_states:
            x_store[0] = z[:m]
            v_store[0] = z[m:]
        row = 1

    store_every = cfg.store_every
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            z = phi @ z
            if active[i]:
                for col1, col2, col3, d1, d2, d3 in specs:
                    z += d1[i] * col1 + d2[i] * col2 + d3[i] * col3
            e = z[0:n] - z[1 : n + 1]
            sq = e * e
            acc += sq
            total = float(sq.sum())
            if not math.isfinite(total):
                raise DivergenceError(
                    f"state became non-finite at t = {(i + 1) * dt:.6g}", t=(i + 1) * dt
                )
            if (i + 1) % store_every == 0:
                e_store[row] = e
                if cfg.store_states:
                    x_store[row] = z[:m]
                    v_store[row] = z[m:]
                row += 1

    acc -= 0.5 * first_sq
    acc -= 0.5 * sq  # last sample
    per_vehicle = np.sqrt(np.maximum(acc * dt, 0.0))
    total_norm = float(np.sqrt((acc * dt).sum())) if acc.size else 0.0

    # disturbance (L2,l2) norm: waveforms summed per vehicle, then trapezoid
    t_all = np.arange(steps + 1) * dt
    by_vehicle: dict[int, np.ndarray] = {}
    for spec in cfg.disturbances:
        vals = spec._values(t_all, dt, left_limit=False)
        if spec.vehicle in by_vehicle:
            by_vehicle[spec.vehicle] = by_vehicle[spec.vehicle] + vals
        else:
            by_vehicle[spec.vehicle] = vals
    d_sq = 0.0
    for vals in by_vehicle.values():
        d_sq += float(np.trapezoid(vals * vals, dx=dt))
    return SimResult(
        t=t_store,
        e=e_store,
        per_vehicle_l2=per_vehicle,
        total_norm=total_norm,
        d_norm=math.sqrt(d_sq),
        x=x_store,
        v=v_store,
    )


def l2l2_norm(samples: np.ndarray, dt: float) -> float:
    """Root of the summed trapezoidal time-integrals of squared rows."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if not (np.isfinite(dt) and dt > 0):
        raise ConfigError(f"dt must be positive, got {dt!r}")
    return float(np.sqrt(np.trapezoid(arr * arr, dx=dt, axis=1).sum()))


def sweep_N(
    g: ControllerGains,
    d: DisturbanceSpec,
    n_list: Sequence[int],
    dt: Optional[float] = None,
    t_end: Optional[float] = None,
) -> list[tuple[int, float]]:
    """Total (L2,l2) norm versus chain length for a leader disturbance.

    Rows come back in ascending N.  The horizon defaults per chain to the
    decay-based estimate; storage is decimated since only norms are kept.
    """
    if d.vehicle != 0:
        raise ConfigError(
            f"sweep requires the disturbance on the leader (vehicle 0), got {d.vehicle}"
        )
    if dt is None:
        dt = default_dt(g)
    out = []
    for n in sorted(set(int(v) for v in n_list)):
        horizon = t_end if t_end is not None else default_t_end(g, n, dt)
        steps = int(round(horizon / dt))
        cfg = SimConfig(
            gains=g,
            n=n,
            dt=dt,
            t_end=horizon,
            disturbances=(d,),
            store_every=max(1, steps // 256),
        )
        res = integrate(cfg)
        out.append((n, res.total_norm))
    return out
