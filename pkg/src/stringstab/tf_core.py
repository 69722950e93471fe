"""Elementary transfer functions of the bidirectional chain.

Everything here is exact pointwise complex arithmetic: the two coupling
terms ``p1 = a1 + b1*s`` and ``p2 = a2 + b2*s``, the branch-sensitive
square root ``m = sqrt((s^2+q)^2 - 4*p1*p2)`` with ``q = p1 + p2``, and
the flow transfer functions C1 (disturbance travelling towards the tail)
and C2 (towards the head).  All functions accept a complex scalar or an
ndarray of complex points and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidGainsError

ComplexLike = Union[complex, np.ndarray]

__all__ = [
    "AffineTerm",
    "ControllerGains",
    "eval_affine",
    "eval_m",
    "eval_c1",
    "eval_c2",
    "quadratic_residuals",
]


@dataclass(frozen=True)
class AffineTerm:
    """First-order coupling term ``a + b*s`` with positive stiffness and damping."""

    a: float
    b: float

    def __post_init__(self):
        for name in ("a", "b"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise InvalidGainsError(f"{name} must be finite, got {value!r}")
            if value <= 0:
                raise InvalidGainsError(f"{name} must be positive, got {value!r}")

    def __call__(self, s: ComplexLike) -> ComplexLike:
        return self.a + self.b * s

    def scaled(self, factor: float) -> "AffineTerm":
        return AffineTerm(factor * self.a, factor * self.b)


@dataclass(frozen=True)
class ControllerGains:
    """The two coupling terms: p1 towards the predecessor, p2 towards the follower."""

    p1: AffineTerm
    p2: AffineTerm

    @classmethod
    def from_gains(cls, a1: float, b1: float, a2: float, b2: float) -> "ControllerGains":
        return cls(AffineTerm(a1, b1), AffineTerm(a2, b2))

    @property
    def a1(self) -> float:
        return self.p1.a

    @property
    def b1(self) -> float:
        return self.p1.b

    @property
    def a2(self) -> float:
        return self.p2.a

    @property
    def b2(self) -> float:
        return self.p2.b

    def q(self, s: ComplexLike) -> ComplexLike:
        """Combined coupling q = p1 + p2, computed on demand."""
        return self.p1(s) + self.p2(s)

    def swapped(self) -> "ControllerGains":
        """Mirror chain: predecessor and follower couplings exchanged."""
        return ControllerGains(self.p2, self.p1)


def _as_points(s: ComplexLike) -> tuple[np.ndarray, bool]:
    arr = np.asarray(s, dtype=complex)
    return arr, arr.ndim == 0


def _ret(value: np.ndarray, scalar: bool) -> ComplexLike:
    return complex(value[()]) if scalar else value


def eval_affine(p: AffineTerm, s: ComplexLike) -> ComplexLike:
    """Evaluate ``a + b*s``."""
    arr, scalar = _as_points(s)
    return _ret(p.a + p.b * arr, scalar)


def _diag_term(g: ControllerGains, s: np.ndarray) -> np.ndarray:
    # s^2 + q(s): the diagonal entry of the chain operator
    return s * s + g.p1(s) + g.p2(s)


def _m_raw(g: ControllerGains, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = _diag_term(g, s)
    radicand = w * w - 4.0 * g.p1(s) * g.p2(s)
    root = np.sqrt(radicand)
    near = np.abs(w - root)
    far = np.abs(w + root)
    m = np.where(near < far, root, -root)
    # ties: nonnegative real part wins, then nonnegative imaginary part
    tie = near == far
    if np.any(tie):
        prefer = (root.real > 0) | ((root.real == 0) & (root.imag >= 0))
        m = np.where(tie, np.where(prefer, root, -root), m)
    return w, m


def eval_m(g: ControllerGains, s: ComplexLike) -> ComplexLike:
    """Square root of (s^2+q)^2 - 4*p1*p2 on the branch nearest to s^2+q.

    At high frequency the chosen root cancels the dominant s^2 terms of
    s^2 + q, which is what makes C1 and C2 proper.  Ties are broken
    towards nonnegative real part, then nonnegative imaginary part.
    """
    arr, scalar = _as_points(s)
    _, m = _m_raw(g, arr)
    return _ret(m, scalar)


def _flow_pair(g: ControllerGains, s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Return (w, m, C1, C2) evaluated stably.

    C1 = ((s^2+q) - m) / (2*p2) is computed as 2*p1/(w+m), identical by
    (w-m)(w+m) = 4*p1*p2 but free of the high-frequency cancellation in
    the difference w - m.
    """
    w, m = _m_raw(g, s)
    wpm = w + m
    p1v = g.p1(s)
    p2v = g.p2(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        c1 = 2.0 * p1v / wpm
        c2 = 2.0 * p2v / wpm
    bad = wpm == 0
    if np.any(bad):
        # w + m = 0 requires both w ~ 0 and p1*p2 ~ 0; fall back to the
        # subtractive form, which is exact there.
        c1 = np.where(bad, (w - m) / (2.0 * p2v), c1)
        c2 = np.where(bad, (w - m) / (2.0 * p1v), c2)
    return w, m, c1, c2


def eval_c1(g: ControllerGains, s: ComplexLike) -> ComplexLike:
    """Tail-directed flow transfer function ((s^2+q) - m) / (2*p2)."""
    arr, scalar = _as_points(s)
    p2v = np.asarray(g.p2(arr))
    if np.any(p2v == 0):
        raise ZeroDivisionError(f"p2(s) = 0 at s = {arr[p2v == 0].flat[0]}")
    _, _, c1, _ = _flow_pair(g, arr)
    return _ret(c1, scalar)


def eval_c2(g: ControllerGains, s: ComplexLike) -> ComplexLike:
    """Head-directed flow transfer function ((s^2+q) - m) / (2*p1)."""
    arr, scalar = _as_points(s)
    p1v = np.asarray(g.p1(arr))
    if np.any(p1v == 0):
        raise ZeroDivisionError(f"p1(s) = 0 at s = {arr[p1v == 0].flat[0]}")
    _, _, _, c2 = _flow_pair(g, arr)
    return _ret(c2, scalar)


def quadratic_residuals(g: ControllerGains, s: ComplexLike) -> tuple[ComplexLike, ComplexLike]:
    """Residuals of the quadratics that C1 and C2 must solve.

    Returns (p2*C1^2 - (s^2+q)*C1 + p1, p1*C2^2 - (s^2+q)*C2 + p2); both
    vanish identically, which is what makes the flow matrix reduce the
    chain operator to its corner form.
    """
    arr, scalar = _as_points(s)
    w, _, c1, c2 = _flow_pair(g, arr)
    p1v = g.p1(arr)
    p2v = g.p2(arr)
    r1 = p2v * c1 * c1 - w * c1 + p1v
    r2 = p1v * c2 * c2 - w * c2 + p2v
    return _ret(r1, scalar), _ret(r2, scalar)
