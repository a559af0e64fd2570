"""Closed-form translator solutions: tilted grim reapers and the strip slope profile.

The grim reaper of width parameter c >= 1 over the strip |y - y_center| < c*pi/2,

    f(x, y) = c^2 log cos((y - y_center)/c) + tilt * x * sqrt(c^2 - 1) + shift,

solves the translator equation exactly and is the workhorse oracle: Dirichlet
data, initial guesses, and independent correctness checks all sample it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import GridDomain, ScalarField

__all__ = [
    "ReaperParams",
    "reaper_eval",
    "reaper_dy",
    "reaper_gradient",
    "reaper_for_gradient",
    "sample_reaper",
    "asymptotic_slope",
]

_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class ReaperParams:
    """Tilted grim reaper parameters; strip half-width is a = c*pi/2."""

    c: float = 1.0
    tilt: int = 0
    shift: float = 0.0
    y_center: float = 0.0

    def __post_init__(self):
        if self.c < 1.0:
            raise ValueError("c must be >= 1")
        if self.tilt not in (-1, 0, 1):
            raise ValueError("tilt must be -1, 0 or +1")
        if self.tilt == 0 and self.c != 1.0:
            raise ValueError("tilt 0 requires c = 1 (untilted grim reaper)")

    @property
    def half_width(self) -> float:
        return self.c * math.pi / 2.0

    def _check_strip(self, y):
        if np.any(np.abs(np.asarray(y) - self.y_center) >= self.half_width - _EDGE_TOL):
            raise ValueError("outside reaper strip")


def reaper_eval(p: ReaperParams, x, y):
    """f(x, y) for the tilted grim reaper; errors outside the open strip."""
    p._check_strip(y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    val = p.c**2 * np.log(np.cos((y - p.y_center) / p.c))
    val = val + p.tilt * x * math.sqrt(p.c**2 - 1.0) + p.shift
    return val if val.ndim else float(val)


def reaper_dy(p: ReaperParams, x, y):
    """f_y(x, y) = -c tan((y - y_center)/c)."""
    p._check_strip(y)
    y = np.asarray(y, dtype=float)
    val = -p.c * np.tan((y - p.y_center) / p.c)
    return val if val.ndim else float(val)


def reaper_gradient(p: ReaperParams, x, y):
    """(f_x, f_y); f_x = tilt * sqrt(c^2 - 1) is constant."""
    fy = reaper_dy(p, x, y)
    fx = p.tilt * math.sqrt(p.c**2 - 1.0)
    if np.ndim(fy):
        fx = np.full_like(np.asarray(fy), fx)
    return fx, fy


def reaper_for_gradient(v) -> tuple[ReaperParams, float]:
    """Reaper whose gradient equals v = (v1, v2) along the whole line y = const.

    Picks c = sqrt(1 + v1^2) (so the strip half-width c*pi/2 is >= pi/2),
    tilt = sign(v1), and the unique height y = -c*atan(v2/c) at which
    f_y = v2.  Returns (params, y).
    """
    v1, v2 = float(v[0]), float(v[1])
    c = math.sqrt(1.0 + v1 * v1)
    tilt = 0 if v1 == 0.0 else (1 if v1 > 0 else -1)
    y = -c * math.atan2(v2, c)
    return ReaperParams(c=c, tilt=tilt), y


def sample_reaper(p: ReaperParams, domain: GridDomain) -> ScalarField:
    """Sample the reaper on a grid; the grid must sit inside the strip."""
    X, Y = domain.meshgrid()
    return ScalarField(domain, reaper_eval(p, X, Y))


def asymptotic_slope(w: float, y):
    """Transverse slope profile (w/pi) * cot(pi*y/w) of the width-w strip.

    This is f_y of the tilted grim reaper of width w written in coordinates
    where the strip is (0, w); it is the far-end slope profile that solutions
    over the strip approach.  Strictly decreasing on (0, w), diverging to
    +inf at 0 and -inf at w.
    """
    if w <= 0:
        raise ValueError("strip width must be positive")
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0.0) or np.any(y_arr >= w):
        raise ValueError("y outside (0, w)")
    val = (w / math.pi) / np.tan(math.pi * y_arr / w)
    return val if val.ndim else float(val)
