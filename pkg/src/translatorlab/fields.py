"""Grid data model and discrete calculus shared by every other module.

A scalar field lives on a uniform rectangular grid.  Values are stored as a
(nx, ny) float64 array with the x index major, so ``values[i, j]`` is the
field at ``(x_min + i*hx, y_min + j*hy)``.  The row-major flattening of that
array (all y for the first x, then the next x, ...) is also the on-disk
order of the ``.field.csv`` format.

Boundary data is described segment-wise per edge; infinite segments are
capped at a finite magnitude M when evaluated, with the node shared by a
PlusInf and a MinusInf segment taking the average value 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "GridDomain",
    "ScalarField",
    "BoundarySpec",
    "Segment",
    "Finite",
    "Trace",
    "PLUS_INF",
    "MINUS_INF",
    "gradient",
    "gradient_field",
    "upward_normal",
    "normal_field",
    "interpolate",
    "shifted_difference",
    "write_field",
    "read_field",
]


@dataclass(frozen=True)
class GridDomain:
    """Uniform rectangular grid: node (i, j) sits at (x_min + i*hx, y_min + j*hy)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("domain bounds must satisfy x_min < x_max, y_min < y_max")
        if self.nx < 3 or self.ny < 3:
            raise ValueError("grid needs at least 3 nodes per direction")

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    def x(self, i: int) -> float:
        return self.x_min + i * self.hx

    def y(self, j: int) -> float:
        return self.y_min + j * self.hy

    def xs(self) -> np.ndarray:
        return self.x_min + np.arange(self.nx) * self.hx

    def ys(self) -> np.ndarray:
        return self.y_min + np.arange(self.ny) * self.hy

    def index_of(self, x: float, y: float) -> tuple[int, int]:
        """Nearest node indices; exact round trip at node coordinates."""
        i = int(round((x - self.x_min) / self.hx))
        j = int(round((y - self.y_min) / self.hy))
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise IndexError(f"point ({x}, {y}) outside grid")
        return i, j

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")


@dataclass(frozen=True)
class ScalarField:
    """Immutable discrete graph function on a GridDomain.

    ``anchor`` is an optional normalization record ((i, j), value): the field
    value at that node is pinned to the recorded value.
    """

    domain: GridDomain
    values: np.ndarray
    anchor: Optional[tuple[tuple[int, int], float]] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.domain.nx, self.domain.ny):
            raise ValueError(
                f"values shape {v.shape} != grid ({self.domain.nx}, {self.domain.ny})"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must all be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.anchor is not None:
            (i, j), a = self.anchor
            if v[i, j] != a:
                raise ValueError("anchor value does not match field value at anchor node")

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.domain, values)

    def normalized_at(self, i: int, j: int, target: float = 0.0) -> "ScalarField":
        """Shift by a constant so the value at node (i, j) equals ``target``."""
        shifted = self.values - (self.values[i, j] - target)
        return ScalarField(self.domain, shifted, anchor=((i, j), float(shifted[i, j])))


# ---------------------------------------------------------------------------
# boundary data


class _InfValue:
    __slots__ = ("sign", "_name")

    def __init__(self, sign: int, name: str):
        self.sign = sign
        self._name = name

    def __repr__(self):
        return self._name


PLUS_INF = _InfValue(+1, "PLUS_INF")
MINUS_INF = _InfValue(-1, "MINUS_INF")


@dataclass(frozen=True)
class Finite:
    value: float


@dataclass(frozen=True)
class Trace:
    """Boundary values sampled from an oracle callable f(x, y) or a stored field."""

    source: Callable[[float, float], float] | ScalarField

    def eval(self, x: float, y: float) -> float:
        if isinstance(self.source, ScalarField):
            return float(interpolate(self.source, np.asarray([x]), np.asarray([y]))[0])
        return float(self.source(x, y))


BoundaryValue = object  # Finite | Trace | PLUS_INF | MINUS_INF


@dataclass(frozen=True)
class Segment:
    """Half-open coordinate interval [lo, hi] on an edge with one value tag."""

    lo: float
    hi: float
    value: BoundaryValue

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("segment needs lo < hi")


_EDGES = ("bottom", "top", "left", "right")


@dataclass(frozen=True)
class BoundarySpec:
    """Per-edge segment lists plus the cap magnitude M standing in for infinity.

    Segments on each edge must be disjoint and cover the edge.  Capped
    evaluation maps PlusInf -> +M, MinusInf -> -M, Finite(v) -> v and
    Trace -> clamp(sample, -M, M); a node shared by two segments takes the
    average of both values (0 at a PlusInf/MinusInf jump).
    """

    bottom: Sequence[Segment]
    top: Sequence[Segment]
    left: Sequence[Segment]
    right: Sequence[Segment]
    cap: float = 6.0

    def __post_init__(self):
        if not self.cap > 0:
            raise ValueError("cap must be positive")
        for name in _EDGES:
            segs = sorted(getattr(self, name), key=lambda s: s.lo)
            if not segs:
                raise ValueError(f"edge {name!r} has no segments")
            for a, b in zip(segs, segs[1:]):
                if b.lo < a.hi - 1e-12:
                    raise ValueError(f"overlapping segments on edge {name!r}")
            object.__setattr__(self, name, tuple(segs))

    def validate_cover(self, domain: GridDomain):
        spans = {
            "bottom": (domain.x_min, domain.x_max),
            "top": (domain.x_min, domain.x_max),
            "left": (domain.y_min, domain.y_max),
            "right": (domain.y_min, domain.y_max),
        }
        for name, (lo, hi) in spans.items():
            segs = getattr(self, name)
            if segs[0].lo > lo + 1e-12 or segs[-1].hi < hi - 1e-12:
                raise ValueError(f"edge {name!r} segments do not cover [{lo}, {hi}]")
            for a, b in zip(segs, segs[1:]):
                if b.lo > a.hi + 1e-12:
                    raise ValueError(f"gap between segments on edge {name!r}")

    def has_infinite_data(self) -> bool:
        return any(
            isinstance(seg.value, _InfValue)
            for name in _EDGES
            for seg in getattr(self, name)
        )

    def jump_points(self):
        """(x0, edge, left_sign, right_sign) records where the capped data
        jumps between adjacent infinite segments of opposite sign."""
        out = []
        for name in ("bottom", "top"):
            segs = getattr(self, name)
            for a, b in zip(segs, segs[1:]):
                if (
                    isinstance(a.value, _InfValue)
                    and isinstance(b.value, _InfValue)
                    and a.value.sign != b.value.sign
                ):
                    out.append((a.hi, name, a.value.sign, b.value.sign))
        return out

    @staticmethod
    def _eval_segment(seg: Segment, x: float, y: float, cap: float) -> float:
        v = seg.value
        if isinstance(v, _InfValue):
            return v.sign * cap
        if isinstance(v, Finite):
            return v.value
        if isinstance(v, Trace):
            return float(np.clip(v.eval(x, y), -cap, cap))
        raise TypeError(f"unknown boundary value {v!r}")

    def evaluate(self, domain: GridDomain, cap: Optional[float] = None) -> dict[str, np.ndarray]:
        """Capped boundary values per edge, corners averaged between edges.

        Returns arrays keyed 'bottom'/'top' (length nx) and 'left'/'right'
        (length ny); the four corner entries are consistent across the two
        edges that share them.
        """
        M = float(self.cap if cap is None else cap)
        self.validate_cover(domain)
        edge_coord = {
            "bottom": domain.y_min,
            "top": domain.y_max,
            "left": domain.x_min,
            "right": domain.x_max,
        }
        xs, ys = domain.xs(), domain.ys()
        out = {}
        for edge, coords in (("bottom", xs), ("top", xs), ("left", ys), ("right", ys)):
            horizontal = edge in ("bottom", "top")
            arr = np.empty(len(coords))
            for k, t in enumerate(coords):
                t = float(t)
                x, y = (t, edge_coord[edge]) if horizontal else (edge_coord[edge], t)
                vals = [
                    self._eval_segment(seg, x, y, M)
                    for seg in getattr(self, edge)
                    if seg.lo - 1e-12 <= t <= seg.hi + 1e-12
                ]
                if not vals:
                    raise ValueError(f"no segment covers {t} on edge {edge!r}")
                arr[k] = sum(vals) / len(vals)
            out[edge] = arr
        # corners: average the two incident edge evaluations
        corners = {
            (0, 0): ("bottom", 0, "left", 0),
            (-1, 0): ("bottom", -1, "right", 0),
            (0, -1): ("top", 0, "left", -1),
            (-1, -1): ("top", -1, "right", -1),
        }
        for (ci, cj), (e1, k1, e2, k2) in corners.items():
            v = 0.5 * (out[e1][k1] + out[e2][k2])
            out[e1][k1] = v
            out[e2][k2] = v
        return out


# ---------------------------------------------------------------------------
# discrete calculus


def _gradient_1d(vals: np.ndarray, k: int, h: float) -> float:
    n = len(vals)
    if 0 < k < n - 1:
        return (vals[k + 1] - vals[k - 1]) / (2 * h)
    if k == 0:
        return (-3 * vals[0] + 4 * vals[1] - vals[2]) / (2 * h)
    return (3 * vals[n - 1] - 4 * vals[n - 2] + vals[n - 3]) / (2 * h)


def gradient(u: ScalarField, i: int, j: int) -> tuple[float, float]:
    """Second-order discrete gradient at node (i, j).

    Central differences at interior nodes, one-sided 3-point stencils on the
    boundary; both are exact for affine fields.
    """
    d = u.domain
    if not (0 <= i < d.nx and 0 <= j < d.ny):
        raise IndexError(f"node ({i}, {j}) out of range")
    ux = _gradient_1d(u.values[:, j], i, d.hx)
    uy = _gradient_1d(u.values[i, :], j, d.hy)
    return float(ux), float(uy)


def gradient_field(u: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """(ux, uy) arrays over the whole grid (same stencils as ``gradient``)."""
    d = u.domain
    v = u.values
    ux = np.empty_like(v)
    uy = np.empty_like(v)
    ux[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2 * d.hx)
    ux[0, :] = (-3 * v[0, :] + 4 * v[1, :] - v[2, :]) / (2 * d.hx)
    ux[-1, :] = (3 * v[-1, :] - 4 * v[-2, :] + v[-3, :]) / (2 * d.hx)
    uy[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * d.hy)
    uy[:, 0] = (-3 * v[:, 0] + 4 * v[:, 1] - v[:, 2]) / (2 * d.hy)
    uy[:, -1] = (3 * v[:, -1] - 4 * v[:, -2] + v[:, -3]) / (2 * d.hy)
    return ux, uy


def upward_normal(u: ScalarField, i: int, j: int) -> np.ndarray:
    """Upward unit normal nu = (-ux, -uy, 1)/sqrt(1+ux^2+uy^2) at node (i, j)."""
    ux, uy = gradient(u, i, j)
    s = math.sqrt(1.0 + ux * ux + uy * uy)
    return np.array([-ux / s, -uy / s, 1.0 / s])


def normal_field(u: ScalarField) -> np.ndarray:
    """(nx, ny, 3) array of upward unit normals."""
    ux, uy = gradient_field(u)
    s = np.sqrt(1.0 + ux**2 + uy**2)
    return np.stack([-ux / s, -uy / s, 1.0 / s], axis=-1)


def interpolate(u: ScalarField, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear interpolation at points (x, y); points must lie in the domain."""
    d = u.domain
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    eps = 1e-9
    if (
        np.any(x < d.x_min - eps * d.hx)
        or np.any(x > d.x_max + eps * d.hx)
        or np.any(y < d.y_min - eps * d.hy)
        or np.any(y > d.y_max + eps * d.hy)
    ):
        raise ValueError("interpolation point outside grid")
    fx = np.clip((x - d.x_min) / d.hx, 0.0, d.nx - 1.0)
    fy = np.clip((y - d.y_min) / d.hy, 0.0, d.ny - 1.0)
    i0 = np.minimum(fx.astype(int), d.nx - 2)
    j0 = np.minimum(fy.astype(int), d.ny - 2)
    tx = fx - i0
    ty = fy - j0
    v = u.values
    return (
        v[i0, j0] * (1 - tx) * (1 - ty)
        + v[i0 + 1, j0] * tx * (1 - ty)
        + v[i0, j0 + 1] * (1 - tx) * ty
        + v[i0 + 1, j0 + 1] * tx * ty
    )


def shifted_difference(f1: ScalarField, f2: ScalarField, v: tuple[float, float]) -> ScalarField:
    """g(p) = f1(p) - f2(p + v) on the overlap window, f2 sampled bilinearly.

    The result keeps f1's grid spacing; its domain is the largest node-aligned
    window of f1 whose v-shifted image stays inside f2.
    """
    d1, d2 = f1.domain, f2.domain
    vx, vy = float(v[0]), float(v[1])
    x_lo = max(d1.x_min, d2.x_min - vx)
    x_hi = min(d1.x_max, d2.x_max - vx)
    y_lo = max(d1.y_min, d2.y_min - vy)
    y_hi = min(d1.y_max, d2.y_max - vy)
    i_lo = int(math.ceil((x_lo - d1.x_min) / d1.hx - 1e-9))
    i_hi = int(math.floor((x_hi - d1.x_min) / d1.hx + 1e-9))
    j_lo = int(math.ceil((y_lo - d1.y_min) / d1.hy - 1e-9))
    j_hi = int(math.floor((y_hi - d1.y_min) / d1.hy + 1e-9))
    if i_hi - i_lo < 2 or j_hi - j_lo < 2:
        raise ValueError("shifted overlap window is empty or degenerate")
    dom = GridDomain(
        d1.x(i_lo), d1.x(i_hi), d1.y(j_lo), d1.y(j_hi), i_hi - i_lo + 1, j_hi - j_lo + 1
    )
    X, Y = dom.meshgrid()
    g = f1.values[i_lo : i_hi + 1, j_lo : j_hi + 1] - interpolate(
        f2, X.ravel() + vx, Y.ravel() + vy
    ).reshape(X.shape)
    return ScalarField(dom, g)


# ---------------------------------------------------------------------------
# serialization (.field.csv): key=value header, then one value per line in
# row-major order (x index major).


def write_field(u: ScalarField, path) -> None:
    d = u.domain
    with open(path, "w") as fh:
        fh.write(f"x_min={d.x_min!r}\n")
        fh.write(f"x_max={d.x_max!r}\n")
        fh.write(f"y_min={d.y_min!r}\n")
        fh.write(f"y_max={d.y_max!r}\n")
        fh.write(f"nx={d.nx}\n")
        fh.write(f"ny={d.ny}\n")
        for val in u.values.ravel():
            fh.write(f"{val!r}\n")


def read_field(path) -> ScalarField:
    header: dict[str, str] = {}
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if "=" in line:
                k, _, v = line.partition("=")
                header[k.strip()] = v.strip()
            else:
                values.append(float(line))
    try:
        dom = GridDomain(
            float(header["x_min"]),
            float(header["x_max"]),
            float(header["y_min"]),
            float(header["y_max"]),
            int(header["nx"]),
            int(header["ny"]),
        )
    except KeyError as exc:
        raise ValueError(f"field file missing header key {exc}") from exc
    if len(values) != dom.nx * dom.ny:
        raise ValueError(
            f"field file holds {len(values)} values, grid wants {dom.nx * dom.ny}"
        )
    return ScalarField(dom, np.asarray(values).reshape(dom.nx, dom.ny))
