"""Finite time scales and the delta-calculus primitives on them.

A time scale is represented by finitely many strictly increasing sample
points plus a kind for each adjacent gap.  A SCATTERED gap is a genuine
jump of the scale; a DENSE gap means the two points sample a continuum
segment.  On an all-SCATTERED scale ("exact discrete") every quantity
below is exact arithmetic.  Whenever a DENSE gap contributes, results are
approximations of the classical (continuum) quantities and carry an
``approximate`` flag.

Graininess is zero on DENSE gaps by convention: the grid spacing of a
sampled continuum segment is a numerical artifact, not graininess, and
the formulas that consume graininess must see zero there without waiting
for the resolution to grow.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "TimeScaleError",
    "GapKind",
    "PointClass",
    "TimeScale",
    "GridFunction",
    "delta_derivative",
    "delta_integral",
    "pushforward",
]


class TimeScaleError(ValueError):
    """Invalid time-scale construction, lookup, or domain mismatch."""


class GapKind(enum.Enum):
    SCATTERED = "S"
    DENSE = "D"


@dataclass(frozen=True)
class PointClass:
    """Side classification of a single point of a time scale."""

    left_scattered: bool
    right_scattered: bool

    @property
    def is_isolated(self) -> bool:
        return self.left_scattered and self.right_scattered

    @property
    def is_dense(self) -> bool:
        return not self.left_scattered and not self.right_scattered

    @property
    def label(self) -> str:
        if self.is_isolated:
            return "ISOLATED"
        if self.is_dense:
            return "DENSE"
        left = "LEFT_SCATTERED" if self.left_scattered else "LEFT_DENSE"
        right = "RIGHT_SCATTERED" if self.right_scattered else "RIGHT_DENSE"
        return f"{left}+{right}"


def _as_gap(g) -> GapKind:
    if isinstance(g, GapKind):
        return g
    try:
        return GapKind(g)
    except ValueError:
        raise TimeScaleError(f"unknown gap kind {g!r} (expected 'S' or 'D')") from None


@dataclass(frozen=True, eq=False)
class TimeScale:
    """Strictly increasing points with one :class:`GapKind` per adjacent pair.

    Use the factory constructors (:meth:`from_points`, :meth:`uniform`,
    :meth:`dense_interval`, :meth:`from_parts`) which enforce the minimum
    of three points.  Views produced by :meth:`kappa` may be shorter.
    Instances are immutable and safe to share.
    """

    points: np.ndarray
    gaps: tuple[GapKind, ...]

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float).copy()
        if pts.ndim != 1 or pts.size < 1:
            raise TimeScaleError("points must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(pts)):
            raise TimeScaleError("points must be finite")
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise TimeScaleError("points must be strictly increasing")
        gaps = tuple(_as_gap(g) for g in self.gaps)
        if len(gaps) != pts.size - 1:
            raise TimeScaleError(
                f"expected {pts.size - 1} gap kinds, got {len(gaps)}"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "gaps", gaps)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_points(cls, points: Sequence[float]) -> "TimeScale":
        """Exact discrete scale from explicit points (all gaps SCATTERED)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 1 or pts.size < 3:
            raise TimeScaleError("a time scale needs at least three points")
        return cls(pts, (GapKind.SCATTERED,) * (pts.size - 1))

    @classmethod
    def uniform(cls, a: float, b: float, h: float) -> "TimeScale":
        """Exact discrete scale a, a+h, ..., b.  (b-a)/h must be integral."""
        if not (a < b):
            raise TimeScaleError("need a < b")
        if not (h > 0):
            raise TimeScaleError("need step h > 0")
        ratio = (b - a) / h
        k = round(ratio)
        if abs(ratio - k) > 1e-9:
            raise TimeScaleError(f"(b-a)/h = {ratio!r} is not integral")
        if k < 2:
            raise TimeScaleError("a time scale needs at least three points")
        return cls(np.linspace(a, b, k + 1), (GapKind.SCATTERED,) * k)

    @classmethod
    def dense_interval(cls, a: float, b: float, resolution: int) -> "TimeScale":
        """Sampled continuum segment [a, b] with ``resolution`` points.

        All gaps are DENSE, so graininess is zero everywhere and delta
        quantities computed downstream are flagged approximate.
        """
        if not (a < b):
            raise TimeScaleError("need a < b")
        if resolution < 2:
            raise TimeScaleError("resolution must be at least 2")
        if resolution < 3:
            raise TimeScaleError("a time scale needs at least three points")
        return cls(
            np.linspace(a, b, resolution), (GapKind.DENSE,) * (resolution - 1)
        )

    @classmethod
    def from_parts(
        cls, points: Sequence[float], gaps: Iterable[GapKind | str]
    ) -> "TimeScale":
        """Mixed scale from explicit points and per-gap kinds."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 1 or pts.size < 3:
            raise TimeScaleError("a time scale needs at least three points")
        return cls(pts, tuple(_as_gap(g) for g in gaps))

    # -- basic queries ------------------------------------------------

    @property
    def n(self) -> int:
        return int(self.points.size)

    @property
    def a(self) -> float:
        return float(self.points[0])

    @property
    def b(self) -> float:
        return float(self.points[-1])

    @property
    def is_exact_discrete(self) -> bool:
        return all(g is GapKind.SCATTERED for g in self.gaps)

    @property
    def has_dense(self) -> bool:
        return any(g is GapKind.DENSE for g in self.gaps)

    def _check_index(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"point index {i} out of range [0, {self.n})")
        return i

    def spacing(self, i: int) -> float:
        """Distance to the next point (quadrature weight of gap i)."""
        i = self._check_index(i)
        if i == self.n - 1:
            return 0.0
        return float(self.points[i + 1] - self.points[i])

    def sigma(self, i: int) -> int:
        """Forward jump, as an index.  Fixes the last point and right-dense points."""
        i = self._check_index(i)
        if i < self.n - 1 and self.gaps[i] is GapKind.SCATTERED:
            return i + 1
        return i

    def rho(self, i: int) -> int:
        """Backward jump, as an index.  Fixes the first point and left-dense points."""
        i = self._check_index(i)
        if i > 0 and self.gaps[i - 1] is GapKind.SCATTERED:
            return i - 1
        return i

    def mu(self, i: int) -> float:
        """Forward graininess: gap width on SCATTERED gaps, else zero."""
        i = self._check_index(i)
        if i < self.n - 1 and self.gaps[i] is GapKind.SCATTERED:
            return float(self.points[i + 1] - self.points[i])
        return 0.0

    def classify(self, i: int) -> PointClass:
        i = self._check_index(i)
        right = i < self.n - 1 and self.gaps[i] is GapKind.SCATTERED
        left = i > 0 and self.gaps[i - 1] is GapKind.SCATTERED
        return PointClass(left_scattered=left, right_scattered=right)

    @property
    def kappa_length(self) -> int:
        """Number of leading points in the kappa restriction of the scale."""
        if self.n >= 2 and self.gaps[-1] is GapKind.SCATTERED:
            return self.n - 1
        return self.n

    def kappa(self) -> "TimeScale":
        """Drop the maximum when it is left-scattered; otherwise unchanged.

        The result shares point values with the parent and may have fewer
        than three points.
        """
        if self.kappa_length == self.n:
            return self
        return TimeScale(self.points[:-1], self.gaps[:-1])

    def index_of(self, t: float) -> int:
        """Index of the point matching t within 1e-12 * max(1, |t|)."""
        tol = 1e-12 * max(1.0, abs(t))
        j = int(np.searchsorted(self.points, t))
        for i in (j - 1, j):
            if 0 <= i < self.n and abs(float(self.points[i]) - t) <= tol:
                return i
        raise TimeScaleError(f"no scale point within tolerance of t = {t!r}")

    # -- serialization ------------------------------------------------

    def to_json(self) -> dict:
        return {
            "points": [float(t) for t in self.points],
            "gaps": [g.value for g in self.gaps],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "TimeScale":
        """Parse the canonical form or the uniform/dense shorthands."""
        if "uniform" in obj:
            u = obj["uniform"]
            return cls.uniform(float(u["a"]), float(u["b"]), float(u["h"]))
        if "dense" in obj:
            d = obj["dense"]
            return cls.dense_interval(
                float(d["a"]), float(d["b"]), int(d["resolution"])
            )
        if "points" not in obj:
            raise TimeScaleError(
                "scale object needs 'points', 'uniform', or 'dense'"
            )
        points = obj["points"]
        gaps = obj.get("gaps")
        if gaps is None:
            gaps = ["S"] * (len(points) - 1)
        return cls.from_parts(points, gaps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeScale):
            return NotImplemented
        return self.gaps == other.gaps and np.array_equal(self.points, other.points)

    def __repr__(self) -> str:
        kinds = "".join(g.value for g in self.gaps)
        return f"TimeScale(n={self.n}, [{self.a:g}, {self.b:g}], gaps={kinds!r})"


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Vector-valued samples on a leading prefix of a time scale.

    ``values`` has one length-``dim`` row per covered point.  A full grid
    function covers every point of ``base``; derivative-like results cover
    a shorter prefix (their natural domain).  ``approximate`` marks values
    that involved a DENSE-gap approximation somewhere upstream.
    """

    base: TimeScale
    values: np.ndarray
    approximate: bool = False

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.ndim != 2:
            raise TimeScaleError("values must be a 1-D or 2-D array")
        if not 1 <= vals.shape[0] <= self.base.n:
            raise TimeScaleError(
                f"value count {vals.shape[0]} exceeds scale size {self.base.n}"
            )
        if vals.shape[1] < 1:
            raise TimeScaleError("dimension must be at least 1")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def sample(
        cls, scale: TimeScale, fn: Callable[[float], float | Sequence[float]]
    ) -> "GridFunction":
        """Sample fn at every point of the scale."""
        rows = [np.atleast_1d(np.asarray(fn(float(t)), dtype=float)) for t in scale.points]
        return cls(scale, np.vstack(rows))

    @property
    def valid(self) -> int:
        """Number of leading points this function is defined on."""
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    @property
    def is_full(self) -> bool:
        return self.valid == self.base.n

    def component(self, k: int) -> np.ndarray:
        return self.values[:, k]


def delta_derivative(f: GridFunction) -> GridFunction:
    """Delta derivative of f, one point shorter than its input prefix.

    At each covered point the value is the forward quotient over the gap
    to the right.  On SCATTERED gaps that quotient is the exact delta
    derivative; on DENSE gaps it is a first-order approximation of the
    classical derivative and the result is flagged approximate.
    """
    m = f.valid
    if m < 2:
        raise TimeScaleError("delta derivative needs at least two covered points")
    dt = np.diff(f.base.points[:m])
    out = (f.values[1:m] - f.values[: m - 1]) / dt[:, None]
    approx = f.approximate or any(
        g is GapKind.DENSE for g in f.base.gaps[: m - 1]
    )
    return GridFunction(f.base, out, approximate=approx)


def delta_integral(f: GridFunction, lo: int, hi: int) -> np.ndarray:
    """Delta integral of f from point ``lo`` to point ``hi`` (lo <= hi).

    SCATTERED gaps contribute the exact left-rectangle term
    f(t_i) * mu(t_i); DENSE gaps contribute a trapezoid on the sampled
    segment.  Returns a length-``dim`` vector.
    """
    scale = f.base
    lo = int(lo)
    hi = int(hi)
    if not 0 <= lo <= hi < scale.n:
        raise TimeScaleError(f"bad integration range [{lo}, {hi}] on n={scale.n}")
    total = np.zeros(f.dim)
    for j in range(lo, hi):
        w = float(scale.points[j + 1] - scale.points[j])
        if scale.gaps[j] is GapKind.SCATTERED:
            if j >= f.valid:
                raise TimeScaleError("function prefix too short for this integral")
            total += f.values[j] * w
        else:
            if j + 1 >= f.valid:
                raise TimeScaleError("function prefix too short for this integral")
            total += 0.5 * (f.values[j] + f.values[j + 1]) * w
    return total


def pushforward(
    scale: TimeScale, nu: GridFunction, f: GridFunction
) -> tuple[TimeScale, GridFunction, GridFunction]:
    """Transport f through the strictly increasing change of scale nu.

    Returns the image scale nu(T) with gap kinds inherited, f carried
    over to it (same values, matched by index), and the delta derivative
    of nu on the original scale.
    """
    if nu.base is not scale and nu.base != scale:
        raise TimeScaleError("nu must live on the given scale")
    if f.base is not scale and f.base != scale:
        raise TimeScaleError("f must live on the given scale")
    if nu.dim != 1:
        raise TimeScaleError("nu must be scalar")
    if not (nu.is_full and f.is_full):
        raise TimeScaleError("nu and f must cover the whole scale")
    w = nu.component(0)
    if not np.all(np.diff(w) > 0):
        raise TimeScaleError("nu must be strictly increasing on the scale")
    image = TimeScale(w, scale.gaps)
    f_image = GridFunction(image, f.values, approximate=f.approximate)
    return image, f_image, delta_derivative(nu)
