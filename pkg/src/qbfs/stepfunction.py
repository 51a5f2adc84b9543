"""Compactly supported step functions on R^n with exact rational data."""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .measure import Box, DyadicComplex, DyadicCube, Grid, _as_boxes
from .rational import (
    QComplex,
    Scalar,
    decode_rational,
    decode_scalar,
    encode_rational,
    encode_scalar,
    is_real,
    modulus,
    to_scalar,
)

_ZERO = Fraction(0)


def _real_only(op: Callable) -> Callable:
    def wrapped(a, b):
        if not (is_real(a) and is_real(b)):
            raise ValueError("max/min are only defined for real-valued step functions")
        return op(a, b)

    return wrapped


_OPS: dict[str, Callable] = {
    "add": operator.add,
    "subtract": operator.sub,
    "multiply": operator.mul,
    "max": _real_only(max),
    "min": _real_only(min),
}


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Finite sum ``sum_i value_i * chi_{box_i}`` over pairwise disjoint boxes.

    Pieces with value zero or empty boxes are dropped on construction, and
    the remaining pieces are stored sorted.  Two step functions compare
    equal when they agree almost everywhere.
    """

    pieces: tuple[tuple[Box, Scalar], ...]
    dim: int = 1

    def __init__(self, pieces: Iterable = (), dim: int | None = None, *, _trusted: bool = False):
        norm = []
        for region, value in pieces:
            if isinstance(region, DyadicCube):
                region = region.box
            elif not isinstance(region, Box):
                lo, hi = region
                region = Box.interval(lo, hi)
            v = value if _trusted else to_scalar(value)
            if v != 0 and not region.is_empty:
                norm.append((region, v))
        if dim is None:
            dim = norm[0][0].dim if norm else 1
        for b, _ in norm:
            if b.dim != dim:
                raise ValueError(f"piece of dimension {b.dim} in a {dim}-dimensional step function")
        norm.sort(key=lambda bv: (bv[0].lo, bv[0].hi))
        if not _trusted:
            _check_disjoint([b for b, _ in norm], dim)
        object.__setattr__(self, "pieces", tuple(norm))
        object.__setattr__(self, "dim", dim)

    # -- constructors ----------------------------------------------------------

    @classmethod
    def zero(cls, dim: int = 1) -> "StepFunction":
        return cls((), dim)

    @classmethod
    def indicator(cls, regions, value=1, dim: int | None = None) -> "StepFunction":
        if isinstance(regions, (Box, DyadicCube, DyadicComplex)):
            regions = [regions]
        boxes = [b for b in _as_boxes(regions) if not b.is_empty]
        if dim is None:
            dim = boxes[0].dim if boxes else 1
        if not boxes:
            return cls.zero(dim)
        g = Grid(boxes)
        cells = g.boxes_of(g.mask(boxes))
        return cls([(c, value) for c in _merge_1d_boxes(cells, dim)], dim)

    @classmethod
    def from_intervals(cls, triples: Iterable[tuple]) -> "StepFunction":
        """Build a 1-D step function from ``(lo, hi, value)`` triples."""
        return cls([(Box.interval(lo, hi), v) for lo, hi, v in triples], 1)

    @classmethod
    def from_grid(cls, grid: Grid, values: np.ndarray) -> "StepFunction":
        pieces = []
        for idx in np.argwhere(_nonzero_mask(values)):
            pieces.append((grid.cell_box(idx), values[tuple(idx)]))
        return cls(_merge_pieces(pieces, grid.dim), grid.dim, _trusted=True)

    # -- basic queries ---------------------------------------------------------

    @property
    def boxes(self) -> list[Box]:
        return [b for b, _ in self.pieces]

    @property
    def values(self) -> list[Scalar]:
        return [v for _, v in self.pieces]

    @property
    def is_zero(self) -> bool:
        return not self.pieces

    @property
    def is_real(self) -> bool:
        return all(is_real(v) for v in self.values)

    @property
    def support_measure(self) -> Fraction:
        return sum((b.measure for b in self.boxes), Fraction(0))

    def __call__(self, x) -> Scalar:
        if not isinstance(x, (tuple, list)):
            x = (x,)
        for b, v in self.pieces:
            if b.contains_point(x):
                return v
        return _ZERO

    def on_grid(self, grid: Grid) -> np.ndarray:
        arr = np.full(grid.shape, _ZERO, dtype=object)
        for b, v in self.pieces:
            arr[grid.slices(b)] = v
        return arr

    def grid_with(self, *others: "StepFunction", extra=()) -> Grid:
        boxes = list(self.boxes)
        for o in others:
            _same_dim(self, o)
            boxes.extend(o.boxes)
        return Grid(boxes, self.dim, extra=extra)

    def max_abs(self) -> Fraction:
        return max((modulus(v) for v in self.values), default=_ZERO)

    def bounding_box(self) -> Box | None:
        if not self.pieces:
            return None
        lo = tuple(min(b.lo[i] for b in self.boxes) for i in range(self.dim))
        hi = tuple(max(b.hi[i] for b in self.boxes) for i in range(self.dim))
        return Box(lo, hi)

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other):
        return pointwise_combine(self, other, "add")

    def __sub__(self, other):
        return pointwise_combine(self, other, "subtract")

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            return pointwise_combine(self, other, "multiply")
        return scale(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1)

    def __abs__(self):
        return absolute(self)

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        if self.dim != other.dim:
            return False
        return (self - other).is_zero

    def __hash__(self):  # pragma: no cover - identity hash, values are immutable
        return id(self)

    def __repr__(self):
        inner = ", ".join(f"{_fmt_box(b)}:{_fmt_scalar(v)}" for b, v in self.pieces[:6])
        more = ", ..." if len(self.pieces) > 6 else ""
        return f"StepFunction(dim={self.dim}, [{inner}{more}])"

    # -- serialisation ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {"dim": self.dim, "pieces": [{"region": encode_region(b), "value": encode_scalar(v)} for b, v in self.pieces]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, obj: dict) -> "StepFunction":
        try:
            pieces = [(decode_region(p["region"]), decode_scalar(p["value"])) for p in obj["pieces"]]
            dim = int(obj.get("dim", pieces[0][0].dim if pieces else 1))
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed step function: {exc}") from exc
        return cls(pieces, dim)

    @classmethod
    def from_json(cls, text: str) -> "StepFunction":
        return cls.from_dict(json.loads(text))


def encode_region(b: Box) -> dict:
    q = b.as_dyadic_cube()
    if q is not None:
        return {"k": q.k, "a": list(q.a)}
    if b.dim == 1:
        return {"lo": encode_rational(b.lo[0]), "hi": encode_rational(b.hi[0])}
    return {"lo": [encode_rational(x) for x in b.lo], "hi": [encode_rational(x) for x in b.hi]}


def decode_region(obj: dict) -> Box:
    if "k" in obj:
        a = obj["a"]
        return DyadicCube(int(obj["k"]), tuple(a) if isinstance(a, list) else (a,)).box
    lo, hi = obj["lo"], obj["hi"]
    if isinstance(lo, list):
        return Box(tuple(decode_rational(x) for x in lo), tuple(decode_rational(x) for x in hi))
    return Box.interval(decode_rational(lo), decode_rational(hi))


def _fmt_scalar(v) -> str:
    if isinstance(v, QComplex):
        return f"({v.re}{'+' if v.im >= 0 else '-'}{abs(v.im)}i)"
    return str(v)


def _fmt_box(b: Box) -> str:
    if b.dim == 1:
        return f"({b.lo[0]},{b.hi[0]})"
    return "x".join(f"({l},{h})" for l, h in zip(b.lo, b.hi))


def _same_dim(f: StepFunction, g: StepFunction) -> None:
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")


def _check_disjoint(boxes: list[Box], dim: int) -> None:
    if len(boxes) < 2:
        return
    if dim == 1:
        for a, b in zip(boxes, boxes[1:]):
            if b.lo[0] < a.hi[0]:
                raise ValueError(f"overlapping pieces {_fmt_box(a)} and {_fmt_box(b)}")
        return
    g = Grid(boxes)
    count = np.zeros(g.shape, dtype=np.int64)
    for b in boxes:
        count[g.slices(b)] += 1
    if (count > 1).any():
        raise ValueError("overlapping pieces in step function")


def _nonzero_mask(values: np.ndarray) -> np.ndarray:
    return np.frompyfunc(lambda v: v != 0, 1, 1)(values).astype(bool)


def _merge_pieces(pieces: list, dim: int) -> list:
    """Merge runs of equal values that are adjacent along the last axis."""
    if not pieces:
        return pieces
    pieces = sorted(pieces, key=lambda bv: (bv[0].lo[:-1], bv[0].hi[:-1], bv[0].lo[-1]))
    out = [pieces[0]]
    for b, v in pieces[1:]:
        pb, pv = out[-1]
        if pv == v and pb.lo[:-1] == b.lo[:-1] and pb.hi[:-1] == b.hi[:-1] and pb.hi[-1] == b.lo[-1]:
            out[-1] = (Box(pb.lo, pb.hi[:-1] + (b.hi[-1],)), v)
        else:
            out.append((b, v))
    return out


def _merge_1d_boxes(boxes: list[Box], dim: int) -> list[Box]:
    return [b for b, _ in _merge_pieces([(b, 1) for b in boxes], dim)]


# -- operations -------------------------------------------------------------------


def pointwise_combine(f: StepFunction, g: StepFunction, op: str) -> StepFunction:
    """Exact pointwise ``op`` of two step functions on their common refinement.

    ``op`` is one of ``add``, ``subtract``, ``multiply``, ``max``, ``min``.
    """
    if op not in _OPS:
        raise ValueError(f"unknown operation {op!r}")
    _same_dim(f, g)
    if f.is_zero and g.is_zero:
        return StepFunction.zero(f.dim)
    grid = f.grid_with(g)
    a, b = f.on_grid(grid), g.on_grid(grid)
    out = np.frompyfunc(_OPS[op], 2, 1)(a, b)
    return StepFunction.from_grid(grid, np.asarray(out, dtype=object).reshape(grid.shape))


def scale(f: StepFunction, a) -> StepFunction:
    a = to_scalar(a)
    if a == 0:
        return StepFunction.zero(f.dim)
    return StepFunction([(b, v * a) for b, v in f.pieces], f.dim, _trusted=True)


def absolute(f: StepFunction) -> StepFunction:
    """Pointwise modulus ``|f|``."""
    return StepFunction([(b, modulus(v)) for b, v in f.pieces], f.dim, _trusted=True)


def restrict(f: StepFunction, regions) -> StepFunction:
    """``f * chi_E`` where ``E`` is the union of ``regions``."""
    if isinstance(regions, (Box, DyadicCube, DyadicComplex)):
        regions = [regions]
    boxes = [b for b in _as_boxes(regions) if not b.is_empty]
    if f.is_zero or not boxes:
        return StepFunction.zero(f.dim)
    grid = Grid(f.boxes + boxes, f.dim)
    vals = f.on_grid(grid)
    vals[~grid.mask(boxes)] = _ZERO
    return StepFunction.from_grid(grid, vals)


def restrict_complement(f: StepFunction, regions) -> StepFunction:
    """``f * chi_{R^n minus E}``."""
    return f - restrict(f, regions)


def level_restrict(f: StepFunction, threshold, above: bool = True) -> StepFunction:
    """``f * chi_{|f| > threshold}`` (or ``<=`` when ``above`` is false)."""
    t = Fraction(threshold)
    keep = [(b, v) for b, v in f.pieces if (modulus(v) > t) == above]
    return StepFunction(keep, f.dim, _trusted=True)


def truncate(f: StepFunction, level) -> StepFunction:
    """``min(|f|, level)``."""
    level = Fraction(level)
    return StepFunction([(b, min(modulus(v), level)) for b, v in f.pieces], f.dim, _trusted=True)


def integrate(f: StepFunction) -> Scalar:
    """Exact ``int f``."""
    total: Scalar = Fraction(0)
    for b, v in f.pieces:
        total = total + v * b.measure
    return total


def integrate_abs(f: StepFunction) -> Fraction:
    """Exact ``int |f|`` (exact whenever the moduli are rational)."""
    return sum((modulus(v) * b.measure for b, v in f.pieces), Fraction(0))


def refine(f: StepFunction, level: int) -> StepFunction:
    """Split every piece into ``2^level`` equal parts along each axis."""
    if level <= 0:
        return f
    m = 2 ** level
    pieces = []
    for b, v in f.pieces:
        steps = [(h - l) / m for l, h in zip(b.lo, b.hi)]
        for idx in np.ndindex(*([m] * f.dim)):
            lo = tuple(l + s * i for l, s, i in zip(b.lo, steps, idx))
            hi = tuple(x + s for x, s in zip(lo, steps))
            pieces.append((Box(lo, hi), v))
    return StepFunction(pieces, f.dim, _trusted=True)


def common_grid(functions: Sequence[StepFunction]) -> tuple[Grid, np.ndarray, np.ndarray]:
    """Refine all ``functions`` onto one grid.

    Returns ``(grid, mu, V)`` where ``mu`` holds the float measures of the
    occupied cells (flattened) and ``V[i]`` the complex values of
    ``functions[i]`` on those cells.  Cells outside every support are
    dropped.
    """
    if not functions:
        raise ValueError("need at least one function")
    dim = functions[0].dim
    boxes = [b for f in functions for b in f.boxes]
    if not boxes:
        return Grid([], dim, extra=[[0, 1]] * dim), np.zeros(0), np.zeros((len(functions), 0), dtype=complex)
    grid = Grid(boxes, dim)
    occupied = grid.mask(boxes)
    flat = np.flatnonzero(occupied.ravel())
    mu = np.array([float(x) for x in grid.cell_measures().ravel()[flat]])
    V = np.zeros((len(functions), flat.size), dtype=complex)
    for i, f in enumerate(functions):
        arr = f.on_grid(grid).ravel()[flat]
        V[i] = [complex(v) if isinstance(v, QComplex) else float(v) for v in arr]
    return grid, mu, V
