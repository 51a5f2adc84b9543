"""Exact Lebesgue measure of finite unions of rational boxes.

Boxes are products of rational intervals.  Whether a face belongs to a box
is ignored everywhere in this module: sets that differ by a null set are
identified.  Unions are measured by coordinate compression onto the grid
spanned by all box faces, so every answer is an exact :class:`Fraction`.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, order=True)
class Box:
    """The open box ``prod_i (lo[i], hi[i])`` with rational corners."""

    lo: tuple[Fraction, ...]
    hi: tuple[Fraction, ...]

    def __post_init__(self):
        lo = tuple(Fraction(x) for x in self.lo)
        hi = tuple(Fraction(x) for x in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box corners must have the same positive length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def interval(cls, lo, hi) -> "Box":
        return cls((lo,), (hi,))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def is_empty(self) -> bool:
        return any(h <= l for l, h in zip(self.lo, self.hi))

    @property
    def measure(self) -> Fraction:
        if self.is_empty:
            return Fraction(0)
        return reduce(lambda acc, lh: acc * (lh[1] - lh[0]), zip(self.lo, self.hi), Fraction(1))

    def intersect(self, other: "Box") -> "Box":
        _same_dim(self, other)
        return Box(
            tuple(max(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(min(a, b) for a, b in zip(self.hi, other.hi)),
        )

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def contains_point(self, x: Sequence) -> bool:
        """Half-open membership ``lo <= x < hi`` (a.e. convention for evaluation)."""
        return all(l <= Fraction(t) < h for l, h, t in zip(self.lo, self.hi, x))

    def scaled(self, c: Fraction) -> "Box":
        c = Fraction(c)
        return Box(tuple(x * c for x in self.lo), tuple(x * c for x in self.hi))

    def expanded(self, r: Fraction) -> "Box":
        r = Fraction(r)
        return Box(tuple(x - r for x in self.lo), tuple(x + r for x in self.hi))

    def as_dyadic_cube(self) -> "DyadicCube | None":
        side = self.hi[0] - self.lo[0]
        if side <= 0 or any(h - l != side for l, h in zip(self.lo, self.hi)):
            return None
        num, den = side.numerator, side.denominator
        if num != 1 and den != 1:
            return None
        v = den if num == 1 else num
        if v & (v - 1):
            return None
        k = v.bit_length() - 1
        if num != 1:
            k = -k
        scale = Fraction(2) ** k
        corner = [l * scale for l in self.lo]
        if any(c.denominator != 1 for c in corner):
            return None
        return DyadicCube(k, tuple(int(c) for c in corner))


def _same_dim(a: Box, b: Box) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


@dataclass(frozen=True, order=True)
class DyadicCube:
    """``Q_{k,a} = prod_i (a_i / 2^k, (a_i + 1) / 2^k)``."""

    k: int
    a: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        if not self.a:
            raise ValueError("cube corner must be non-empty")

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def side(self) -> Fraction:
        return Fraction(2) ** (-self.k)

    @property
    def measure(self) -> Fraction:
        return Fraction(2) ** (-self.k * self.dim)

    @property
    def box(self) -> Box:
        s = self.side
        return Box(tuple(ai * s for ai in self.a), tuple((ai + 1) * s for ai in self.a))

    def children(self) -> list["DyadicCube"]:
        out = []
        for bits in range(2 ** self.dim):
            out.append(DyadicCube(self.k + 1, tuple(2 * ai + ((bits >> i) & 1) for i, ai in enumerate(self.a))))
        return out


@dataclass(frozen=True)
class DyadicComplex:
    """A finite union of distinct dyadic cubes, all of the same order."""

    k: int
    cubes: frozenset

    def __post_init__(self):
        cubes = frozenset(self.cubes)
        for q in cubes:
            if q.k != self.k:
                raise ValueError(f"cube {q} is not of order {self.k}")
        dims = {q.dim for q in cubes}
        if len(dims) > 1:
            raise ValueError("cubes of mixed dimension")
        object.__setattr__(self, "cubes", cubes)

    @property
    def dim(self) -> int:
        return next(iter(self.cubes)).dim if self.cubes else 0

    @property
    def measure(self) -> Fraction:
        if not self.cubes:
            return Fraction(0)
        return len(self.cubes) * Fraction(2) ** (-self.k * self.dim)

    def boxes(self) -> list[Box]:
        return [q.box for q in sorted(self.cubes)]

    def __len__(self):
        return len(self.cubes)


@dataclass(frozen=True)
class MeasureSpaceDescriptor:
    """Which measure space a computation lives on.

    ``kind`` is ``"interval"`` for ``(0, length)``, ``"euclidean"`` for
    ``R^dim`` or ``"atomic"`` for finitely many weighted atoms.  Atoms are
    realised as consecutive intervals ``(c_j, c_j + w_j)``; functions that
    are constant on those intervals are the functions on the atomic space.
    """

    kind: str
    dim: int = 1
    length: Fraction | None = None
    atoms: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        if self.kind not in ("interval", "euclidean", "atomic"):
            raise ValueError(f"unknown measure space kind {self.kind!r}")
        if self.kind == "interval":
            if self.length is None or Fraction(self.length) <= 0:
                raise ValueError("interval measure space needs a positive length")
            object.__setattr__(self, "length", Fraction(self.length))
        if self.kind == "atomic":
            if not self.atoms:
                raise ValueError("atomic measure space needs at least one atom")
            atoms = tuple((str(lbl), Fraction(w)) for lbl, w in self.atoms)
            if any(w <= 0 for _, w in atoms):
                raise ValueError("atomic weights must be strictly positive")
            object.__setattr__(self, "atoms", atoms)

    @classmethod
    def atomic(cls, weights: Iterable, labels: Iterable[str] | None = None) -> "MeasureSpaceDescriptor":
        weights = [Fraction(w) for w in weights]
        labels = list(labels) if labels is not None else [str(i) for i in range(len(weights))]
        return cls("atomic", atoms=tuple(zip(labels, weights)))

    def atom_boxes(self) -> list[Box]:
        if self.kind != "atomic":
            raise ValueError("not an atomic measure space")
        out, c = [], Fraction(0)
        for _, w in self.atoms:
            out.append(Box.interval(c, c + w))
            c += w
        return out

    @property
    def total_measure(self):
        if self.kind == "interval":
            return self.length
        if self.kind == "atomic":
            return sum((w for _, w in self.atoms), Fraction(0))
        return float("inf")


# -- grid machinery ------------------------------------------------------------


class Grid:
    """Coordinate-compressed grid spanned by the faces of a family of boxes."""

    def __init__(self, boxes: Iterable[Box], dim: int | None = None, extra: Sequence[Sequence] = ()):
        boxes = list(boxes)
        if dim is None:
            if not boxes:
                raise ValueError("cannot infer dimension of an empty grid")
            dim = boxes[0].dim
        coords: list[set] = [set() for _ in range(dim)]
        for b in boxes:
            if b.dim != dim:
                raise ValueError(f"dimension mismatch: {b.dim} vs {dim}")
            for i in range(dim):
                coords[i].add(b.lo[i])
                coords[i].add(b.hi[i])
        for i, cs in enumerate(extra):
            coords[i].update(Fraction(c) for c in cs)
        self.dim = dim
        self.axes = [sorted(c) for c in coords]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(max(len(a) - 1, 0) for a in self.axes)

    def slices(self, box: Box) -> tuple[slice, ...]:
        out = []
        for i in range(self.dim):
            lo = bisect_left(self.axes[i], box.lo[i])
            hi = bisect_left(self.axes[i], box.hi[i])
            out.append(slice(lo, max(lo, hi)))
        return tuple(out)

    def widths(self) -> list[list[Fraction]]:
        return [[a[j + 1] - a[j] for j in range(len(a) - 1)] for a in self.axes]

    def cell_measures(self) -> np.ndarray:
        ws = [np.array(w, dtype=object) for w in self.widths()]
        if any(w.size == 0 for w in ws):
            return np.zeros(self.shape, dtype=object)
        return reduce(np.multiply.outer, ws) if len(ws) > 1 else ws[0]

    def cell_box(self, idx: Sequence[int]) -> Box:
        return Box(
            tuple(self.axes[i][j] for i, j in enumerate(idx)),
            tuple(self.axes[i][j + 1] for i, j in enumerate(idx)),
        )

    def mask(self, boxes: Iterable[Box]) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        for b in boxes:
            if not b.is_empty:
                m[self.slices(b)] = True
        return m

    def masked_measure(self, mask: np.ndarray) -> Fraction:
        if not mask.any():
            return Fraction(0)
        return sum(self.cell_measures()[mask].tolist(), Fraction(0))

    def boxes_of(self, mask: np.ndarray) -> list[Box]:
        return [self.cell_box(idx) for idx in np.argwhere(mask)]


def _as_boxes(regions) -> list[Box]:
    out = []
    for r in regions:
        if isinstance(r, Box):
            out.append(r)
        elif isinstance(r, DyadicCube):
            out.append(r.box)
        elif isinstance(r, DyadicComplex):
            out.extend(r.boxes())
        else:
            raise TypeError(f"unsupported region type {type(r).__name__}")
    return out


def _check_regions(boxes: list[Box]) -> None:
    for b in boxes:
        if any(h < l for l, h in zip(b.lo, b.hi)):
            raise ValueError(f"malformed region {b}: upper corner below lower corner")
    if len({b.dim for b in boxes}) > 1:
        raise ValueError("regions of mixed dimension")


def measure(regions) -> Fraction:
    """Exact Lebesgue measure of the union of ``regions``.

    ``regions`` may mix :class:`Box`, :class:`DyadicCube` and
    :class:`DyadicComplex`; overlaps are counted once.
    """
    if isinstance(regions, (Box, DyadicCube, DyadicComplex)):
        regions = [regions]
    boxes = _as_boxes(regions)
    _check_regions(boxes)
    boxes = [b for b in boxes if not b.is_empty]
    if not boxes:
        return Fraction(0)
    g = Grid(boxes)
    return g.masked_measure(g.mask(boxes))


def difference_measure(a, b) -> Fraction:
    """``measure(union(a) minus union(b))``."""
    A = [x for x in _as_boxes(a) if not x.is_empty]
    B = [x for x in _as_boxes(b) if not x.is_empty]
    if not A:
        return Fraction(0)
    g = Grid(A + B)
    return g.masked_measure(g.mask(A) & ~g.mask(B))


def intersection_measure(a, b) -> Fraction:
    A = [x for x in _as_boxes(a) if not x.is_empty]
    B = [x for x in _as_boxes(b) if not x.is_empty]
    if not A or not B:
        return Fraction(0)
    g = Grid(A + B)
    return g.masked_measure(g.mask(A) & g.mask(B))


def difference_boxes(a, b) -> list[Box]:
    """Disjoint boxes covering ``union(a) minus union(b)`` up to a null set."""
    A = [x for x in _as_boxes(a) if not x.is_empty]
    B = [x for x in _as_boxes(b) if not x.is_empty]
    if not A:
        return []
    g = Grid(A + B)
    return g.boxes_of(g.mask(A) & ~g.mask(B))


def intersection_boxes(a, b) -> list[Box]:
    A = [x for x in _as_boxes(a) if not x.is_empty]
    B = [x for x in _as_boxes(b) if not x.is_empty]
    if not A or not B:
        return []
    g = Grid(A + B)
    return g.boxes_of(g.mask(A) & g.mask(B))
