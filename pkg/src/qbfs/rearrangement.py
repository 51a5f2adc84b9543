"""Distribution functions, non-increasing and radial rearrangements."""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .measure import Box
from .rational import decode_rational, encode_rational, modulus
from .stepfunction import StepFunction


@dataclass(frozen=True)
class DistributionFunction:
    """``s -> measure{|f| > s}`` as a right-continuous step function of ``s``.

    ``levels`` are the distinct positive values of ``|f|`` in increasing
    order; ``masses[j]`` is the value of the distribution on
    ``[levels[j-1], levels[j])`` (with ``levels[-1] := 0``).
    """

    levels: tuple[Fraction, ...]
    masses: tuple[Fraction, ...]

    def __call__(self, s) -> Fraction:
        s = Fraction(s)
        if s < 0:
            raise ValueError("distribution function is defined for s >= 0")
        j = bisect_right(self.levels, s)
        return self.masses[j] if j < len(self.masses) else Fraction(0)


@dataclass(frozen=True)
class RearrangementProfile:
    """Non-increasing right-continuous step function on ``(0, inf)``.

    Value ``values[j]`` on ``[breakpoints[j], breakpoints[j+1])`` and zero
    from ``breakpoints[-1]`` on.  Values are strictly decreasing and
    positive, so the representation of a given ``f*`` is unique.
    """

    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        bp = tuple(Fraction(t) for t in self.breakpoints)
        vs = tuple(Fraction(v) for v in self.values)
        if not bp or bp[0] != 0:
            raise ValueError("breakpoints must start at 0")
        if len(bp) != len(vs) + 1:
            raise ValueError("need exactly one more breakpoint than values")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(v <= 0 for v in vs) or any(b >= a for a, b in zip(vs, vs[1:])):
            raise ValueError("values must be positive and strictly decreasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vs)

    @classmethod
    def zero(cls) -> "RearrangementProfile":
        return cls((Fraction(0),), ())

    @classmethod
    def from_level_masses(cls, pairs: Iterable[tuple]) -> "RearrangementProfile":
        """Build ``f*`` from ``(|value|, measure)`` pairs in any order."""
        acc: dict[Fraction, Fraction] = defaultdict(Fraction)
        for v, m in pairs:
            v, m = Fraction(v), Fraction(m)
            if v < 0 or m < 0:
                raise ValueError("levels and masses must be non-negative")
            if v > 0 and m > 0:
                acc[v] += m
        bp, vs, t = [Fraction(0)], [], Fraction(0)
        for v in sorted(acc, reverse=True):
            t += acc[v]
            bp.append(t)
            vs.append(v)
        return cls(tuple(bp), tuple(vs))

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        if t < 0:
            raise ValueError("profile is defined on [0, inf)")
        j = bisect_right(self.breakpoints, t)
        return self.values[j - 1] if j <= len(self.values) else Fraction(0)

    @property
    def support_measure(self) -> Fraction:
        return self.breakpoints[-1]

    @property
    def widths(self) -> list[Fraction]:
        bp = self.breakpoints
        return [b - a for a, b in zip(bp, bp[1:])]

    @property
    def is_zero(self) -> bool:
        return not self.values

    def distribution(self, s) -> Fraction:
        """``measure{f* > s}``."""
        s = Fraction(s)
        count = sum(1 for v in self.values if v > s)
        return self.breakpoints[count]

    def level_masses(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.values, self.widths))

    def to_step_function(self) -> StepFunction:
        bp = self.breakpoints
        return StepFunction(
            [(Box.interval(a, b), v) for a, b, v in zip(bp, bp[1:], self.values)], 1, _trusted=True
        )

    def dilate(self, a, dim: int = 1) -> "RearrangementProfile":
        """Profile of ``D_a`` applied in ``R^dim``: breakpoints scale by ``a^-dim``."""
        a = Fraction(a)
        if a <= 0:
            raise ValueError("dilation parameter must be positive")
        c = a ** (-dim)
        return RearrangementProfile(tuple(t * c for t in self.breakpoints), self.values)

    def sample(self, ts) -> np.ndarray:
        """Float evaluation at many points (kernel-backed)."""
        return _kernels.profile_eval(
            np.array([float(t) for t in self.breakpoints]),
            np.array([float(v) for v in self.values]),
            np.asarray(ts, dtype=float),
        )

    def as_float_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(lo, width, values)`` for the float kernels; widths are exact differences."""
        bp = self.breakpoints
        lo = np.array([float(t) for t in bp[:-1]])
        width = np.array([float(b - a) for a, b in zip(bp, bp[1:])])
        return lo, width, np.array([float(v) for v in self.values])

    def to_dict(self) -> dict:
        return {
            "breakpoints": [encode_rational(t) for t in self.breakpoints],
            "values": [encode_rational(v) for v in self.values],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, obj) -> "RearrangementProfile":
        return cls(tuple(decode_rational(t) for t in obj["breakpoints"]), tuple(decode_rational(v) for v in obj["values"]))


def distribution_function(f: StepFunction) -> DistributionFunction:
    """Exact distribution function of ``|f|``."""
    mass: dict[Fraction, Fraction] = defaultdict(Fraction)
    for b, v in f.pieces:
        mass[modulus(v)] += b.measure
    levels = sorted(lv for lv in mass if lv > 0)
    # masses[j] = measure{|f| > s} for s just below levels[j]
    masses = []
    for j in range(len(levels)):
        masses.append(sum((mass[lv] for lv in levels[j:]), Fraction(0)))
    return DistributionFunction(tuple(levels), tuple(masses))


def nonincreasing_rearrangement(f: StepFunction) -> RearrangementProfile:
    """``f*``: sort the pieces by modulus and stack their measures from 0."""
    return RearrangementProfile.from_level_masses((modulus(v), b.measure) for b, v in f.pieces)


def profile_from_distribution(mu: DistributionFunction) -> RearrangementProfile:
    """Generalised inverse ``t -> inf{s : mu(s) <= t}`` of a distribution function."""
    pairs = []
    for j, lv in enumerate(mu.levels):
        above = mu.masses[j + 1] if j + 1 < len(mu.masses) else Fraction(0)
        pairs.append((lv, mu.masses[j] - above))
    return RearrangementProfile.from_level_masses(pairs)


def unit_ball_volume(n: int):
    """Lebesgue measure of the unit ball of ``R^n``; exact ``2`` for ``n = 1``."""
    if n < 1:
        raise ValueError("dimension must be positive")
    if n == 1:
        return Fraction(2)
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class RadialProfile:
    """The radial rearrangement ``x -> profile(alpha_n |x|^n)``.

    Stored symbolically; the breakpoint radii are irrational for ``n >= 2``
    so the function is never materialised in ``x``.
    """

    profile: RearrangementProfile
    dim: int
    alpha: Fraction | float

    def __call__(self, x) -> Fraction:
        if not isinstance(x, (tuple, list)):
            x = (x,)
        if len(x) != self.dim:
            raise ValueError("point has wrong dimension")
        if self.dim == 1:
            return self.profile(self.alpha * abs(Fraction(x[0])))
        r = math.sqrt(sum(float(c) ** 2 for c in x))
        t = self.alpha * r ** self.dim
        return self.profile(Fraction(t))

    def rearrangement(self) -> RearrangementProfile:
        return self.profile

    def dilate(self, a) -> "RadialProfile":
        return RadialProfile(self.profile.dilate(a, self.dim), self.dim, self.alpha)

    def to_step_function(self) -> StepFunction:
        """Materialise in ``x`` (1-D only, where the breakpoint radii are rational)."""
        if self.dim != 1:
            raise ValueError("only 1-D radial rearrangements have rational breakpoints")
        bp, pieces = self.profile.breakpoints, []
        for a, b, v in zip(bp, bp[1:], self.profile.values):
            lo, hi = a / self.alpha, b / self.alpha
            pieces.append((Box.interval(lo, hi), v))
            pieces.append((Box.interval(-hi, -lo), v))
        return StepFunction(pieces, 1)


def radial_rearrangement(f: StepFunction, n: int | None = None) -> RadialProfile:
    n = f.dim if n is None else n
    return RadialProfile(nonincreasing_rearrangement(f), n, unit_ball_volume(n))


def shuffle_pieces(f: StepFunction, rng: np.random.Generator) -> StepFunction:
    """A measure-preserving rearrangement of a 1-D step function.

    The pieces are laid end to end from 0 in a random order, keeping each
    piece's length and value.
    """
    if f.dim != 1:
        raise ValueError("shuffle_pieces works on 1-D step functions")
    order = rng.permutation(len(f.pieces))
    t, out = Fraction(0), []
    for i in order:
        b, v = f.pieces[i]
        w = b.measure
        out.append((Box.interval(t, t + w), v))
        t += w
    return StepFunction(out, 1)


def sample_points(profiles: Sequence[RearrangementProfile]) -> list[Fraction]:
    """Breakpoints and breakpoint midpoints of all ``profiles``."""
    pts = set()
    for p in profiles:
        bp = p.breakpoints
        pts.update(bp)
        pts.update((a + b) / 2 for a, b in zip(bp, bp[1:]))
    return sorted(pts)
