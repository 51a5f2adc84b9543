"""Dilation ``D_a f(s) = f(as)``, the lacunary splitting of ``f*`` and dilation bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .measure import Box
from .quasinorm import QuasinormSpec
from .rearrangement import (
    RadialProfile,
    RearrangementProfile,
    nonincreasing_rearrangement,
    unit_ball_volume,
)
from .stepfunction import StepFunction, restrict

_TWO = Fraction(2)


def dilate(obj, a, dim: int | None = None):
    """``D_a`` on a step function, a profile (acting in ``R^dim``) or a radial profile."""
    a = Fraction(a)
    if a <= 0:
        raise ValueError("dilation parameter must be positive")
    if isinstance(obj, StepFunction):
        inv = 1 / a
        return StepFunction([(b.scaled(inv), v) for b, v in obj.pieces], obj.dim, _trusted=True)
    if isinstance(obj, RearrangementProfile):
        return obj.dilate(a, dim or 1)
    if isinstance(obj, RadialProfile):
        return obj.dilate(a)
    raise TypeError(f"cannot dilate {type(obj).__name__}")


# -- lacunary sets ----------------------------------------------------------------


def block(m: int) -> Box:
    """The dyadic block ``(2^-(m+1), 2^-m)``."""
    return Box.interval(_TWO ** (-m - 1), _TWO ** (-m))


def block_parity(m: int) -> int:
    """Which lacunary set contains block ``m``: odd blocks lie in the first, even in the second."""
    return 1 if m % 2 else 2


def lacunary_measure_below(parity: int, j: int) -> Fraction:
    """Exact measure of ``G_parity`` intersected with ``(0, 2^-j)`` (geometric series)."""
    _check_parity(parity)
    first = Fraction(2, 3) if j % 2 else Fraction(1, 3)
    share = first if parity == 1 else 1 - first
    return share * _TWO ** (-j)


def _check_parity(parity: int) -> None:
    if parity not in (1, 2):
        raise ValueError("parity must be 1 or 2")


@dataclass(frozen=True)
class DyadicLacunarySet:
    """Components ``k_min..k_max`` of ``G_1 = U (2^-(2k+2), 2^-(2k+1))`` or ``G_2 = U (2^-(2k+1), 2^-2k)``."""

    parity: int
    k_min: int
    k_max: int

    def __post_init__(self):
        _check_parity(self.parity)
        if self.k_max < self.k_min:
            raise ValueError("empty k range")

    def intervals(self) -> list[Box]:
        off = 1 if self.parity == 1 else 0
        return [Box.interval(_TWO ** (-2 * k - 1 - off), _TWO ** (-2 * k - off)) for k in range(self.k_min, self.k_max + 1)]

    @property
    def measure(self) -> Fraction:
        return sum((b.measure for b in self.intervals()), Fraction(0))

    @property
    def tail_measure(self) -> Fraction:
        """Measure of the components with ``k > k_max``."""
        off = 1 if self.parity == 1 else 0
        return lacunary_measure_below(self.parity, 2 * self.k_max + 2 + off)

    def measure_below(self, x) -> Fraction:
        """``measure(G cap (0, x))`` over the materialised components plus the exact tail."""
        x = Fraction(x)
        total = self.tail_measure
        for b in self.intervals():
            lo, hi = b.lo[0], b.hi[0]
            if x > lo:
                total += min(x, hi) - lo
        return total


# -- restriction of a profile -------------------------------------------------------


@dataclass(frozen=True)
class LacunaryRestriction:
    """``g chi_{G_parity}`` materialised on ``(cutoff, inf)``.

    Below ``cutoff`` the profile is the constant ``tail_value`` and the
    restriction has infinitely many components of total measure
    ``tail_measure``; that part enters the rearrangement exactly but is not
    materialised as intervals.  ``discarded_measure`` is the length of the
    unmaterialised range ``(0, cutoff)``.
    """

    parity: int
    function: StepFunction
    cutoff: Fraction
    tail_value: Fraction
    tail_measure: Fraction

    @property
    def discarded_measure(self) -> Fraction:
        return self.cutoff

    def rearrangement(self) -> RearrangementProfile:
        pairs = [(v, b.measure) for b, v in self.function.pieces]
        pairs.append((self.tail_value, self.tail_measure))
        return RearrangementProfile.from_level_masses(pairs)

    def materialized_rearrangement(self) -> RearrangementProfile:
        return nonincreasing_rearrangement(self.function)


def _ceil_log2(x: Fraction) -> int:
    """Smallest integer ``e`` with ``2^e >= x``, for ``x > 0``."""
    e = x.numerator.bit_length() - x.denominator.bit_length()
    while _TWO ** e < x:
        e += 1
    while _TWO ** (e - 1) >= x:
        e -= 1
    return e


def lacunary_cutoff(g: RearrangementProfile, extra_levels: int = 2) -> int:
    """Block index ``M`` such that ``2^-M`` lies below the first breakpoint of ``g``."""
    t1 = g.breakpoints[1]
    return -_ceil_log2(t1) + 1 + extra_levels


def lacunary_restrict(g: RearrangementProfile, parity: int, cutoff_exp: int | None = None) -> LacunaryRestriction:
    """``R_parity g = g chi_{G_parity}`` for a profile ``g``.

    Blocks ``m`` from the one containing the end of the support down to
    ``cutoff_exp - 1`` are materialised; ``cutoff_exp`` defaults to
    :func:`lacunary_cutoff` and may only be raised.
    """
    _check_parity(parity)
    if g.is_zero:
        return LacunaryRestriction(parity, StepFunction.zero(1), Fraction(0), Fraction(0), Fraction(0))
    M = lacunary_cutoff(g)
    if cutoff_exp is not None:
        if cutoff_exp < M:
            raise ValueError(f"cutoff exponent must be at least {M} so the tail is constant")
        M = cutoff_exp
    top = -_ceil_log2(g.support_measure)
    blocks = [block(m) for m in range(top, M) if block_parity(m) == parity]
    fn = restrict(g.to_step_function(), blocks)
    return LacunaryRestriction(parity, fn, _TWO ** (-M), g.values[0], lacunary_measure_below(parity, M))


def shift_position(x, parity: int = 1) -> Fraction:
    """Where the rearrangement of ``R_parity g`` moves the point ``x``: ``measure(G cap (0, x))``."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("x must be positive")
    m = -_ceil_log2(x)  # x in (2^-(m+1), 2^-m]
    if x == _TWO ** (-m):
        m_low = m
        below = lacunary_measure_below(parity, m_low)
        return below
    lo = _TWO ** (-m - 1)
    below = lacunary_measure_below(parity, m + 1)
    return below + (x - lo if block_parity(m) == parity else 0)


def shift_formula(x, k: int) -> Fraction:
    """Closed form ``x - (2/3) 2^-(2k+2)`` for ``x`` in the ``k``-th component of ``G_1``."""
    return Fraction(x) - Fraction(2, 3) * _TWO ** (-2 * k - 2)


# -- splitting operators -------------------------------------------------------------


@dataclass(frozen=True)
class SplitProfile:
    """``S_parity f(x) = [R_parity f*](alpha_n |x|^n)`` carried symbolically."""

    restriction: LacunaryRestriction
    dim: int
    alpha: Fraction | float

    def halfline_function(self) -> StepFunction:
        return self.restriction.function

    def rearrangement(self) -> RearrangementProfile:
        return self.restriction.rearrangement()

    def materialize_1d(self) -> StepFunction:
        """``S f`` on ``R`` for ``n = 1`` away from the unmaterialised core ``|x| < cutoff/2``."""
        if self.dim != 1:
            raise ValueError("only 1-D splittings can be materialised")
        pieces = []
        for b, v in self.restriction.function.pieces:
            lo, hi = b.lo[0] / self.alpha, b.hi[0] / self.alpha
            pieces.append((Box.interval(lo, hi), v))
            pieces.append((Box.interval(-hi, -lo), v))
        return StepFunction(pieces, 1)

    def annulus_masses(self) -> list[tuple[Fraction, float]]:
        """``(value, measure)`` of the annuli of ``S f`` in ``R^n``, computed from radii."""
        out = []
        for b, v in self.restriction.function.pieces:
            r0 = (float(b.lo[0]) / float(self.alpha)) ** (1.0 / self.dim)
            r1 = (float(b.hi[0]) / float(self.alpha)) ** (1.0 / self.dim)
            out.append((v, float(self.alpha) * (r1**self.dim - r0**self.dim)))
        return out


def splitting_operator(f: StepFunction, n: int | None = None, parity: int = 1, cutoff_exp: int | None = None) -> SplitProfile:
    n = f.dim if n is None else n
    prof = nonincreasing_rearrangement(f)
    return SplitProfile(lacunary_restrict(prof, parity, cutoff_exp), n, unit_ball_volume(n))


# -- pointwise inequality for the split profiles ------------------------------------


@dataclass
class SplitInequalityReport:
    holds: bool
    points: int
    worst_margin: Fraction | None
    counterexample: tuple | None


def split_rearrangement_check(g: RearrangementProfile, samples: Iterable = (), parities: Sequence[int] = (1, 2)) -> SplitInequalityReport:
    """Check ``(R_i g)*(t) <= g(3t/2)`` exactly at ``samples`` and breakpoint midpoints.

    Both sides are right-continuous, so the almost-everywhere statement
    holds at every point and breakpoints need no special treatment.
    """
    worst, witness, count = None, None, 0
    for parity in parities:
        r = lacunary_restrict(g, parity)
        rs = r.rearrangement()
        pts = set(Fraction(t) for t in samples)
        for prof in (g, rs):
            bp = prof.breakpoints
            pts.update((a + b) / 2 for a, b in zip(bp, bp[1:]))
            pts.add(bp[-1] + 1)
        for t in sorted(pts):
            if t < 0:
                continue
            lhs, rhs = rs(t), g(Fraction(3, 2) * t)
            margin = rhs - lhs
            count += 1
            if worst is None or margin < worst:
                worst = margin
                if margin < 0:
                    witness = (parity, t, lhs, rhs)
    return SplitInequalityReport(witness is None, count, worst, witness)


# -- bounds --------------------------------------------------------------------------


def contraction_base(n: int) -> float:
    """``b = (2/3)^(1/n)``."""
    return (2.0 / 3.0) ** (1.0 / n)


def dilation_norm_bound(n: int, C: float, a) -> float:
    """Upper bound for ``||D_a||`` on an r.i. quasi-Banach function space in ``R^n``."""
    a = float(a)
    if a <= 0:
        raise ValueError("dilation parameter must be positive")
    if C < 1:
        raise ValueError("modulus of concavity must be >= 1")
    if a >= 1:
        return 1.0
    return 2 * C * a ** (math.log(2 * C) / math.log(contraction_base(n)))


@dataclass
class DilationRatio:
    a: Fraction
    ratio: float
    bound: float
    witness: int | None
    ratios: list[float]

    @property
    def holds(self) -> bool:
        return self.ratio <= self.bound * (1 + 1e-12)


def empirical_dilation_ratio(X: QuasinormSpec, a, samples: Sequence[StepFunction], n: int | None = None) -> DilationRatio:
    """``max ||D_a f|| / ||f||`` over ``samples``; a lower bound for the operator norm."""
    if not X.rearrangement_invariant:
        raise ValueError("dilation bounds need a rearrangement-invariant quasinorm")
    a = Fraction(a)
    n = n if n is not None else (samples[0].dim if samples else 1)
    ratios = []
    for f in samples:
        nf = X(f)
        ratios.append(X(dilate(f, a)) / nf if nf > 0 else 0.0)
    k = max(range(len(ratios)), key=lambda i: (ratios[i], -i)) if ratios else None
    return DilationRatio(a, ratios[k] if ratios else 0.0, dilation_norm_bound(n, X.C, a), k, ratios)


@dataclass
class SweepRow:
    a: Fraction
    ratio: float
    bound: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    monotone: bool
    monotone_violation: tuple | None

    @property
    def within_bound(self) -> bool:
        return all(r.ratio <= r.bound * (1 + 1e-12) for r in self.rows)


def dilation_sweep(X: QuasinormSpec, a_grid: Sequence, samples: Sequence[StepFunction], n: int | None = None, rtol: float = 1e-9) -> SweepResult:
    """Empirical ratios over an ``a``-grid plus the monotonicity ``a < b => ||D_b f|| <= ||D_a f||``."""
    grid = sorted(Fraction(a) for a in a_grid)
    per_a = [empirical_dilation_ratio(X, a, samples, n) for a in grid]
    violation = None
    for lo, hi in zip(per_a, per_a[1:]):
        for i, (ra, rb) in enumerate(zip(lo.ratios, hi.ratios)):
            if rb > ra * (1 + rtol) + 1e-300:
                violation = (i, lo.a, hi.a, ra, rb)
                break
        if violation:
            break
    rows = [SweepRow(d.a, d.ratio, d.bound) for d in per_a]
    return SweepResult(rows, violation is None, violation)


# names used by external callers
lemma_L1D_check = split_rearrangement_check
tbd_bound = dilation_norm_bound
