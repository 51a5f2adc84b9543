"""Dyadic covers of compact box unions, absolute-continuity probes, simple-function
approximation with a certified error bound, and splitting of non-AC functions.

Compact sets are unions of closed boxes; open sets are the interiors of the
closures of unions of open boxes (so shared faces belong to the set).  All
geometry is exact over the rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

from .measure import Box, DyadicComplex, DyadicCube, difference_boxes, difference_measure, intersection_boxes, intersection_measure, measure
from .quasinorm import QuasinormSpec, sup_ball, tail_parts
from .rational import QComplex, dyadic_round, modulus
from .stepfunction import StepFunction, absolute, level_restrict, pointwise_combine, restrict, restrict_complement

_TWO = Fraction(2)


# -- dyadic cover ----------------------------------------------------------------


@dataclass
class CoverResult:
    """Cover of order ``k`` stored as index blocks.

    The order-``k`` cubes meeting one closed box form a box of integer
    indices, so ``blocks`` holds one inclusive ``(first, last)`` index pair
    per box of ``K``.  Blocks of different boxes may overlap.
    """

    k: int
    blocks: list[tuple[tuple[int, ...], tuple[int, ...]]]
    delta: Fraction  # sup-norm distance from K to the complement of H
    margin: Fraction  # inflation used for H-tilde
    excess: Fraction  # measure(Omega minus K), strictly below eps
    properties: dict[str, bool]
    cube_count: int = 0

    @property
    def ok(self) -> bool:
        return all(self.properties.values())

    def boxes(self) -> list[Box]:
        return [_block_box(b, self.k) for b in self.blocks]

    @property
    def complex(self) -> DyadicComplex:
        """The cubes themselves; materialises ``cube_count`` objects."""
        cubes = set()
        for first, last in self.blocks:
            cubes.update(product(*(range(a, b + 1) for a, b in zip(first, last))))
        return DyadicComplex(self.k, frozenset(DyadicCube(self.k, a) for a in cubes))


def _block_box(block, k: int) -> Box:
    first, last = block
    s = _TWO ** (-k)
    return Box(tuple(a * s for a in first), tuple((b + 1) * s for b in last))


def _meeting_block(b: Box, k: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    # a s <= hi and (a + 1) s > lo  <=>  floor(lo / s) <= a <= floor(hi / s)
    s = _TWO ** (-k)
    return tuple(math.floor(lo / s) for lo in b.lo), tuple(math.floor(hi / s) for hi in b.hi)


def _block_meets(block, b: Box, k: int) -> bool:
    """Every cube of ``block`` meets the closed box ``b``.

    The per-axis condition is an interval of indices, so checking the first
    and last index on each axis is exact.
    """
    s = _TWO ** (-k)
    return all(
        a * s <= hi and (a + 1) * s > lo
        for first, last, lo, hi in zip(*block, b.lo, b.hi)
        for a in (first, last)
    )


def merge_runs(cubes, values=None) -> list[tuple[Box, object]]:
    """Merge same-order cubes that are adjacent along the last axis and share a value."""
    cubes = list(cubes)
    if values is None:
        values = [1] * len(cubes)
    order = sorted(range(len(cubes)), key=lambda i: cubes[i].a[:-1] + (cubes[i].a[-1],))
    out = []
    run = None  # (prefix, start, stop, value, k)
    for i in order:
        q, v = cubes[i], values[i]
        key = q.a[:-1]
        if run and run[0] == key and run[2] == q.a[-1] and run[3] == v:
            run[2] += 1
            continue
        if run:
            out.append(_run_box(run))
        run = [key, q.a[-1], q.a[-1] + 1, v, q.k]
    if run:
        out.append(_run_box(run))
    return out


def _run_box(run) -> tuple[Box, object]:
    key, start, stop, v, k = run
    s = _TWO ** (-k)
    lo = tuple(a * s for a in key) + (start * s,)
    hi = tuple((a + 1) * s for a in key) + (stop * s,)
    return Box(lo, hi), v


def _clearance(K: Sequence[Box], H: Sequence[Box]) -> Fraction:
    """``sup{r : measure(K_r minus H) = 0}`` with ``K_r`` the sup-norm ``r``-neighbourhood.

    The supremum is attained at a difference of a ``K`` edge and an ``H`` edge,
    so a bisection over those candidates is exact.
    """
    cands = set()
    for kb in K:
        for hb in H:
            for i in range(kb.dim):
                for x in (kb.lo[i], kb.hi[i]):
                    for y in (hb.lo[i], hb.hi[i]):
                        d = abs(x - y)
                        if d > 0:
                            cands.add(d)
    cands = sorted(cands)

    def inside(r):
        return difference_measure([b.expanded(r) for b in K], H) == 0

    lo, hi = -1, len(cands)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if inside(cands[mid]):
            lo = mid
        else:
            hi = mid
    return cands[lo] if lo >= 0 else Fraction(0)


def dyadic_cover(K: Sequence[Box], G: Sequence[Box], eps, k0: int = 0) -> CoverResult:
    """A dyadic complex ``Omega`` of order ``k >= k0`` with

    ``Omega`` inside ``G``, ``K`` covered up to a null set, ``measure(Omega - K) < eps``
    and every cube meeting ``K``.
    """
    K = [b for b in K if not b.is_empty]
    G = [b for b in G if not b.is_empty]
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not K:
        return CoverResult(k0, [], Fraction(0), Fraction(0), Fraction(0), {"inside": True, "covers": True, "excess": True, "meets": True})
    if difference_measure(K, G) > 0:
        raise ValueError("K is not contained in G")
    n = K[0].dim
    mK = measure(K)
    margin = Fraction(1)
    while measure([b.expanded(margin) for b in K]) - mK >= eps:
        margin /= 2
    H = intersection_boxes(G, [b.expanded(margin) for b in K])
    delta = _clearance(K, H)
    if delta == 0:
        raise ValueError("K touches the boundary of G")
    k = k0
    while n * _TWO ** (-2 * k) >= delta * delta:
        k += 1
    blocks = [_meeting_block(b, k) for b in K]
    boxes = [_block_box(b, k) for b in blocks]
    total = measure(boxes)
    excess = total - mK
    props = {
        "inside": difference_measure(boxes, G) == 0,
        "covers": difference_measure(K, boxes) == 0,
        "excess": excess < eps,
        "meets": all(_block_meets(bl, b, k) for bl, b in zip(blocks, K)),
    }
    res = CoverResult(k, blocks, delta, margin, excess, props, int(total * 2 ** (k * n)))
    if not res.ok:  # pragma: no cover - construction guarantees these
        raise AssertionError(f"cover properties violated: {props}")
    return res


# -- absolute continuity -----------------------------------------------------------


def shrinking_sets(f: StepFunction, depth: int) -> list[list[Box]]:
    """``E_k``: the corner of ``f``'s first piece scaled by ``2^-k`` towards its lower corner."""
    if f.is_zero:
        b = Box((Fraction(0),) * f.dim, (Fraction(1),) * f.dim)
    else:
        b = f.boxes[0]
    return [[Box(b.lo, tuple(l + (h - l) * _TWO ** (-k) for l, h in zip(b.lo, b.hi)))] for k in range(depth + 1)]


def escaping_sets(f: StepFunction, depth: int) -> list[list[Box]]:
    """``E_k``: the complement of the sup-norm ball of radius ``2^k``, as boxes meeting ``supp f``."""
    out = []
    for k in range(depth + 1):
        out.append(restrict_complement(f, [sup_ball(_TWO**k, f.dim)]).boxes)
    return out


@dataclass
class ACWitness:
    f: StepFunction
    sequence: str
    norms: list[float]
    monotone: bool
    verdict: str  # "AC", "non-AC" or "inconclusive"
    eps: float | None = None


def ac_test(f: StepFunction, X: QuasinormSpec, sequence: str = "shrink", depth: int = 20, sets: Sequence[Sequence[Box]] | None = None) -> ACWitness:
    """Evaluate ``||f chi_{E_k}||`` along a vanishing sequence and classify the decay.

    ``non-AC`` when the norms stall over the second half of the sequence
    (``eps`` is then half the final norm), ``AC`` when they reach zero or at
    least halve over that stretch, otherwise ``inconclusive``.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if sets is None:
        if sequence == "shrink":
            sets = shrinking_sets(f, depth)
        elif sequence == "escape":
            sets = escaping_sets(f, depth)
        else:
            raise ValueError(f"unknown sequence {sequence!r}")
    norms = [X(restrict(f, E)) for E in sets]
    monotone = all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))
    last, mid = norms[-1], norms[len(norms) // 2]
    if last == 0 or last <= mid / 2:
        verdict, eps = "AC", None
    elif last >= mid * (1 - 1e-12):
        verdict, eps = "non-AC", last / 2
    else:
        verdict, eps = "inconclusive", None
    return ACWitness(f, sequence, norms, monotone, verdict, eps)


# -- simple-function approximation -------------------------------------------------


@dataclass
class ApproximationTrace:
    """Quantities from the construction; each ``*_term`` has the stated budget."""

    eps: float
    C: float
    N: Fraction
    L: float
    delta: Fraction
    Delta: Fraction
    k: int
    K_term: float  # ||(f - s) chi_K||, budget 2 eps
    E0_term: float  # ||f chi_{|f| > N}||, budget eps
    E1_term: float  # ||f chi_{|x| > N}||, budget eps
    EK_term: float  # ||f chi_{E minus K}||, budget eps
    s_term: float  # ||s chi_{R^n minus K}||, budget eps
    measured: float
    cubes: int

    @property
    def weighted_sum(self) -> float:
        C = self.C
        return C * self.K_term + C**5 * self.E0_term + C**4 * self.E1_term + C**3 * self.EK_term + C**2 * self.s_term

    def budgets_ok(self) -> bool:
        e = self.eps
        return self.K_term <= 2 * e and max(self.E0_term, self.E1_term, self.EK_term, self.s_term) < e

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "C": self.C,
            "N": str(self.N),
            "L": self.L,
            "delta": str(self.delta),
            "Delta": str(self.Delta),
            "k": self.k,
            "terms": {
                "K": self.K_term,
                "level_tail": self.E0_term,
                "space_tail": self.E1_term,
                "E_minus_K": self.EK_term,
                "s_off_K": self.s_term,
            },
            "weighted_sum": self.weighted_sum,
            "measured": self.measured,
            "cubes": self.cubes,
        }


def in_simple_family(f: StepFunction) -> bool:
    """Is ``f`` a finite sum of rational multiples of dyadic cubes?

    Values are rational by construction, so this reduces to every box edge
    having a power-of-two denominator.
    """
    for b in f.boxes:
        for x in b.lo + b.hi:
            d = x.denominator
            if d & (d - 1):
                return False
    return True


def certified_constant(C: float) -> float:
    return 2 * C + C**2 + C**3 + C**4 + C**5


def _round_value(v, step: Fraction):
    den = step.denominator if step.numerator == 1 else None
    if den is None:
        raise ValueError("rounding step must be a unit fraction")
    if isinstance(v, QComplex):
        return QComplex.make(dyadic_round(v.re, den), dyadic_round(v.im, den))
    return dyadic_round(Fraction(v), den)


def approximate_simple(f: StepFunction, X: QuasinormSpec, eps) -> tuple[StepFunction, float, ApproximationTrace | None]:
    """A rational dyadic simple function ``s`` with ``||f - s|| <= (2C + C^2 + ... + C^5) eps``.

    Returns ``(s, certified_bound, trace)``; ``trace`` is ``None`` when the
    good set has zero quasinorm and ``s = 0``.
    """
    eps_f = float(eps)
    if eps_f <= 0:
        raise ValueError("eps must be positive")
    if not X.absolutely_continuous:
        raise ValueError(f"{X.selector}: indicators of compact sets do not have absolutely continuous quasinorm")
    probe = ac_test(f, X, "shrink", depth=12)
    if probe.verdict == "non-AC":
        raise ValueError(f"{X.selector}: f does not have absolutely continuous quasinorm")
    C = X.C
    bound = certified_constant(C) * eps_f
    n = f.dim
    N = X.tail_modulus(f, eps_f)
    fE0, fE1 = tail_parts(f, N)
    fE = level_restrict(restrict(f, [sup_ball(N, n)]), N, above=False)
    E = fE.boxes
    L = X.indicator_norm(measure(E)) if E else 0.0
    if L == 0:
        return StepFunction.zero(n), bound, None

    step = Fraction(1)
    while step >= Fraction(eps_f) / Fraction(L):
        step /= 2
    h = step  # G = E inflated by one dyadic step, K-tilde its closure
    G = [b.expanded(h) for b in E]
    budget = Fraction(eps_f) / (N + Fraction(eps_f) / Fraction(L))
    delta = X.ac_modulus(f, eps_f, extra=float(budget))

    eta = Fraction(1)
    while True:
        Kb = [b.expanded(-eta) for b in E]
        Kb = [b for b in Kb if not b.is_empty]
        if measure(E) - sum((b.measure for b in Kb), Fraction(0)) < delta:
            break
        eta /= 2
    Delta = 2 * eta
    k0 = 0
    while n * _TWO ** (-2 * k0) >= Delta * Delta:
        k0 += 1
    cover = dyadic_cover(Kb, G, delta, k0)
    values = [v for _, v in fE.pieces]
    src = [next(i for i, b in enumerate(E) if b.contains_box(kb)) for kb in Kb]
    rounded = [_round_value(v, step) for v in values]
    # shrunk pieces are 2 eta apart and cubes are thinner than that, so the blocks are disjoint
    s = StepFunction([(bx, rounded[src[j]]) for j, bx in enumerate(cover.boxes())], n)

    diff = f - s
    trace = ApproximationTrace(
        eps=eps_f,
        C=C,
        N=N,
        L=L,
        delta=delta,
        Delta=Delta,
        k=cover.k,
        K_term=X(restrict(diff, Kb)),
        E0_term=X(fE0),
        E1_term=X(fE1),
        EK_term=X(restrict(f, difference_boxes(E, Kb))),
        s_term=X(restrict_complement(s, Kb)),
        measured=X(diff),
        cubes=cover.cube_count,
    )
    return s, bound, trace


# -- splitting of a non-AC function -----------------------------------------------


@dataclass
class SplitResult:
    pieces: list[StepFunction]
    indices: list[int]
    norms: list[float]
    disjoint: bool
    dominated: bool
    above_eps: bool

    @property
    def ok(self) -> bool:
        return self.disjoint and self.dominated and self.above_eps


def non_ac_split(
    f: StepFunction,
    X: QuasinormSpec,
    sets: Callable[[int], Sequence[Box]],
    eps: float,
    m: int,
    horizon: int = 64,
) -> SplitResult:
    """``f_i = f (chi_{E_{k_i}} - chi_{E_{k_{i+1}}})`` with ``||f_i|| > eps`` for a nested ``E_k``.

    ``k_{i+1}`` is the first index after ``k_i`` at which the annulus norm
    exceeds ``eps``; the search gives up after ``horizon`` indices.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    k = next((j for j in range(horizon) if X(restrict(f, sets(j))) > eps), None)
    if k is None:
        raise ValueError(f"no E_k with ||f chi_E_k|| > {eps} within horizon {horizon}")
    indices, pieces, norms = [k], [], []
    for i in range(m):
        outer = list(sets(indices[-1]))
        found = None
        for j in range(indices[-1] + 1, indices[-1] + 1 + horizon):
            fi = restrict(f, difference_boxes(outer, list(sets(j))))
            nf = X(fi)
            if nf > eps:
                found = (j, fi, nf)
                break
        if found is None:
            raise ValueError(f"piece {i}: annulus norms stay at or below {eps} within horizon {horizon}")
        indices.append(found[0])
        pieces.append(found[1])
        norms.append(found[2])
    disjoint = all(
        intersection_measure(a.boxes, b.boxes) == 0 for i, a in enumerate(pieces) for b in pieces[i + 1 :]
    )
    fa = absolute(f)
    dominated = all(
        all(v >= 0 for v in pointwise_combine(fa, absolute(p), "subtract").values) and _inside_support(p, f)
        for p in pieces
    )
    return SplitResult(pieces, indices, norms, disjoint, dominated, all(x > eps for x in norms))


def _inside_support(p: StepFunction, f: StepFunction) -> bool:
    return difference_measure(p.boxes, f.boxes) == 0 if p.boxes else True
