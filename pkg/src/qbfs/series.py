"""Weighted series in quasinormed spaces: the chained quasi-triangle inequality,
Riesz-Fischer certificates, Fatou-type checks and resonance constructions.

Infinite series are a finite exact prefix plus an analytic tail bound
supplied by the generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .measure import Box
from .quasinorm import QuasinormSpec, sup_ball
from .stepfunction import StepFunction, absolute, integrate_abs, pointwise_combine, restrict, scale, truncate


def _nonneg(f: StepFunction) -> bool:
    return all(v >= 0 for v in f.values)


def _dominates(big: StepFunction, small: StepFunction) -> bool:
    """``big >= small`` a.e. for real step functions."""
    return _nonneg(pointwise_combine(big, small, "subtract"))


# -- chained quasi-triangle inequality -----------------------------------------


@dataclass
class ChainedTriangleReport:
    holds: bool
    lhs: list[float]
    rhs: list[float]
    counterexample: int | None

    @property
    def min_slack(self) -> float:
        return min(r - l for l, r in zip(self.lhs, self.rhs))


def chained_triangle_check(xs: Sequence[StepFunction], X: QuasinormSpec, rtol: float = 1e-12) -> ChainedTriangleReport:
    """``||x_0 + ... + x_N|| <= sum_n C^(n+1) ||x_n||`` for every prefix ``N``."""
    if not xs:
        raise ValueError("need at least one term")
    C = X.C
    s = StepFunction.zero(xs[0].dim)
    acc, lhs, rhs, bad = 0.0, [], [], None
    for n, x in enumerate(xs):
        s = s + x
        acc += C ** (n + 1) * X(x)
        lhs.append(X(s))
        rhs.append(acc)
        if bad is None and lhs[-1] > acc * (1 + rtol):
            bad = n
    return ChainedTriangleReport(bad is None, lhs, rhs, bad)


# -- generators ------------------------------------------------------------------


class SeriesGenerator:
    """Terms ``f_n`` with an analytic bound on ``sum_{n > M} C^(n+1) ||f_n||``."""

    name = "generator"

    def term(self, n: int) -> StepFunction:
        raise NotImplementedError

    def tail(self, M: int, X: QuasinormSpec) -> float:
        raise NotImplementedError

    def limit(self, prefix: int) -> StepFunction | None:
        """The pointwise sum, when it is a step function."""
        return None

    def remainder_norm(self, M: int, X: QuasinormSpec, prefix: int) -> float | None:
        """``||f - s_M||`` from the closed-form limit, if available."""
        f = self.limit(prefix)
        if f is None:
            return None
        s = StepFunction.zero(f.dim)
        for n in range(M + 1):
            s = s + self.term(n)
        return X(f - s)


@dataclass
class GeometricGenerator(SeriesGenerator):
    """``f_n = r^(n+1) base``; the sum is ``r/(1-r) base``."""

    ratio: Fraction
    base: StepFunction = field(default_factory=lambda: StepFunction.indicator(Box.interval(0, 1)))

    def __post_init__(self):
        self.ratio = Fraction(self.ratio)
        if not 0 <= self.ratio < 1:
            raise ValueError("ratio must lie in [0, 1)")

    @property
    def name(self):
        return f"geometric:ratio={self.ratio}"

    def term(self, n):
        return scale(self.base, self.ratio ** (n + 1))

    def tail(self, M, X):
        q = X.C * float(self.ratio)
        if q >= 1:
            raise ValueError(f"C * ratio = {q} >= 1: weighted tail diverges")
        return X(self.base) * q ** (M + 2) / (1 - q)

    def limit(self, prefix):
        return scale(self.base, self.ratio / (1 - self.ratio))


@dataclass
class DisjointGenerator(SeriesGenerator):
    """``f_n = 2^-n chi_(n, n+1)``; under ``L^1`` the remainder after ``M`` is ``2^-M``."""

    name = "disjoint"
    depth: int = 64

    def term(self, n):
        return StepFunction.indicator(Box.interval(n, n + 1), Fraction(1, 2**n))

    def tail(self, M, X):
        q = X.C / 2
        if q >= 1:
            raise ValueError(f"C / 2 = {q} >= 1: weighted tail diverges")
        return X.indicator_norm(1) * X.C * q ** (M + 1) / (1 - q)

    def remainder_norm(self, M, X, prefix):
        if not (X.name == "lp" and X.param("p") == 1):
            return None
        # L^1 is additive on disjoint supports: materialise D terms, add the rest in closed form
        rest = StepFunction.zero(1)
        for n in range(M + 1, M + 1 + self.depth):
            rest = rest + self.term(n)
        return X.exact_value(rest) + Fraction(1, 2 ** (M + self.depth))


@dataclass
class ZeroTailGenerator(SeriesGenerator):
    """``f_0`` followed by zeros."""

    first: StepFunction
    name = "single"

    def term(self, n):
        return self.first if n == 0 else StepFunction.zero(self.first.dim)

    def tail(self, M, X):
        return 0.0

    def limit(self, prefix):
        return self.first


def parse_generator(selector: str) -> SeriesGenerator:
    """``geometric:ratio=0.25`` or ``disjoint``."""
    name, _, rest = selector.partition(":")
    kw = dict(item.split("=", 1) for item in rest.split(",") if item)
    if name == "geometric":
        return GeometricGenerator(Fraction(kw.get("ratio", "1/4")))
    if name == "disjoint":
        return DisjointGenerator()
    raise ValueError(f"unknown generator {selector!r}")


# -- Riesz-Fischer certificate ------------------------------------------------------


@dataclass
class SeriesCertificate:
    generator: str
    C: float
    prefix: int
    term_norms: list[float]
    weighted_prefix: float
    tails: list[float]
    remainders: list[float | None]
    partial_sum_norms: list[float]
    majorant_norms: list[float]
    cauchy_ok: bool
    holds: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.holds.values())

    def to_dict(self) -> dict:
        return {
            "generator": self.generator,
            "C": self.C,
            "prefix": self.prefix,
            "term_norms": self.term_norms,
            "weighted_prefix": self.weighted_prefix,
            "tails": self.tails,
            "remainders": [None if r is None else float(r) for r in self.remainders],
            "partial_sum_norms": self.partial_sum_norms,
            "majorant_norms": self.majorant_norms,
            "checks": self.holds,
        }


def riesz_fischer_sum(gen: SeriesGenerator, X: QuasinormSpec, prefix: int = 20, rtol: float = 1e-9) -> SeriesCertificate:
    """Partial sums, majorants ``t_N = sum |f_n|`` and remainder bounds up to ``prefix``."""
    C = X.C
    terms = [gen.term(n) for n in range(prefix + 1)]
    norms = [X(t) for t in terms]
    tails = [gen.tail(M, X) for M in range(prefix + 1)]
    weighted = sum(C ** (n + 1) * v for n, v in enumerate(norms))
    partial, majorant = [], []
    s = StepFunction.zero(terms[0].dim)
    t = StepFunction.zero(terms[0].dim)
    sums, majorants = [], []
    for f in terms:
        s = s + f
        t_new = t + absolute(f)
        majorants.append(_dominates(t_new, t))
        t = t_new
        sums.append(s)
        partial.append(X(s))
        majorant.append(X(t))
    remainders = [gen.remainder_norm(M, X, prefix) for M in range(prefix + 1)]

    # Cauchy trace: ||s_M - s_N|| <= sum_{n=N+1}^M C^(n-N) ||f_n||, implied by the chained inequality
    cauchy = True
    for N in range(prefix + 1):
        for M in range(N + 1, prefix + 1):
            bound = sum(C ** (n - N) * norms[n] for n in range(N + 1, M + 1))
            if X(sums[M] - sums[N]) > bound * (1 + rtol) + 1e-300:
                cauchy = False
    rem = [float(r) for r in remainders if r is not None]
    holds = {
        "weighted_sum_finite": tails[-1] < float("inf"),
        "majorant_increasing": all(majorants),
        "majorant_norm_nondecreasing": all(b >= a * (1 - rtol) for a, b in zip(majorant, majorant[1:])),
        "remainder_within_tail": all(
            r is None or float(r) <= tl * (1 + rtol) + 1e-300 for r, tl in zip(remainders, tails)
        ),
        "remainder_nonincreasing": all(b <= a * (1 + rtol) for a, b in zip(rem, rem[1:])),
        "cauchy": cauchy,
    }
    return SeriesCertificate(gen.name, C, prefix, norms, weighted, tails, remainders, partial, majorant, cauchy, holds)


@dataclass
class CauchySubsequence:
    indices: list[int]
    y_norms: list[float]
    telescopes: bool
    weighted: float
    weighted_bound: float

    @property
    def ok(self) -> bool:
        return self.telescopes and self.weighted <= self.weighted_bound * (1 + 1e-9)


def cauchy_subsequence(xs: Sequence[StepFunction], X: QuasinormSpec, C_prime: float | None = None) -> CauchySubsequence:
    """Indices ``k_n`` with ``||x_i - x_j|| <= (2C')^(-n-2)`` for ``i, j >= k_n`` within ``xs``,
    the differences ``y_n`` and their telescoping sums."""
    Cp = X.C if C_prime is None else C_prime
    L = len(xs)
    D = [[0.0] * L for _ in range(L)]
    for i in range(L):
        for j in range(i + 1, L):
            D[i][j] = D[j][i] = X(xs[i] - xs[j])
    # spread[k] = max_{i, j >= k} ||x_i - x_j||
    spread = [0.0] * L
    for k in range(L - 2, -1, -1):
        spread[k] = max(spread[k + 1], max(D[k][k + 1 :]))
    indices, k = [], 0
    n = 0
    while True:
        target = (2 * Cp) ** (-n - 2)
        while k < L - 1 and spread[k] > target:
            k += 1
        if k >= L - 1:
            break
        indices.append(k)
        n += 1
    if not indices:
        raise ValueError("sequence is not Cauchy enough to extract a subsequence")
    ys = [xs[indices[0]]] + [xs[b] - xs[a] for a, b in zip(indices, indices[1:])]
    telescopes, acc = True, StepFunction.zero(xs[0].dim)
    for N, y in enumerate(ys):
        acc = acc + y
        telescopes &= acc == xs[indices[N]]
    y_norms = [X(y) for y in ys]
    weighted = sum(Cp ** (n + 1) * v for n, v in enumerate(y_norms))
    bound = Cp * y_norms[0] + sum(2.0 ** (-n - 1) for n in range(1, len(ys)))
    return CauchySubsequence(indices, y_norms, telescopes, weighted, bound)


# -- Fatou-type checks -------------------------------------------------------------


@dataclass
class FatouReport:
    monotone_ok: bool
    monotone_norms: list[float]
    limit_norm: float
    liminf_ok: bool
    liminf: float | None
    strict: bool | None


def monotone_truncations(f: StepFunction, levels: Sequence[int] = tuple(range(-3, 12))) -> list[StepFunction]:
    """``min(|f|, 2^k) chi_{|x| < 2^k}``, increasing to ``|f|``."""
    out = []
    for k in levels:
        r = Fraction(2) ** k
        out.append(truncate(restrict(f, [sup_ball(r, f.dim)]), r))
    return out


def fatou_checks(
    f: StepFunction,
    X: QuasinormSpec,
    sequence: Sequence[StepFunction] | None = None,
    limit: StepFunction | None = None,
    rtol: float = 1e-9,
) -> FatouReport:
    """Monotone convergence along truncations of ``f``; optionally ``||limit|| <= liminf ||g_k||``.

    The liminf over a finite sequence is taken as the minimum over its second half.
    """
    fs = monotone_truncations(f)
    norms = [X(g) for g in fs]
    nf = X(f)
    mono = all(_dominates(b, a) for a, b in zip(fs, fs[1:]))
    mono &= all(b >= a * (1 - rtol) for a, b in zip(norms, norms[1:]))
    mono &= abs(norms[-1] - nf) <= rtol * max(1.0, nf) and all(v <= nf * (1 + rtol) for v in norms)
    liminf_ok, li, strict = True, None, None
    if sequence is not None:
        lim = limit if limit is not None else f
        tail = [X(g) for g in sequence[len(sequence) // 2 :]]
        li = min(tail)
        nl = X(lim)
        liminf_ok = nl <= li * (1 + rtol) + 1e-300
        strict = nl < li * (1 - rtol)
    return FatouReport(mono, norms, nf, liminf_ok, li, strict)


def sliding_bump(count: int = 16) -> list[StepFunction]:
    """``chi_(k, k+1)``: tends to zero pointwise while every term has the same norm."""
    return [StepFunction.indicator(Box.interval(k, k + 1)) for k in range(count)]


# -- resonance constructions --------------------------------------------------------


@dataclass
class ResonanceWitness:
    C: Fraction
    prefix: int
    f: StepFunction
    generator_norms: list[float]
    generator_values: list[Fraction]
    values: list[Fraction]  # Phi(f) lower bounds (2C)^(-k-1) Phi(g_k)
    phi_f: Fraction
    dominates: bool
    norm_bound: float  # sum C^(n+1) ||(2C)^(-n-1) g_n|| plus tail
    norm_prefix: float

    @property
    def ok(self) -> bool:
        return self.dominates and all(self.phi_f >= v for v in self.values) and self.norm_prefix <= self.norm_bound * (1 + 1e-9)

    def divergence_log(self) -> list[tuple[int, float, float]]:
        return [(k, float(v), float(self.phi_f)) for k, v in enumerate(self.values)]


def spike(n: int, C) -> StepFunction:
    """``T^2 chi_(0, 1/T)`` with ``T = (n+1)(2C)^(n+1)``: ``L^(1/2)`` quasinorm 1, integral ``T``."""
    T = (n + 1) * (2 * Fraction(C)) ** (n + 1)
    return StepFunction.indicator(Box.interval(0, 1 / T), T * T)


def integral_functional(f: StepFunction) -> Fraction:
    return integrate_abs(f)


def pairing_functional(f0: StepFunction) -> Callable[[StepFunction], Fraction]:
    """``g -> int |f0 g|``."""
    return lambda g: integrate_abs(pointwise_combine(f0, g, "multiply"))


def resonance_witness(
    generator: Callable[[int], StepFunction],
    X: QuasinormSpec,
    phi: Callable[[StepFunction], Fraction] = integral_functional,
    prefix: int = 10,
    atol: float = 1e-9,
) -> ResonanceWitness:
    """``f = sum (2C)^(-n-1) |g_n|`` from generators with ``||g_n|| <= 1`` and ``Phi(g_n) > n (2C)^(n+1)``."""
    C = Fraction(X.C)
    two_c = 2 * C
    gnorms, gvals = [], []
    f = None
    scaled = []
    for n in range(prefix + 1):
        g = absolute(generator(n))
        nv = X(g)
        pv = Fraction(phi(g))
        if nv > 1 + atol:
            raise ValueError(f"rate precondition unmet: ||g_{n}|| = {nv} > 1")
        if not pv > n * two_c ** (n + 1):
            raise ValueError(f"rate precondition unmet: Phi(g_{n}) = {float(pv)} <= n (2C)^(n+1)")
        gnorms.append(nv)
        gvals.append(pv)
        term = scale(g, two_c ** (-n - 1))
        scaled.append(term)
        f = term if f is None else f + term
    dominates = all(_dominates(f, t) for t in scaled)
    phi_f = Fraction(phi(f))
    values = [two_c ** (-k - 1) * gvals[k] for k in range(prefix + 1)]
    weighted = sum(float(C) ** (n + 1) * X(t) for n, t in enumerate(scaled))
    bound = weighted + 2.0 ** (-prefix - 1)  # remaining terms have weighted norm <= 2^(-n-1)
    return ResonanceWitness(C, prefix, f, gnorms, gvals, values, phi_f, dominates, bound, X(f))


# -- operator hypotheses ------------------------------------------------------------


@dataclass
class OperatorConditionReport:
    modulus_ok: bool  # |T f| <= c1 T(|f|)
    domination_ok: bool  # |f| <= |g| => |T f| <= c2 |T g|
    checked: int


def check_operator_conditions(
    T: Callable[[StepFunction], StepFunction], samples: Sequence[StepFunction], c1: float = 1, c2: float = 1
) -> OperatorConditionReport:
    """Check both operator hypotheses on ``samples``; smaller companions are half-restrictions."""
    c1, c2 = Fraction(c1), Fraction(c2)
    mod_ok = dom_ok = True
    for g in samples:
        mod_ok &= _dominates(scale(T(absolute(g)), c1), absolute(T(g)))
        half = StepFunction(g.pieces[: max(1, len(g.pieces) // 2)], g.dim)
        small = scale(half, Fraction(1, 2))
        dom_ok &= _dominates(scale(absolute(T(g)), c2), absolute(T(small)))
    return OperatorConditionReport(mod_ok, dom_ok, len(samples))


# name used by external callers
nt_inequality_check = chained_triangle_check
