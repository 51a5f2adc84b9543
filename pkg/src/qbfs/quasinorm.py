"""Quasinorms on step functions, their axiom checks and the Aoki-Rolewicz exponent."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .measure import Box
from .rational import to_scalar
from .rearrangement import RearrangementProfile, nonincreasing_rearrangement
from .stepfunction import (
    StepFunction,
    absolute,
    common_grid,
    level_restrict,
    pointwise_combine,
    restrict,
    restrict_complement,
    scale,
    truncate,
)


@dataclass(frozen=True)
class QuasinormSpec:
    """A named rearrangement-invariant quasinorm.

    ``profile_norm`` evaluates the quasinorm from ``f*``;  ``batch`` evaluates
    it for many non-negative value vectors on a shared set of cells.
    ``exact`` optionally returns the value as a :class:`Fraction`.
    """

    name: str
    params: tuple[tuple[str, float], ...]
    modulus_of_concavity: float
    profile_norm: Callable[[RearrangementProfile], float]
    batch: Callable[[np.ndarray, np.ndarray], np.ndarray]
    rearrangement_invariant: bool = True
    absolutely_continuous: bool = True
    exact: Callable[[RearrangementProfile], Fraction] | None = None
    r_exponent: float | None = None

    @property
    def C(self) -> float:
        return self.modulus_of_concavity

    @property
    def selector(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={_fmt_param(v)}" for k, v in self.params)

    def param(self, key: str) -> float:
        return dict(self.params)[key]

    def __call__(self, f: StepFunction) -> float:
        return self.profile_norm(nonincreasing_rearrangement(f))

    def exact_value(self, f: StepFunction) -> Fraction:
        if self.exact is None:
            raise ValueError(f"{self.selector} has no exact evaluator")
        return self.exact(nonincreasing_rearrangement(f))

    def indicator_norm(self, m) -> float:
        """``||chi_E||`` for a set of measure ``m``."""
        m = Fraction(m)
        if m <= 0:
            return 0.0
        return self.profile_norm(RearrangementProfile((Fraction(0), m), (Fraction(1),)))

    def tail_modulus(self, f: StepFunction, eps: float) -> Fraction:
        """Threshold ``N`` with ``||f chi_{|f|>N}||`` and ``||f chi_{|x|>N}||`` below ``eps``.

        ``|x|`` is the sup-norm of ``x``.  Found by bisection on ``N``; both
        quantities are non-increasing in ``N`` and vanish once ``N`` exceeds
        ``max|f|`` and the support radius.
        """
        return tail_threshold(self, f, eps)

    def ac_modulus(self, f: StepFunction, eps: float, extra: float | None = None) -> Fraction:
        """Dyadic ``delta`` such that ``measure(A) < delta`` forces ``||f chi_A|| < eps``.

        With ``extra`` given, also ``||chi_A|| < extra``.  Uses that for an
        r.i. quasinorm ``||f chi_A|| <= ||f* chi_[0, measure A)||``.
        """
        if not self.rearrangement_invariant:
            raise ValueError("absolute-continuity modulus needs a rearrangement-invariant quasinorm")
        if not self.absolutely_continuous:
            raise ValueError(f"{self.selector} does not have absolutely continuous quasinorm")
        prof = nonincreasing_rearrangement(f)

        def ok(delta: Fraction) -> bool:
            if self.profile_norm(_truncate_profile(prof, delta)) >= eps:
                return False
            return extra is None or self.indicator_norm(delta) < extra

        delta = Fraction(1)
        while not ok(delta):
            delta /= 2
            if delta < Fraction(1, 2 ** 200):
                raise ValueError("could not find an absolute-continuity modulus")
        while ok(delta * 2) and delta < 2 ** 60:
            delta *= 2
        return delta


def _fmt_param(v) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def _truncate_profile(prof: RearrangementProfile, t: Fraction) -> RearrangementProfile:
    """``f* chi_[0, t)``."""
    bp, vs = [Fraction(0)], []
    for a, b, v in zip(prof.breakpoints, prof.breakpoints[1:], prof.values):
        if a >= t:
            break
        bp.append(min(b, t))
        vs.append(v)
    return RearrangementProfile(tuple(bp), tuple(vs))


# -- concrete quasinorms ------------------------------------------------------


def lp_modulus(p: float) -> float:
    return max(1.0, 2.0 ** (1.0 / p - 1.0))


def lp(p: float) -> QuasinormSpec:
    """Lebesgue ``L^p``, ``p > 0``."""
    p = float(p)
    if not p > 0:
        raise ValueError("p must be positive")

    def profile_norm(prof: RearrangementProfile) -> float:
        if prof.is_zero:
            return 0.0
        _, width, vals = prof.as_float_arrays()
        return _kernels.lp_power_sum(vals, width, p) ** (1.0 / p)

    def batch(V, mu):
        return _kernels.lp_norms_batch(V, mu, p)

    exact = None
    if p == 1.0:

        def exact(prof: RearrangementProfile) -> Fraction:
            return sum((v * w for v, w in prof.level_masses()), Fraction(0))

    return QuasinormSpec(
        name="lp",
        params=(("p", p),),
        modulus_of_concavity=lp_modulus(p),
        profile_norm=profile_norm,
        batch=batch,
        exact=exact,
        r_exponent=min(p, 1.0),
    )


def lp_norm(f: StepFunction, p: float) -> float:
    """``(sum |v|^p measure)^(1/p)``."""
    return lp(p)(f)


def lorentz_default_modulus(p: float, q: float) -> float:
    return 2.0 ** (1.0 / min(p, q, 1.0) - 1.0) * 2.0 ** max(0.0, 1.0 / p - 1.0 / q)


def lorentz(p: float, q: float, C: float | None = None) -> QuasinormSpec:
    """Lorentz ``L^{p,q}`` with ``(int_0^inf t^(q/p-1) f*(t)^q dt)^(1/q)``.

    ``C`` is a stored upper bound for the modulus of concavity; the default
    is ``lorentz_default_modulus(p, q)``.
    """
    p, q = float(p), float(q)
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    if C is None:
        C = lorentz_default_modulus(p, q)
    if C < 1:
        raise ValueError("modulus of concavity must be >= 1")

    def profile_norm(prof: RearrangementProfile) -> float:
        if prof.is_zero:
            return 0.0
        lo, width, vals = prof.as_float_arrays()
        return _kernels.lorentz_power_sum(lo, width, vals, p, q) ** (1.0 / q)

    def batch(V, mu):
        return _kernels.lorentz_norms_batch(V, mu, p, q)

    return QuasinormSpec(
        name="lorentz",
        params=(("p", p), ("q", q)),
        modulus_of_concavity=float(C),
        profile_norm=profile_norm,
        batch=batch,
        r_exponent=min(q, 1.0) if q <= p else None,
    )


def lorentz_norm(f: StepFunction, p: float, q: float) -> float:
    return lorentz(p, q)(f)


def linf() -> QuasinormSpec:
    """Essential supremum; a Banach function norm without absolute continuity."""

    def profile_norm(prof: RearrangementProfile) -> float:
        return float(prof.values[0]) if prof.values else 0.0

    def exact(prof: RearrangementProfile) -> Fraction:
        return prof.values[0] if prof.values else Fraction(0)

    return QuasinormSpec(
        name="linf",
        params=(),
        modulus_of_concavity=1.0,
        profile_norm=profile_norm,
        batch=_kernels.linf_norms_batch,
        absolutely_continuous=False,
        exact=exact,
        r_exponent=1.0,
    )


class NormSelectorError(ValueError):
    """Unknown or malformed norm selector string."""


def parse_norm(selector: str) -> QuasinormSpec:
    """Resolve ``lp:p=0.5``, ``lorentz:p=2,q=0.5[,C=...]`` or ``linf``."""
    name, _, rest = selector.strip().partition(":")
    params: dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise NormSelectorError(f"malformed parameter {item!r} in {selector!r}")
            try:
                params[key.strip()] = float(Fraction(val.strip()))
            except (ValueError, ZeroDivisionError) as exc:
                raise NormSelectorError(f"bad value for {key!r} in {selector!r}") from exc
    try:
        if name == "lp" and set(params) == {"p"}:
            return lp(params["p"])
        if name == "lorentz" and set(params) in ({"p", "q"}, {"p", "q", "C"}):
            return lorentz(params["p"], params["q"], params.get("C"))
        if name in ("linf", "sup") and not params:
            return linf()
    except ValueError as exc:
        raise NormSelectorError(str(exc)) from exc
    raise NormSelectorError(f"unknown norm selector {selector!r}")


# -- tail oracle ----------------------------------------------------------------


def sup_ball(N, dim: int) -> Box:
    N = Fraction(N)
    return Box((-N,) * dim, (N,) * dim)


def tail_parts(f: StepFunction, N) -> tuple[StepFunction, StepFunction]:
    """``(f chi_{|f| > N}, f chi_{|x|_inf > N})``."""
    return level_restrict(f, N, above=True), restrict_complement(f, [sup_ball(N, f.dim)])


def tail_threshold(norm: QuasinormSpec, f: StepFunction, eps: float, iterations: int = 40) -> Fraction:
    def ok(N) -> bool:
        a, b = tail_parts(f, N)
        return norm(a) < eps and norm(b) < eps

    if f.is_zero:
        return Fraction(0)
    bb = f.bounding_box()
    hi = max([f.max_abs()] + [abs(x) for x in bb.lo + bb.hi])
    lo = Fraction(0)
    if ok(lo):
        return lo
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# -- axiom checks -------------------------------------------------------------------


@dataclass
class AxiomFailure:
    axiom: str
    witness: str
    lhs: float
    rhs: float


@dataclass
class AxiomReport:
    norm: str
    modulus_of_concavity: float
    samples: int
    pairs: int
    empirical_C: float
    worst_pair: tuple[int, int] | None
    checks: dict[str, int] = field(default_factory=dict)
    failures: list[AxiomFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


_HOMOGENEITY_SCALARS = (Fraction(3), Fraction(1, 2), Fraction(-2), Fraction(7, 3), complex(3, 4))


def _rel_close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def check_quasinorm_axioms(
    norm: QuasinormSpec,
    samples: Sequence[StepFunction],
    rtol: float = 1e-9,
    fatou_levels: Sequence[Fraction] | None = None,
) -> AxiomReport:
    """Check the quasinorm and function-norm axioms on ``samples``.

    Homogeneity, definiteness, the ``C``-triangle inequality on every pair,
    the lattice property on ``min(|f|,|g|) <= |g|`` and on restrictions,
    the Fatou property along ``f_k = min(|f|, k) chi_{B_k}`` and finiteness
    on indicators.  The worst ratio ``||f+g|| / (||f|| + ||g||)`` is
    reported as an empirical lower bound for the modulus of concavity.
    """
    if not samples:
        raise ValueError("need at least one sample")
    C = norm.modulus_of_concavity
    fails: list[AxiomFailure] = []
    checks = {k: 0 for k in ("homogeneity", "definiteness", "triangle", "lattice", "fatou", "finiteness", "abs")}
    norms = [norm(f) for f in samples]

    for i, f in enumerate(samples):
        nf = norms[i]
        checks["abs"] += 1
        if norm(absolute(f)) != nf:
            fails.append(AxiomFailure("abs", f"sample {i}", norm(absolute(f)), nf))
        for a in _HOMOGENEITY_SCALARS:
            checks["homogeneity"] += 1
            lhs = norm(scale(f, a))
            rhs = abs(complex(a)) * nf
            if not _rel_close(lhs, rhs, rtol):
                fails.append(AxiomFailure("homogeneity", f"sample {i}, scalar {a}", lhs, rhs))
        checks["definiteness"] += 1
        if (nf == 0) != f.is_zero:
            fails.append(AxiomFailure("definiteness", f"sample {i}", nf, 0.0))
        levels = fatou_levels or [Fraction(2) ** j for j in range(-3, 12)]
        prev = 0.0
        for k in levels:
            fk = restrict(truncate(f, k), [sup_ball(k, f.dim)])
            nk = norm(fk)
            checks["fatou"] += 1
            if nk < prev * (1 - rtol):
                fails.append(AxiomFailure("fatou-monotone", f"sample {i}, level {k}", nk, prev))
            prev = nk
        if not _rel_close(prev, nf, rtol):
            fails.append(AxiomFailure("fatou-limit", f"sample {i}", prev, nf))
        for b in f.boxes[:3]:
            checks["finiteness"] += 1
            val = norm(StepFunction.indicator(b))
            if not math.isfinite(val):
                fails.append(AxiomFailure("finiteness", f"sample {i}, indicator {b}", val, math.inf))
        half = f.boxes[: max(1, len(f.boxes) // 2)]
        checks["lattice"] += 1
        sub = norm(restrict(f, half)) if f.pieces else 0.0
        if sub > nf * (1 + rtol):
            fails.append(AxiomFailure("lattice", f"sample {i} restricted", sub, nf))

    # pairs on a common grid, evaluated by the batch kernel
    grid, mu, V = common_grid(list(samples))
    idx = list(combinations(range(len(samples)), 2)) + [(i, i) for i in range(len(samples))]
    worst, worst_pair = 0.0, None
    if mu.size and idx:
        ii = np.array([a for a, _ in idx])
        jj = np.array([b for _, b in idx])
        n_i = np.asarray(norms)[ii]
        n_j = np.asarray(norms)[jj]
        chunk = 20000
        for s in range(0, len(idx), chunk):
            a, b = ii[s : s + chunk], jj[s : s + chunk]
            sums = norm.batch(np.abs(V[a] + V[b]), mu)
            mins = norm.batch(np.minimum(np.abs(V[a]), np.abs(V[b])), mu)
            denom = n_i[s : s + chunk] + n_j[s : s + chunk]
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = np.where(denom > 0, sums / denom, 0.0)
            checks["triangle"] += len(a)
            checks["lattice"] += len(a)
            bad = np.flatnonzero(sums > C * denom * (1 + rtol))
            for t in bad[:10]:
                fails.append(AxiomFailure("triangle", f"pair {(int(a[t]), int(b[t]))}", float(sums[t]), float(C * denom[t])))
            badl = np.flatnonzero(mins > n_j[s : s + chunk] * (1 + rtol))
            for t in badl[:10]:
                fails.append(AxiomFailure("lattice", f"min of pair {(int(a[t]), int(b[t]))}", float(mins[t]), float(n_j[s + t])))
            k = int(np.argmax(ratio))
            if ratio[k] > worst:
                worst, worst_pair = float(ratio[k]), (int(a[k]), int(b[k]))
    return AxiomReport(
        norm=norm.selector,
        modulus_of_concavity=C,
        samples=len(samples),
        pairs=len(idx),
        empirical_C=worst,
        worst_pair=worst_pair,
        checks=checks,
        failures=fails,
    )


def disjoint_witness_pair(norm: QuasinormSpec, dim: int = 1) -> tuple[StepFunction, StepFunction]:
    """Two disjointly supported functions of equal norm one.

    For ``L^p`` with ``p < 1`` the pair attains ``||f+g|| = 2^(1/p-1)(||f||+||g||)``.
    """
    m = Fraction(1)
    c = 1.0 / norm.indicator_norm(m)
    e1 = Box((Fraction(0),) * dim, (Fraction(1),) * dim)
    e2 = Box((Fraction(1),) + (Fraction(0),) * (dim - 1), (Fraction(2),) + (Fraction(1),) * (dim - 1))
    return StepFunction([(e1, c)], dim), StepFunction([(e2, c)], dim)


def aoki_rolewicz_exponent(C: float) -> float:
    """``r`` in ``(0, 1]`` with ``(2C)^r = 2``."""
    if not C >= 1:
        raise ValueError("modulus of concavity must be >= 1")
    return 1.0 / math.log2(2.0 * C)


def check_r_subadditivity(
    norm: QuasinormSpec, samples: Sequence[StepFunction], r: float | None = None, K: float = 1.0, rtol: float = 1e-9
) -> tuple[bool, float]:
    """Sample check of ``||f+g||^r <= K (||f||^r + ||g||^r)``; returns (holds, worst ratio)."""
    r = aoki_rolewicz_exponent(norm.C) if r is None else r
    _, mu, V = common_grid(list(samples))
    norms = np.array([norm(f) for f in samples]) ** r
    worst = 0.0
    for i in range(len(samples)):
        sums = norm.batch(np.abs(V[i][None, :] + V[i:]), mu) ** r
        denom = norms[i] + norms[i:]
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(denom > 0, sums / denom, 0.0)
        worst = max(worst, float(ratio.max()) if ratio.size else 0.0)
    return worst <= K * (1 + rtol), worst


def integral_domination_ratio(norm: QuasinormSpec, E, samples: Sequence[StepFunction]) -> float:
    """Largest observed ``int_E |f| / ||f||``: an empirical lower bound for ``C_E``."""
    from .stepfunction import integrate_abs

    best = 0.0
    for f in samples:
        nf = norm(f)
        part = float(integrate_abs(restrict(f, E)))
        if nf > 0:
            best = max(best, part / nf)
        elif part > 0:
            return math.inf
    return best


def ratio_of_sum(norm: QuasinormSpec, f: StepFunction, g: StepFunction) -> float:
    denom = norm(f) + norm(g)
    return norm(pointwise_combine(f, g, "add")) / denom if denom else 0.0


__all__ = [
    "QuasinormSpec",
    "AxiomReport",
    "AxiomFailure",
    "NormSelectorError",
    "lp",
    "lp_norm",
    "lorentz",
    "lorentz_norm",
    "linf",
    "parse_norm",
    "check_quasinorm_axioms",
    "check_r_subadditivity",
    "disjoint_witness_pair",
    "aoki_rolewicz_exponent",
    "integral_domination_ratio",
    "tail_threshold",
    "tail_parts",
]
