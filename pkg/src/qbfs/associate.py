"""Associate functional by exact maximisation over a declared finite class.

The supremum defining ``||f||_{X'}`` runs over all of ``X`` and cannot be
computed.  Here it runs over a finite class of non-negative candidates ``g``
that are constant on the cells of ``f``'s partition (optionally refined):

* every vector with entries from ``value_grid`` (the *grid* part),
* every single-cell indicator (*concentration* candidates),
* ``|f|`` itself (*self*), which makes the second-associate check sound,
* for ``L^p`` with ``p > 1`` the Hoelder-aligned ``|f|^(p'-1)`` (*dual*),
  and for ``L^inf`` the indicator of the support.

All reported values are therefore lower bounds of the true associate norm,
exact on the class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .measure import Grid
from .quasinorm import QuasinormSpec
from .rational import modulus
from .stepfunction import StepFunction, integrate_abs, pointwise_combine, refine

_KIND_ORDER = {"self": 0, "dual": 1, "support": 2, "concentration": 3, "grid": 4, "extra": 5}


@dataclass(frozen=True)
class SearchClass:
    refine: int = 0
    value_grid: tuple[Fraction, ...] = (Fraction(0), Fraction(1, 2), Fraction(1))
    concentration: bool = True
    include_self: bool = True
    max_grid_candidates: int = 200_000

    def __post_init__(self):
        vg = tuple(sorted({Fraction(v) for v in self.value_grid}))
        if any(v < 0 for v in vg):
            raise ValueError("value grid must be non-negative")
        object.__setattr__(self, "value_grid", vg)
        if self.refine < 0:
            raise ValueError("refinement level must be non-negative")

    def describe(self) -> dict:
        return {
            "refine": self.refine,
            "value_grid": [str(v) for v in self.value_grid],
            "concentration": self.concentration,
            "include_self": self.include_self,
        }


@dataclass
class Candidates:
    """Non-negative candidate value vectors on a fixed set of cells."""

    cells: list  # boxes
    mu: np.ndarray  # float cell measures
    mu_exact: list[Fraction]
    fabs: np.ndarray  # |f| on cells (float)
    fabs_exact: list[Fraction]
    G: np.ndarray
    kinds: list[str]
    keys: list[tuple]


@dataclass
class AssociateEvaluation:
    value: float
    witness: StepFunction | None
    witness_kind: str | None
    search: SearchClass
    candidates: int
    ratios: np.ndarray = field(repr=False, default=None)
    norms: np.ndarray = field(repr=False, default=None)
    pairings: np.ndarray = field(repr=False, default=None)


def _cells(f: StepFunction, search: SearchClass, extras: Sequence[StepFunction] = ()):
    """Cells of ``f``'s support, refined by ``extras`` and then ``2^refine`` times."""
    if extras:
        grid = f.grid_with(*extras)
        vals = f.on_grid(grid)
        # one piece per grid cell so extras are constant on every cell
        pieces = []
        for idx in np.ndindex(*grid.shape):
            v = vals[idx]
            if v != 0:
                pieces.append((grid.cell_box(idx), v))
        base = StepFunction(pieces, f.dim, _trusted=True)
    else:
        base = f
    fine = refine(base, search.refine)
    return fine.pieces


def build_candidates(
    f: StepFunction, X: QuasinormSpec, search: SearchClass, extras: Sequence[StepFunction] = ()
) -> Candidates:
    pieces = _cells(f, search, extras)
    cells = [b for b, _ in pieces]
    mu_exact = [b.measure for b in cells]
    mu = np.array([float(m) for m in mu_exact])
    fabs_exact = [modulus(v) for _, v in pieces]
    fabs = np.array([float(v) for v in fabs_exact])
    m = len(cells)
    rows, kinds, keys = [], [], []

    def add(vec, kind, key):
        rows.append(vec)
        kinds.append(kind)
        keys.append((_KIND_ORDER[kind], key))

    if search.include_self:
        add(fabs.copy(), "self", tuple(fabs_exact))
    if X.name == "lp" and X.param("p") > 1:
        p = X.param("p")
        add(np.power(fabs, 1.0 / (p - 1.0)), "dual", ())
    if X.name == "linf":
        add(np.ones(m), "support", ())
    if search.concentration:
        for j in range(m):
            e = np.zeros(m)
            e[j] = 1.0
            add(e, "concentration", (j,))
    grid_vals = search.value_grid
    if len(grid_vals) ** m <= search.max_grid_candidates:
        gv = np.array([float(v) for v in grid_vals])
        for combo in product(range(len(grid_vals)), repeat=m):
            vec = gv[list(combo)]
            if vec.any():
                add(vec, "grid", tuple(grid_vals[c] for c in combo))
    else:
        raise ValueError(
            f"value grid of size {len(grid_vals)} over {m} cells exceeds {search.max_grid_candidates} candidates"
        )
    for i, g in enumerate(extras):
        grid = Grid(cells + g.boxes, f.dim)
        gv = g.on_grid(grid)
        vec = []
        for b in cells:
            sl = grid.slices(b)
            vec.append(float(modulus(gv[sl].flat[0])))
        add(np.array(vec), "extra", (i,))
    G = np.array(rows) if rows else np.zeros((0, m))
    return Candidates(cells, mu, mu_exact, fabs, fabs_exact, G, kinds, keys)


def _ratios(pair: np.ndarray, norms: np.ndarray) -> np.ndarray:
    """``pair / norm`` with ``0/0 = 0`` and ``a/0 = inf``."""
    out = np.zeros_like(pair)
    pos = norms > 0
    out[pos] = pair[pos] / norms[pos]
    out[(~pos) & (pair > 0)] = math.inf
    return out


def _argmax_lex(ratios: np.ndarray, keys: list[tuple]) -> int:
    best = ratios.max()
    ties = np.flatnonzero(ratios == best)
    return int(min(ties, key=lambda i: keys[i]))


def associate_norm(
    f: StepFunction, X: QuasinormSpec, search: SearchClass | None = None, extras: Sequence[StepFunction] = ()
) -> AssociateEvaluation:
    """``sup_g int|fg| / ||g||_X`` over the declared candidate class."""
    search = search or SearchClass()
    if f.is_zero:
        return AssociateEvaluation(0.0, None, None, search, 0)
    cand = build_candidates(f, X, search, extras)
    pair = cand.G @ (cand.fabs * cand.mu)
    norms = X.batch(cand.G, cand.mu)
    ratios = _ratios(pair, norms)
    k = _argmax_lex(ratios, cand.keys)
    witness = StepFunction(
        [(b, Fraction(float(v))) for b, v in zip(cand.cells, cand.G[k]) if v != 0], f.dim
    )
    return AssociateEvaluation(float(ratios[k]), witness, cand.kinds[k], search, len(cand.kinds), ratios, norms, pair)


@dataclass
class HolderReport:
    holds: bool
    slack: float
    class_min_slack: float
    witness_slack: float
    witness_pairing: float = 0.0  # int|f w| at the witness, the scale for witness_slack


def holder_check(
    f: StepFunction, g: StepFunction, X: QuasinormSpec, search: SearchClass | None = None, rtol: float = 1e-9
) -> HolderReport:
    """Check ``int|fg| <= ||g||_X ||f||_{X'}`` with ``g`` added to the searched class.

    Also checks the inequality for every candidate of the class and the
    slack at the reported witness (zero up to rounding).
    """
    ev = associate_norm(f, X, search, extras=[g] if not g.is_zero else [])
    lhs = float(integrate_abs(pointwise_combine(f, g, "multiply")))
    rhs = _times(X(g), ev.value)
    slack = rhs - lhs
    if ev.ratios is None:
        return HolderReport(lhs <= 0, slack, 0.0, 0.0)
    with np.errstate(invalid="ignore"):
        class_slack = np.array([_times(n, ev.value) for n in ev.norms]) - ev.pairings
    w_lhs = float(integrate_abs(pointwise_combine(f, ev.witness, "multiply")))
    w_slack = _times(X(ev.witness), ev.value) - w_lhs
    scale = max(1.0, abs(lhs), abs(rhs))
    holds = slack >= -rtol * scale and bool(np.all(class_slack >= -rtol * np.maximum(1.0, ev.pairings)))
    return HolderReport(holds, slack, float(class_slack.min()), w_slack, w_lhs)


def _times(a: float, b: float) -> float:
    """Product with ``0 * inf = inf``."""
    if math.isinf(a) or math.isinf(b):
        return math.inf
    return a * b


@dataclass
class SecondAssociateResult:
    holds: bool
    second_associate: float
    norm: float
    witness_kind: str | None


def second_associate_lower_bound(
    f: StepFunction,
    X: QuasinormSpec,
    search: SearchClass | None = None,
    atol: float = 1e-9,
    max_pairs: int = 50_000_000,
) -> SecondAssociateResult:
    """Searched ``||f||_{X''}`` and the check ``||f||_{X''} <= ||f||_X``.

    ``h`` ranges over the same class as ``g``; ``||h||_{X'}`` is itself the
    searched value, which stays sound because ``|f|`` is a ``g``-candidate.
    """
    search = search or SearchClass()
    for b in f.boxes:
        if not math.isfinite(X(StepFunction.indicator(b))):
            raise ValueError("quasinorm is infinite on an indicator of finite measure")
    nf = X(f)
    if f.is_zero:
        return SecondAssociateResult(True, 0.0, nf, None)
    if not search.include_self:
        raise ValueError("second-associate check requires |f| in the candidate class")
    cand = build_candidates(f, X, search)
    gnorms = X.batch(cand.G, cand.mu)
    if cand.G.shape[0] ** 2 > max_pairs:
        raise ValueError(f"{cand.G.shape[0]} candidates: pair table exceeds {max_pairs} entries")
    safe = np.where(gnorms > 0, gnorms, 1.0)
    Gmu = (cand.G * cand.mu).T
    h_assoc = np.empty(cand.G.shape[0])
    for s in range(0, cand.G.shape[0], 2048):
        P = cand.G[s : s + 2048] @ Gmu  # P[h, g] = int h g
        R = np.where(gnorms[None, :] > 0, P / safe[None, :], np.where(P > 0, math.inf, 0.0))
        h_assoc[s : s + 2048] = R.max(axis=1)
    pair = cand.G @ (cand.fabs * cand.mu)
    ratios = _ratios(pair, h_assoc)
    k = _argmax_lex(ratios, cand.keys)
    val = float(ratios[k])
    return SecondAssociateResult(val <= nf + atol * max(1.0, nf), val, nf, cand.kinds[k])
