"""Seeded generators of random step functions and profiles."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .measure import Box, DyadicCube
from .rational import QComplex
from .rearrangement import RearrangementProfile
from .stepfunction import StepFunction

_DENOMS = (1, 2, 3, 4, 8)


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))


def random_rational(rng: np.random.Generator, max_num: int = 12, signed: bool = True) -> Fraction:
    num = int(rng.integers(-max_num if signed else 1, max_num + 1))
    return Fraction(num, int(rng.choice(_DENOMS)))


def random_value(rng, signed=True, complex_prob=0.0):
    v = random_rational(rng, signed=signed)
    if complex_prob and rng.random() < complex_prob:
        return QComplex.make(v, random_rational(rng))
    return v


def random_step_function(
    rng: np.random.Generator,
    dim: int = 1,
    length: int = 4,
    resolution: int = 3,
    max_pieces: int = 6,
    signed: bool = True,
    complex_prob: float = 0.0,
    allow_zero: bool = False,
) -> StepFunction:
    """Random step function with dyadic breakpoints inside ``(0, length)^dim``.

    1-D functions use consecutive intervals between random grid points of
    spacing ``2^-resolution``; higher dimensions use random distinct
    dyadic cubes of order ``resolution``.
    """
    while True:
        m = int(rng.integers(1, max_pieces + 1))
        if dim == 1:
            n_grid = length * 2**resolution
            pts = np.sort(rng.choice(n_grid + 1, size=min(m + 1, n_grid + 1), replace=False))
            scale = Fraction(1, 2**resolution)
            pieces = [
                (Box.interval(int(a) * scale, int(b) * scale), random_value(rng, signed, complex_prob))
                for a, b in zip(pts, pts[1:])
            ]
        else:
            side = length * 2**resolution
            flat = rng.choice(side**dim, size=min(m, side**dim), replace=False)
            pieces = [
                (DyadicCube(resolution, tuple(int(c) for c in np.unravel_index(int(i), (side,) * dim))).box, random_value(rng, signed, complex_prob))
                for i in flat
            ]
        f = StepFunction(pieces, dim)
        if allow_zero or not f.is_zero:
            return f


def random_profile(rng: np.random.Generator, max_pieces: int = 6, resolution: int = 4, length: int = 4) -> RearrangementProfile:
    """Random non-zero non-increasing profile with dyadic breakpoints."""
    m = int(rng.integers(1, max_pieces + 1))
    n_grid = length * 2**resolution
    pts = sorted(set(int(x) for x in rng.choice(np.arange(1, n_grid + 1), size=m, replace=False)))
    bp = (Fraction(0),) + tuple(Fraction(x, 2**resolution) for x in pts)
    vals = sorted({Fraction(int(rng.integers(1, 64)), int(rng.choice(_DENOMS))) for _ in range(len(pts))}, reverse=True)
    while len(vals) < len(pts):
        vals.append(vals[-1] / 2)
    return RearrangementProfile(bp, tuple(vals[: len(pts)]))


def random_cover_instance(rng: np.random.Generator, dim: int = 1, resolution: int = 3, max_boxes: int = 3):
    """``(K, G, eps, k0)``: closed dyadic boxes ``K`` and open ``G`` holding them with a margin."""
    side = 4 * 2**resolution
    step = Fraction(1, 2**resolution)
    K, G = [], []
    for _ in range(int(rng.integers(1, max_boxes + 1))):
        lo = [int(rng.integers(0, side - 2)) for _ in range(dim)]
        hi = [l + int(rng.integers(1, 3)) for l in lo]
        b = Box(tuple(l * step for l in lo), tuple(h * step for h in hi))
        K.append(b)
        G.append(b.expanded(Fraction(1, 2 ** int(rng.integers(resolution + 1, resolution + 4)))))
    eps = Fraction(1, 2 ** int(rng.integers(2, 8)))
    k0 = int(rng.integers(0, 4))
    return K, G, eps, k0
