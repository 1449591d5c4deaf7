"""Diophantine and resonance arithmetic on the torus.

Absolute conditions on a base frequency alpha, conditions on a scalar beta
relative to alpha, resonance search over a finite winding horizon, continued
fractions and the Gauss map.  All universally quantified conditions are
checked over an explicit horizon that is reported with every result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

# below this defect a frequency is indistinguishable from a rational in doubles
NEAR_RATIONAL_FLOOR = 1e-14

FREQUENCY_PRESETS = {
    "golden": (math.sqrt(5.0) - 1.0) / 2.0,
    "sqrt2": math.sqrt(2.0) - 1.0,
    # truncated sum of 10^(-n!); rational at double precision, kept as a
    # deliberately ill-conditioned demo frequency
    "liouville": 0.110001,
}


@dataclass(frozen=True)
class Frequency:
    """Base rotation alpha in T^d, stored as a tuple for exact equality."""

    components: tuple

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        if len(comps) < 1:
            raise ValueError("frequency needs at least one component")
        for c in comps:
            if not (0.0 <= c < 1.0) or not math.isfinite(c):
                raise ValueError("frequency components must lie in [0, 1)")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_preset(cls, name: str) -> "Frequency":
        return cls((FREQUENCY_PRESETS[name],))

    @property
    def dimension(self) -> int:
        return len(self.components)

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)

    def dot(self, k) -> float:
        return float(np.dot(np.asarray(k, dtype=float), self.vector))


@dataclass(frozen=True)
class DiophParams:
    """Diophantine constants (gamma, tau) with a finite search horizon."""

    gamma: float
    tau: float
    horizon: int

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be a positive integer")

    def bound(self, knorm: float) -> float:
        return (1.0 / self.gamma) / knorm**self.tau


@dataclass(frozen=True)
class ResonanceRecord:
    """Winding k with its defect |beta - k.alpha|_Z at a given scale."""

    k: tuple
    defect: float
    scale: int
    threshold: float

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(c) for c in self.k))
        if all(c == 0 for c in self.k):
            raise ValueError("resonance winding must be nonzero")
        if self.defect < 0:
            raise ValueError("defect must be nonnegative")

    @property
    def knorm(self) -> int:
        return max(abs(c) for c in self.k)

    @property
    def near_rational(self) -> bool:
        """Defect underflow: input is numerically a rational relation."""
        return self.defect < NEAR_RATIONAL_FLOOR


def dist_to_Z(x):
    """Distance to the nearest integer; 1-periodic, even, valued in [0, 1/2]."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("dist_to_Z requires finite input")
    d = np.abs(x - np.rint(x))
    return float(d) if d.ndim == 0 else d


def _canonical_shell(d: int, m: int):
    """Canonical representatives (first nonzero component > 0) of the
    max-norm shell |k| = m, in ascending lexicographic order."""
    if d == 1:
        return [(m,)]
    out = []
    for k in product(range(-m, m + 1), repeat=d):
        if max(abs(c) for c in k) != m:
            continue
        lead = next(c for c in k if c != 0)
        if lead > 0:
            out.append(k)
    out.sort()
    return out


def diophantine_witness(alpha: Frequency, p: DiophParams):
    """First winding violating |k.alpha|_Z >= gamma^-1 |k|^-tau, or None.

    Windings are scanned shell by shell in |k| (max-norm), restricted to
    canonical representatives (the condition is even in k), lexicographically
    within a shell; this makes the witness stable under horizon growth.
    """
    if not p.tau > alpha.dimension:
        raise ValueError("tau must exceed the frequency dimension")
    if alpha.dimension == 1:
        a = alpha.components[0]
        ks = np.arange(1, p.horizon + 1, dtype=float)
        defects = dist_to_Z(ks * a)
        bounds = (1.0 / p.gamma) * ks**-p.tau
        bad = np.nonzero(defects < bounds)[0]
        if bad.size == 0:
            return None
        i = int(bad[0])
        return ResonanceRecord((i + 1,), float(defects[i]), p.horizon, float(bounds[i]))
    for m in range(1, p.horizon + 1):
        bound = p.bound(m)
        for k in _canonical_shell(alpha.dimension, m):
            defect = dist_to_Z(alpha.dot(k))
            if defect < bound:
                return ResonanceRecord(k, defect, p.horizon, bound)
    return None


def relative_defect_minimum(beta: float, alpha: Frequency, n: int, nu: float = None):
    """Winding minimising |beta - k.alpha|_Z over 0 < |k| <= n.

    Ties are broken by smallest |k| (max-norm), then lexicographically.
    The returned record carries threshold n^-nu (nan when nu is None); it is
    not gated on it.
    """
    if n < 1:
        raise ValueError("scale must be >= 1")
    threshold = float(n) ** -nu if nu is not None else float("nan")
    if alpha.dimension == 1:
        a = alpha.components[0]
        ks = np.concatenate([np.arange(-n, 0), np.arange(1, n + 1)])
        defects = dist_to_Z(beta - ks * a)
        order = np.lexsort((ks, np.abs(ks), defects))
        i = int(order[0])
        return ResonanceRecord((int(ks[i]),), float(defects[i]), n, threshold)
    best = None
    for m in range(1, n + 1):
        for k in _canonical_shell(alpha.dimension, m):
            for kk in (k, tuple(-c for c in k)):
                defect = dist_to_Z(beta - alpha.dot(kk))
                key = (defect, m, kk)
                if best is None or key < best[0]:
                    best = (key, ResonanceRecord(kk, defect, n, threshold))
    return best[1]


def relative_resonance(beta: float, alpha: Frequency, n: int, nu: float):
    """Resonance of beta relative to alpha at scale n: the minimising winding
    if its defect is within the closed threshold n^-nu, else None."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    rec = relative_defect_minimum(beta, alpha, n, nu)
    return rec if rec.defect <= rec.threshold else None


def gauss_map(alpha: float) -> float:
    """Fractional part of 1/alpha for alpha in (0, 1)."""
    if alpha == 0:
        raise ValueError("Gauss map undefined at 0")
    if not (0.0 < alpha < 1.0):
        raise ValueError("Gauss map expects alpha in (0, 1)")
    inv = 1.0 / alpha
    return inv - math.floor(inv)


def continued_fraction(alpha: float, count: int):
    """First `count` continued-fraction digits of alpha in (0, 1) via the
    Gauss map.  Raises if an iterate hits 0 (numerically rational input)."""
    digits = []
    x = alpha
    for _ in range(count):
        if abs(x) < NEAR_RATIONAL_FLOOR:
            raise ValueError("continued fraction terminated: rational input")
        inv = 1.0 / x
        a = math.floor(inv)
        digits.append(int(a))
        x = inv - a
    return digits


def rdc_horizon_check(alpha: float, p: DiophParams, depth: int):
    """Indices n <= depth with G^n(alpha) Diophantine at params p.

    Finite surrogate for the recurrence condition; one-dimensional only.
    Raises if a Gauss iterate hits 0 (rational input).
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("recurrent Diophantine check expects alpha in (0, 1)")
    passing = []
    x = alpha
    for n in range(depth + 1):
        if diophantine_witness(Frequency((x,)), p) is None:
            passing.append(n)
        if n < depth:
            if abs(x) < NEAR_RATIONAL_FLOOR:
                raise ValueError("Gauss iterate hit 0: rational frequency")
            x = gauss_map(x)
    return passing
