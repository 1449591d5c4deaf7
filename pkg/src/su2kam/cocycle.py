"""Quasi-periodic cocycles on T^d x SU(2) in perturbative form.

A cocycle is a pair (alpha, A exp(F(.))) acting by (x, S) -> (x + alpha,
A exp(F(x)) S); the constant part A and the band-limited perturbation F are
the canonical data.  Fibered conjugation by a chain H acts as

    fiber -> H(x + alpha) . fiber(x) . H(x)^-1

and never changes alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arithmetic import Frequency
from .fourier import AlgebraMap, ConjugationChain, analyze, synthesize
from .su2 import (
    CutLocusError,
    GroupElement,
    alg_exp_quat,
    alg_log_quat,
    quat_angle,
    quat_conj,
    quat_mul,
    quat_normalize,
)


class NormalizationError(RuntimeError):
    """Fiber samples could not be reduced to constant-times-exp form."""


@dataclass(frozen=True)
class Cocycle:
    alpha: Frequency
    constant: GroupElement
    perturbation: AlgebraMap

    def __post_init__(self):
        if self.perturbation.dimension != self.alpha.dimension:
            raise ValueError("perturbation dimension does not match the frequency")

    @property
    def dimension(self) -> int:
        return self.alpha.dimension

    def default_grid(self) -> int:
        return 4 * self.perturbation.band + 4

    def fiber_grid(self, m: int, offset=None) -> np.ndarray:
        """Quaternion samples of A exp(F) on the m^d grid, optionally shifted."""
        from .fourier import translate

        amap = self.perturbation if offset is None else translate(self.perturbation, offset)
        return quat_mul(self.constant.q, alg_exp_quat(synthesize(amap, m)))

    def fiber_at(self, x) -> np.ndarray:
        return quat_mul(self.constant.q, alg_exp_quat(self.perturbation.evaluate_at(x)))

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha.components),
            "constant": self.constant.q.tolist(),
            "perturbation": self.perturbation.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Cocycle":
        return cls(
            Frequency(tuple(data["alpha"])),
            GroupElement(np.asarray(data["constant"])),
            AlgebraMap.from_dict(data["perturbation"]),
        )


def normalize(samples: np.ndarray, alpha: Frequency, band: int,
              resynthesis_tol: float = 1e-10) -> Cocycle:
    """Extract (A, F) from raw fiber samples: A is the renormalised quaternion
    mean, F the band-limited analysis of log(A^-1 fiber).

    The fiber must stay within the cut-locus margin of its mean; the
    synthesis error of F against the sampled logarithm must be below
    `resynthesis_tol`, otherwise the band does not resolve the fiber.
    """
    samples = np.asarray(samples, dtype=float)
    axes = tuple(range(samples.ndim - 1))
    mean = np.mean(samples.reshape(-1, 4), axis=0)
    if np.linalg.norm(mean) < 1e-3:
        raise NormalizationError("fiber mean collapses; fiber is far from constant")
    a = quat_normalize(mean)
    try:
        logs = alg_log_quat(quat_mul(quat_conj(a), samples))
    except CutLocusError as exc:
        raise NormalizationError("fiber not close to a constant: %s" % exc) from exc
    amap = analyze(logs, band)
    m = samples.shape[0]
    err = float(np.max(np.abs(synthesize(amap, m) - logs)))
    if err > resynthesis_tol:
        raise NormalizationError(
            "band %d does not resolve the fiber (resynthesis error %.3g)" % (band, err))
    return Cocycle(alpha, GroupElement(a), amap)


def conjugate_raw(chain: ConjugationChain, phi: Cocycle, m: int) -> np.ndarray:
    """Samples of H(x+alpha) fiber(x) H(x)^-1 on the m^d grid, unnormalised."""
    if chain.dimension != phi.dimension:
        raise ValueError("chain dimension does not match the cocycle")
    shifted = chain.grid(m, offset=phi.alpha.vector)
    here = chain.grid(m)
    return quat_mul(shifted, quat_mul(phi.fiber_grid(m), quat_conj(here)))


def conjugate(chain: ConjugationChain, phi: Cocycle, band: int = None,
              m: int = None, resynthesis_tol: float = 1e-10) -> Cocycle:
    """Fibered conjugation followed by normalisation; alpha is untouched.

    The default band doubles the chain's linear spectral content plus a
    margin, enough for close-to-identity exponential factors whose series
    tails must clear the resynthesis tolerance.
    """
    if band is None:
        band = phi.perturbation.band + 2 * chain.content_bound() + 8
    if m is None:
        m = 4 * band + 4
    samples = conjugate_raw(chain, phi, m)
    return normalize(samples, phi.alpha, band, resynthesis_tol)


def iterate(phi: Cocycle, n: int, x) -> GroupElement:
    """n-step fiber product A(x + (n-1) alpha) ... A(x)."""
    if n < 0:
        raise ValueError("iterate expects n >= 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    q = np.array([1.0, 0.0, 0.0, 0.0])
    for j in range(n):
        q = quat_mul(phi.fiber_at(x + j * phi.alpha.vector), q)
    return GroupElement(q)


def c0_distance_to_constant(phi: Cocycle, m: int = None) -> float:
    """max_x d(A^-1 fiber(x), Id): the largest rotation angle of exp(F(x))."""
    if m is None:
        m = phi.default_grid()
    return float(np.max(quat_angle(alg_exp_quat(synthesize(phi.perturbation, m)))))


def c0_distance(phi1: Cocycle, phi2: Cocycle, m: int = None) -> float:
    """max_x d(fiber_1(x), fiber_2(x)) for two cocycles over the same alpha."""
    if phi1.alpha != phi2.alpha:
        raise ValueError("cocycles live over different frequencies")
    if m is None:
        m = max(phi1.default_grid(), phi2.default_grid())
    f1 = phi1.fiber_grid(m)
    f2 = phi2.fiber_grid(m)
    return float(np.max(quat_angle(quat_mul(f1, quat_conj(f2)))))
