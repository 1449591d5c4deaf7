"""Fibered rotation vectors: estimation, equivalence, arithmetic class.

The rotation vector of a converged normal form is the torus coordinate of
the limiting constant pulled back through every resonance-removal shift:
representative = theta_final + sum_i k_i . alpha.  It is well defined only
up to the winding shifts n (k . alpha), the full center periods 2m (since
exp(2e) = Id) and the torus reversal r -> -r, which together make up the
equivalence class searched by `equivalence_check`.

The arithmetic class of the vector relative to alpha drives the
reducibility prediction: a Diophantine root forces the resonance ledger to
terminate, a resonant root means the cocycle reduces to a center element.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .arithmetic import DiophParams, Frequency, ResonanceRecord, dist_to_Z
from .cocycle import Cocycle, c0_distance, conjugate
from .fourier import AlgebraMap, ConjugationChain, ExpFactor, sobolev_norm
from .kam import NormalForm, SchemeParams, run_scheme

CLASS_DIOPHANTINE = "diophantine-wrt-alpha"
CLASS_RESONANT = "resonant-wrt-alpha"
CLASS_UNDETERMINED = "undetermined"

EXACT_RESONANCE_TOL = 1e-12


class UnresolvedRotation(RuntimeError):
    """Rotation vector not resolved at this horizon."""


@dataclass(frozen=True)
class RotationVector:
    representative: float
    alpha: Frequency
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "representative": self.representative,
            "alpha": list(self.alpha.components),
            "provenance": self.provenance,
        }


def rotation_vector(nf: NormalForm, cauchy_tol: float = 1e-8) -> RotationVector:
    """Accumulated torus coordinate of a converged normal form.

    The Cauchy certificate requires the accumulators of the last two
    recorded steps to agree within `cauchy_tol`; otherwise the limit is not
    resolved at this horizon.
    """
    if not nf.converged:
        raise UnresolvedRotation("scheme did not converge; no rotation vector")
    accumulators = [row.accumulator for row in nf.diagnostics]
    if len(accumulators) >= 2:
        gap = abs(accumulators[-1] - accumulators[-2])
        if gap > cauchy_tol:
            raise UnresolvedRotation(
                "rotation vector not resolved at this horizon (last gap %.3g)" % gap)
    else:
        gap = 0.0
    representative = nf.final_theta + nf.sum_k_alpha
    provenance = {
        "steps": nf.steps,
        "resonant_steps": nf.resonant_count,
        "windings": [list(r.winding) for r in nf.ledger],
        "final_residual_h0": sobolev_norm(nf.final_map, 0.0),
        "cauchy_gap": gap,
    }
    return RotationVector(float(representative), nf.alpha, provenance)


def equivalence_witness(r1: RotationVector, r2: RotationVector,
                        horizon: int, tol: float = 1e-8):
    """Search r1 - r2 = n (k.alpha) + 2m over |n|, |m| <= horizon and
    windings |k| <= horizon, on both Weyl signs of r1.  Returns the matched
    combination or None."""
    if r1.alpha != r2.alpha:
        raise ValueError("rotation vectors live over different frequencies")
    alpha = r1.alpha
    windings = _winding_box(alpha.dimension, horizon)
    kalphas = np.array([alpha.dot(k) for k in windings])
    multiples = [0]
    for v in range(1, horizon + 1):
        multiples.extend((v, -v))
    for sign in (1.0, -1.0):
        delta = sign * r1.representative - r2.representative
        for n in multiples:
            rest = delta - n * kalphas
            ms = np.rint(rest / 2.0)
            residuals = np.abs(rest - 2.0 * ms)
            hits = np.nonzero((residuals <= tol) & (np.abs(ms) <= horizon))[0]
            if hits.size:
                i = int(hits[0])
                return {"sign": int(sign), "n": n, "k": list(windings[i]),
                        "m": int(ms[i]), "residual": float(residuals[i])}
    return None


def _winding_box(dimension: int, horizon: int):
    if dimension == 1:
        return [(k,) for k in range(0, horizon + 1)]
    # canonical half plus zero; the sign of k is absorbed by n
    out = [(0,) * dimension]
    for k in iproduct(range(-horizon, horizon + 1), repeat=dimension):
        nz = [c for c in k if c != 0]
        if nz and nz[0] > 0:
            out.append(k)
    return out


def equivalence_check(r1: RotationVector, r2: RotationVector,
                      horizon: int, tol: float = 1e-8) -> bool:
    """True iff the representatives agree modulo the rotation-class lattice
    at this horizon; False means 'not equivalent at this horizon'."""
    return equivalence_witness(r1, r2, horizon, tol) is not None


def fold_representative(representative: float) -> float:
    """Canonical root angle in [0, 1]: reduce mod 2 and reflect."""
    t = representative % 2.0
    return 2.0 - t if t > 1.0 else t


@dataclass(frozen=True)
class ArithmeticClassification:
    classification: str
    beta: float
    witness: ResonanceRecord | None
    horizon: int

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "beta": self.beta,
            "witness": None if self.witness is None else {
                "k": list(self.witness.k),
                "defect": self.witness.defect,
                "threshold": self.witness.threshold,
            },
            "horizon": self.horizon,
        }


def classify_arithmetic(r: RotationVector, p: DiophParams) -> ArithmeticClassification:
    """Diophantine-versus-resonant class of the folded representative.

    Scans |beta - k.alpha|_Z against gamma^-1 |k|^-tau over the horizon.  No
    violation predicts smooth reducibility; an exact violation (defect below
    1e-12) is a resonance, the vector is equivalent to a lattice point; a
    near-violation leaves the class undetermined at these constants.
    """
    alpha = r.alpha
    beta = fold_representative(r.representative)
    witness = None
    exact = None
    if alpha.dimension == 1:
        a = alpha.components[0]
        ks = np.concatenate([np.arange(-p.horizon, 0), np.arange(1, p.horizon + 1)])
        defects = dist_to_Z(beta - ks * a)
        bounds = (1.0 / p.gamma) * np.abs(ks, dtype=float) ** -p.tau
        bad = defects < bounds
        if np.any(bad):
            order = np.lexsort((ks[bad], np.abs(ks[bad]), defects[bad]))
            kb, db, bb = ks[bad][order], defects[bad][order], bounds[bad][order]
            exact_idx = np.nonzero(db <= EXACT_RESONANCE_TOL)[0]
            if exact_idx.size:
                i = int(exact_idx[0])
                exact = ResonanceRecord((int(kb[i]),), float(db[i]), p.horizon, float(bb[i]))
            i = int(np.argmin(db))
            witness = ResonanceRecord((int(kb[i]),), float(db[i]), p.horizon, float(bb[i]))
    else:
        best = None
        for m in range(1, p.horizon + 1):
            bound = p.bound(m)
            for k in _winding_box(alpha.dimension, m):
                if max(abs(c) for c in k) != m:
                    continue
                for kk in (k, tuple(-c for c in k)):
                    defect = float(dist_to_Z(beta - alpha.dot(kk)))
                    if defect < bound:
                        rec = ResonanceRecord(kk, defect, p.horizon, bound)
                        if defect <= EXACT_RESONANCE_TOL and exact is None:
                            exact = rec
                        if best is None or defect < best.defect:
                            best = rec
        witness = best
    if witness is None:
        return ArithmeticClassification(CLASS_DIOPHANTINE, beta, None, p.horizon)
    if exact is not None:
        return ArithmeticClassification(CLASS_RESONANT, beta, exact, p.horizon)
    return ArithmeticClassification(CLASS_UNDETERMINED, beta, witness, p.horizon)


def invariance_probe(phi: Cocycle, b: AlgebraMap, params: SchemeParams = None,
                     horizon: int = 50, tol: float = 1e-8) -> dict:
    """Compare rotation vectors of phi and of its conjugate by exp(b).

    Reports both representatives, the equivalence verdict, and the gap
    against the C^0 distance of the two cocycles (continuity probe).
    """
    chain = ConjugationChain((ExpFactor(b),), phi.dimension)
    phi2 = conjugate(chain, phi)
    nf1 = run_scheme(phi, params)
    nf2 = run_scheme(phi2, params)
    r1 = rotation_vector(nf1)
    r2 = rotation_vector(nf2)
    distance = c0_distance(phi, phi2)
    gap = abs(r1.representative - r2.representative)
    return {
        "r1": r1.representative,
        "r2": r2.representative,
        "equivalent": equivalence_check(r1, r2, horizon, tol),
        "representative_gap": gap,
        "c0_distance": distance,
        "gap_to_distance_ratio": gap / distance if distance > 0 else 0.0,
    }


def finite_resonance_audit(nf: NormalForm, r: RotationVector,
                           p: DiophParams) -> dict:
    """Check the ledger inequalities and whether resonant steps terminate.

    Per resonant step the removal defect must sit below both the scale
    threshold and |k|^-nu (windings are bounded by the scale); when the
    rotation vector is Diophantine relative to alpha the resonances must
    cease strictly before the observed horizon.  Inconsistencies are
    reported, not raised.
    """
    issues = []
    checks = []
    for entry in nf.ledger:
        knorm = max(abs(c) for c in entry.winding)
        ok_scale = knorm <= entry.scale
        ok_defect = entry.defect_before <= entry.threshold
        nu = -np.log(entry.threshold) / np.log(entry.scale) if entry.scale > 1 else float("inf")
        ok_knorm = entry.defect_before < float(knorm) ** -nu + 1e-15
        ok_after = entry.defect_after <= entry.threshold + 1e-12
        checks.append({
            "step": entry.step, "winding": list(entry.winding),
            "winding_within_scale": bool(ok_scale),
            "defect_below_threshold": bool(ok_defect),
            "defect_below_winding_power": bool(ok_knorm),
            "post_removal_defect_ok": bool(ok_after),
        })
        for name, ok in (("winding_within_scale", ok_scale),
                         ("defect_below_threshold", ok_defect),
                         ("defect_below_winding_power", ok_knorm),
                         ("post_removal_defect_ok", ok_after)):
            if not ok:
                issues.append("step %d: %s failed" % (entry.step, name))
    classification = classify_arithmetic(r, p)
    last_resonant = max((e.step for e in nf.ledger), default=None)
    ceased = last_resonant is None or last_resonant < nf.steps - 1 or nf.converged
    if classification.classification == CLASS_DIOPHANTINE and not ceased:
        issues.append("Diophantine class but resonances persist to the horizon")
    return {
        "ledger_checks": checks,
        "all_inequalities_hold": not any("failed" in s for s in issues),
        "classification": classification.to_dict(),
        "resonant_steps": nf.resonant_count,
        "last_resonant_step": last_resonant,
        "steps_observed": nf.steps,
        "resonances_ceased": bool(ceased),
        "issues": issues,
    }
