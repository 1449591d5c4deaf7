"""Iterative almost-reducibility scheme for perturbed constant cocycles.

Each step removes a detected resonance of the constant by a torus-morphism
conjugation, solves the linearised (homological) equation below a
small-divisor threshold, conjugates the cocycle exactly on a grid by the
resulting close-to-identity factor, and renormalises back to constant-times-
exponential form with the constant kept on the fixed maximal torus.  The
ledger of resonant steps, the accumulated conjugation chain and per-step
diagnostics form the normal form returned to the caller.

Scales grow like N -> N^(1+sigma); a mode is solved only when its denominator
modulus is at least N^-nu, everything else is routed to the remainder and
reabsorbed by the exact nonlinear update.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .arithmetic import (
    DiophParams,
    Frequency,
    ResonanceRecord,
    dist_to_Z,
    relative_defect_minimum,
    relative_resonance,
)
from .cocycle import Cocycle, conjugate_raw
from .fourier import (
    AlgebraMap,
    ConjugationChain,
    ConstantFactor,
    ExpFactor,
    TorusMorphism,
    analyze,
    chain_sobolev_partial,
    mode_norm_grid,
    sobolev_norm,
    synthesize,
    translate,
)
from .su2 import (
    CutLocusError,
    GroupElement,
    TorusElement,
    alg_exp_quat,
    alg_log_quat,
    diagonalize,
    quat_angle,
    quat_conj,
    quat_mul,
    quat_normalize,
    quat_rotation_matrix,
    root_value,
    torus_quat,
    weyl_element,
)

ALGEBRA_DIMENSION = 3  # d' for the negative-regularity diagnostic


class SchemeError(RuntimeError):
    pass


class DivergenceError(SchemeError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class CorruptStateError(SchemeError):
    pass


@dataclass(frozen=True)
class SchemeParams:
    """Knobs of the scheme; nu must exceed the tau of the base frequency."""

    n0: int = 8
    sigma: float = 0.3
    nu: float = 4.0
    max_steps: int = 20
    stop_tolerance: float = 1e-12
    safety_exponent: float = 2.0
    initial_bound: float = 1e-2
    grid_factor: int = 4
    max_scale: int = 10**6

    def __post_init__(self):
        if not (0.0 < self.sigma < 1.0):
            raise ValueError("sigma must lie in (0, 1)")
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.n0 < 1:
            raise ValueError("initial scale must be positive")

    @classmethod
    def for_dioph(cls, p: DiophParams, **overrides) -> "SchemeParams":
        overrides.setdefault("nu", p.tau + 2.0)
        return cls(**overrides)

    def to_dict(self) -> dict:
        return {
            "n0": self.n0, "sigma": self.sigma, "nu": self.nu,
            "max_steps": self.max_steps, "stop_tolerance": self.stop_tolerance,
            "safety_exponent": self.safety_exponent,
            "initial_bound": self.initial_bound,
            "grid_factor": self.grid_factor, "max_scale": self.max_scale,
        }


@dataclass(frozen=True)
class ResonantStep:
    """Ledger entry for one resonance removal."""

    step: int
    winding: tuple
    scale: int
    threshold: float
    defect_before: float
    defect_after: float
    lambda_theta: float           # torus coordinate of the resonant constant
    frame: GroupElement

    def to_dict(self) -> dict:
        return {
            "step": self.step, "winding": list(self.winding),
            "scale": self.scale, "threshold": self.threshold,
            "defect_before": self.defect_before,
            "defect_after": self.defect_after,
            "lambda_theta": self.lambda_theta,
            "frame": self.frame.q.tolist(),
        }


@dataclass(frozen=True)
class StepDiagnostics:
    step: int
    scale: int
    resonant: bool
    winding: tuple | None
    norm_f_h0: float
    norm_f_h1: float
    norm_f_neg: float
    norm_y_h0: float
    norm_y_h1: float
    theta: float
    accumulator: float
    chain_length: int

    def to_dict(self) -> dict:
        d = self.__dict__.copy()
        d["winding"] = list(self.winding) if self.winding is not None else None
        return d


@dataclass(frozen=True)
class SchemeState:
    """Normal form in progress; kam_step maps state to state."""

    alpha: Frequency
    theta: float
    perturbation: AlgebraMap
    scale: int
    step: int = 0
    chain: ConjugationChain = None
    ledger: tuple = ()
    diagnostics: tuple = ()
    sum_k_alpha: float = 0.0

    def __post_init__(self):
        if self.chain is None:
            object.__setattr__(self, "chain",
                               ConjugationChain((), self.alpha.dimension))

    @property
    def accumulator(self) -> float:
        """Torus coordinate pulled back through all removal shifts."""
        return self.theta + self.sum_k_alpha

    @property
    def constant(self) -> GroupElement:
        return GroupElement(torus_quat(self.theta))

    def cocycle(self) -> Cocycle:
        return Cocycle(self.alpha, self.constant, self.perturbation)


@dataclass(frozen=True)
class NormalForm:
    """Output of the scheme: ledger, constants, chain and diagnostics."""

    alpha: Frequency
    params: SchemeParams
    source: Cocycle
    ledger: tuple
    final_theta: float
    final_map: AlgebraMap
    chain: ConjugationChain
    diagnostics: tuple
    converged: bool
    steps: int
    sum_k_alpha: float

    @property
    def resonant_count(self) -> int:
        return len(self.ledger)

    @property
    def constants(self) -> list:
        """Torus coordinates of the constants, one per recorded step."""
        return [row.theta for row in self.diagnostics]

    @property
    def final_cocycle(self) -> Cocycle:
        return Cocycle(self.alpha, GroupElement(torus_quat(self.final_theta)), self.final_map)

    def replay_error(self, m: int = None) -> float:
        """sup distance between the chain applied to the source cocycle and
        the recorded final cocycle; the normal-form consistency invariant."""
        if m is None:
            m = 4 * self.final_map.band + 4
        replayed = conjugate_raw(self.chain, self.source, m)
        recorded = self.final_cocycle.fiber_grid(m)
        return float(np.max(quat_angle(quat_mul(replayed, quat_conj(recorded)))))

    def chain_prefix_norms(self, s: float = None, max_grid: int = 1 << 16):
        """H^s norms of the chain prefixes in application order, aligned so
        that entry i is the full chain as it stood when i factors existed."""
        if s is None:
            s = -(self.alpha.dimension + ALGEBRA_DIMENSION)
        if len(self.chain) == 0:
            return []
        m = 2 * self.chain.content_bound() + 8
        m += m % 2
        if m > max_grid:
            return [float("nan")] * len(self.chain)
        return chain_sobolev_partial(self.chain, s, m)

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha.components),
            "params": self.params.to_dict(),
            "converged": self.converged,
            "steps": self.steps,
            "constants": self.constants,
            "final_theta": self.final_theta,
            "sum_k_alpha": self.sum_k_alpha,
            "resonant_count": self.resonant_count,
            "ledger": [r.to_dict() for r in self.ledger],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "final_residual_h0": sobolev_norm(self.final_map, 0.0),
            "chain": self.chain.to_dict(),
        }

    def write_csv(self, stream) -> None:
        """Per-step diagnostics with fixed column order:
        n,N,resonant,k,F_H0,F_H1,Hprefix_Hneg
        """
        close = False
        if isinstance(stream, (str, bytes)):
            stream = open(stream, "w")
            close = True
        try:
            prefix_norms = self.chain_prefix_norms()
            stream.write("n,N,resonant,k,F_H0,F_H1,Hprefix_Hneg\n")
            for row in self.diagnostics:
                kcol = "" if row.winding is None else ";".join(str(c) for c in row.winding)
                if row.chain_length == 0:
                    hnorm = 1.0
                else:
                    hnorm = prefix_norms[row.chain_length - 1]
                stream.write("%d,%d,%d,%s,%.17g,%.17g,%.17g\n" % (
                    row.step, row.scale, int(row.resonant), kcol,
                    row.norm_f_h0, row.norm_f_h1, hnorm))
        finally:
            if close:
                stream.close()


# ---------------------------------------------------------------------------
# homological solve


def _theta_of(a) -> float:
    if isinstance(a, TorusElement):
        return root_value(a)
    return float(a)


def solve_homological(a, f: AlgebraMap, alpha: Frequency, n: int, nu: float):
    """Solve Y(x+alpha) - Ad(A).Y(x) = F(x) - obstruction, mode by mode.

    A = exp(theta e).  Torus-component denominators are e(k.alpha) - 1 with
    the k = 0 coefficient returned as the constant obstruction; the complex
    off-torus field w = c_x + i c_y has denominators e(k.alpha) - e(theta)
    (its conjugate sees the other root, e(k.alpha) - e(-theta)).  A mode is
    solved only when |k| <= n and its denominator modulus is at least n^-nu;
    everything else lands in the remainder.

    Returns (y, constant_update, remainder) with f == L(y) + obstruction +
    remainder exactly in coefficients.
    """
    theta = _theta_of(a)
    if n < 1:
        raise ValueError("scale must be positive")
    if not nu > 0:
        raise ValueError("nu must be positive")
    thr = float(n) ** -nu
    d, band = f.dimension, f.band
    kalpha = np.zeros((2 * band + 1,) * d)
    for axis in range(d):
        ka = np.arange(-band, band + 1) * alpha.components[axis]
        shape = [1] * d
        shape[axis] = 2 * band + 1
        kalpha = kalpha + ka.reshape(shape)
    unit = np.exp(2j * np.pi * kalpha)
    e_den = unit - 1.0
    w_den = unit - np.exp(2j * np.pi * theta)

    maxnorm = mode_norm_grid(d, band, "max")
    in_box = maxnorm <= n
    is_zero = maxnorm == 0

    e_keep = in_box & ~is_zero & (np.abs(e_den) >= thr)
    w_keep = in_box & (np.abs(w_den) >= thr)
    if np.any(np.abs(e_den[e_keep]) < 1e-13) or np.any(np.abs(w_den[w_keep]) < 1e-13):
        raise SchemeError("denominator underflow on a retained mode (missed resonance?)")

    fe = f.e_field()
    fw = f.w_field()

    ye = np.zeros_like(fe)
    np.divide(fe, e_den, out=ye, where=e_keep)
    yw = np.zeros_like(fw)
    np.divide(fw, w_den, out=yw, where=w_keep)

    re = np.where(e_keep | is_zero, 0.0, fe)
    rw = np.where(w_keep, 0.0, fw)

    obstruction = np.array([float(np.real(fe[(band,) * d])), 0.0, 0.0])

    y = AlgebraMap.from_fields(d, band, ye, yw)
    remainder = AlgebraMap.from_fields(d, band, re, rw)
    return y, obstruction, remainder


def detect_resonance(a, alpha: Frequency, n: int, nu: float):
    """Resonance of the constant's root at scale n.

    The scan over all signed windings covers both roots +-theta: a record for
    the root -theta at winding k coincides with one for theta at -k.
    """
    return relative_resonance(_theta_of(a), alpha, n, nu)


def remove_resonance(state: SchemeState, record: ResonanceRecord) -> SchemeState:
    """Conjugate by a torus morphism of winding -k: theta -> theta - k.alpha,
    j-component spectrum shifts by -k, ledger and chain are extended."""
    k = record.k
    kalpha = state.alpha.dot(k)
    shifted = state.theta - kalpha
    delta = shifted - np.rint(shifted)
    lam = state.theta - delta       # resonant constant on the same torus

    f = state.perturbation
    d, band = f.dimension, f.band
    grow = max(abs(c) for c in k)
    nb = band + grow
    e_new = np.zeros((2 * nb + 1,) * d, dtype=complex)
    w_new = np.zeros((2 * nb + 1,) * d, dtype=complex)
    center = tuple(slice(nb - band, nb + band + 1) for _ in range(d))
    e_new[center] = f.e_field()
    target = tuple(slice(nb - band - kc, nb + band + 1 - kc) for kc in k)
    w_new[target] = f.w_field()
    f_new = AlgebraMap.from_fields(d, nb, e_new, w_new)

    defect_after = float(dist_to_Z(shifted))
    if defect_after > record.threshold + 1e-12:
        raise CorruptStateError("removal left defect %.3g above threshold %.3g"
                                % (defect_after, record.threshold))

    entry = ResonantStep(
        step=state.step, winding=k, scale=record.scale,
        threshold=record.threshold, defect_before=record.defect,
        defect_after=defect_after, lambda_theta=lam,
        frame=GroupElement.identity(),
    )
    morphism = TorusMorphism(tuple(-c for c in k))
    new_state = replace(
        state,
        theta=shifted,
        perturbation=f_new,
        chain=state.chain.prepended(morphism),
        ledger=state.ledger + (entry,),
        sum_k_alpha=state.sum_k_alpha + kalpha,
    )
    again = relative_defect_minimum(new_state.theta, state.alpha, record.scale)
    if again.defect <= record.threshold:
        raise CorruptStateError("constant still resonant after removal (winding %r)"
                                % (again.k,))
    return new_state


def _select_branch(theta_prev: float, theta_raw: float):
    """Pick the representative of {+-theta_raw + 2Z} nearest to theta_prev;
    returns (theta, weyl_flipped)."""
    best = None
    for sign in (1.0, -1.0):
        m = np.rint((theta_prev - sign * theta_raw) / 2.0)
        cand = sign * theta_raw + 2.0 * m
        key = abs(cand - theta_prev)
        if best is None or key < best[0]:
            best = (key, cand, sign < 0)
    return best[1], best[2]


def kam_step(state: SchemeState, params: SchemeParams) -> SchemeState:
    """One scheme step: resonance handling, homological solve, exact grid
    conjugation by exp(Y), renormalisation, scale growth."""
    norm_f0 = sobolev_norm(state.perturbation, 0.0)
    safety = float(state.scale) ** -params.safety_exponent
    if norm_f0 > safety:
        raise SchemeError("perturbation %.3g above the step safety bound %.3g"
                          % (norm_f0, safety))

    diag_norm_h0 = norm_f0
    diag_norm_h1 = sobolev_norm(state.perturbation, 1.0)
    diag_norm_neg = sobolev_norm(state.perturbation,
                                 -(state.alpha.dimension + ALGEBRA_DIMENSION))

    record = detect_resonance(state.theta, state.alpha, state.scale, params.nu)
    if record is not None:
        state = remove_resonance(state, record)

    w, _obstruction, _remainder = solve_homological(
        state.theta, state.perturbation, state.alpha, state.scale, params.nu)
    rot = quat_rotation_matrix(torus_quat(state.theta))
    y = (-1.0) * w.rotated(rot)

    n_next = max(state.scale + 1, int(round(float(state.scale) ** (1.0 + params.sigma))))
    if n_next > params.max_scale:
        raise SchemeError("scale %d exceeds max_scale without convergence" % n_next)
    solve_box = min(state.scale, state.perturbation.band)
    band_next = max(n_next, state.perturbation.band + 2 * solve_box)
    m = params.grid_factor * band_next + 4
    m += m % 2

    y_here = alg_exp_quat(synthesize(y, m))
    y_ahead = alg_exp_quat(synthesize(translate(y, state.alpha), m))
    fiber = quat_mul(torus_quat(state.theta),
                     alg_exp_quat(synthesize(state.perturbation, m)))
    conjugated = quat_mul(y_ahead, quat_mul(fiber, quat_conj(y_here)))

    mean = quat_normalize(np.mean(conjugated.reshape(-1, 4), axis=0))
    p_frame, theta_raw = diagonalize(GroupElement(mean))
    theta_next, flipped = _select_branch(state.theta, theta_raw)
    if flipped:
        p_frame = weyl_element() * p_frame
    straightened = quat_mul(p_frame.q, quat_mul(conjugated, quat_conj(p_frame.q)))
    try:
        logs = alg_log_quat(quat_mul(quat_conj(torus_quat(theta_next)), straightened))
    except CutLocusError as exc:
        raise DivergenceError(
            "conjugated fiber left the perturbative neighborhood at step %d: %s"
            % (state.step, exc), state=state) from exc
    f_next = analyze(logs, band_next)
    resynth = float(np.max(np.abs(synthesize(f_next, m) - logs)))
    if resynth > 1e-10:
        raise SchemeError("band %d failed to resolve the conjugated fiber (error %.3g)"
                          % (band_next, resynth))

    norm_f1 = sobolev_norm(f_next, 0.0)
    chain = state.chain
    if np.any(y.coeffs != 0):
        chain = chain.prepended(ExpFactor(y))
    if not np.array_equal(p_frame.q, np.array([1.0, 0.0, 0.0, 0.0])):
        chain = chain.prepended(ConstantFactor(p_frame))

    row = StepDiagnostics(
        step=state.step, scale=state.scale,
        resonant=record is not None,
        winding=record.k if record is not None else None,
        norm_f_h0=diag_norm_h0, norm_f_h1=diag_norm_h1, norm_f_neg=diag_norm_neg,
        norm_y_h0=sobolev_norm(y, 0.0), norm_y_h1=sobolev_norm(y, 1.0),
        theta=state.theta, accumulator=state.accumulator,
        chain_length=len(chain),
    )

    new_state = replace(
        state,
        theta=theta_next,
        perturbation=f_next,
        scale=n_next,
        step=state.step + 1,
        chain=chain,
        diagnostics=state.diagnostics + (row,),
    )
    if norm_f1 > diag_norm_h0 and norm_f1 > params.stop_tolerance:
        raise DivergenceError(
            "perturbation grew from %.3g to %.3g at step %d"
            % (diag_norm_h0, norm_f1, state.step), state=new_state)
    return new_state


def initial_state(phi: Cocycle, params: SchemeParams) -> SchemeState:
    """Diagonalise the constant part and set up an empty normal form."""
    p_frame, theta = diagonalize(phi.constant)
    perturbation = phi.perturbation.rotated(quat_rotation_matrix(p_frame.q))
    chain = ConjugationChain((), phi.dimension)
    if not np.array_equal(p_frame.q, np.array([1.0, 0.0, 0.0, 0.0])):
        chain = chain.prepended(ConstantFactor(p_frame))
    return SchemeState(
        alpha=phi.alpha, theta=theta, perturbation=perturbation,
        scale=params.n0, chain=chain,
    )


def run_scheme(phi: Cocycle, params: SchemeParams = None,
               dioph: DiophParams = None) -> NormalForm:
    """Iterate kam_step until the perturbation falls below stop_tolerance or
    max_steps is exhausted; returns the full normal form."""
    if params is None:
        params = SchemeParams.for_dioph(dioph) if dioph is not None else SchemeParams()
    if dioph is not None and not params.nu > dioph.tau:
        raise ValueError("nu must exceed the declared tau")
    state = initial_state(phi, params)
    if sobolev_norm(state.perturbation, 0.0) > params.initial_bound:
        raise SchemeError("initial perturbation outside the perturbative regime")
    while state.step < params.max_steps:
        if sobolev_norm(state.perturbation, 0.0) <= params.stop_tolerance:
            break
        state = kam_step(state, params)
    final_norm = sobolev_norm(state.perturbation, 0.0)
    final_row = StepDiagnostics(
        step=state.step, scale=state.scale, resonant=False, winding=None,
        norm_f_h0=final_norm,
        norm_f_h1=sobolev_norm(state.perturbation, 1.0),
        norm_f_neg=sobolev_norm(state.perturbation,
                                -(state.alpha.dimension + ALGEBRA_DIMENSION)),
        norm_y_h0=0.0, norm_y_h1=0.0,
        theta=state.theta, accumulator=state.accumulator,
        chain_length=len(state.chain),
    )
    return NormalForm(
        alpha=state.alpha, params=params, source=phi,
        ledger=state.ledger, final_theta=state.theta,
        final_map=state.perturbation, chain=state.chain,
        diagnostics=state.diagnostics + (final_row,),
        converged=final_norm <= params.stop_tolerance,
        steps=state.step, sum_k_alpha=state.sum_k_alpha,
    )
