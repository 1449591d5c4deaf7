"""Experiment harness: synthesize cocycles with known ground truth, run the
scheme, classify the rotation vector, and emit machine-readable reports.

Subcommands:
    synthesize   build a cocycle from a config and write it with its truth
    run          full pipeline: scheme + rotation analysis + report/CSV
    rho          rotation vector only, printed as JSON
    check-dioph  Diophantine witness scan for a frequency
    report-merge concatenate run reports into one document

Values given in a config file override the corresponding command-line flags.
Reports are deterministic: identical configs (including seeds) produce
byte-identical JSON.

Exit codes: 0 success, 1 ground-truth mismatch, 2 invalid config,
3 scheme failure, 4 rotation unresolved, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from .arithmetic import (
    FREQUENCY_PRESETS,
    DiophParams,
    Frequency,
    diophantine_witness,
)
from .cocycle import Cocycle, conjugate_raw, normalize
from .fourier import (
    AlgebraMap,
    ConjugationChain,
    ConstantFactor,
    ExpFactor,
    TorusMorphism,
    random_map,
    synthesize as synthesize_map,
)
from .kam import SchemeError, SchemeParams, run_scheme
from .rotation import (
    RotationVector,
    UnresolvedRotation,
    classify_arithmetic,
    equivalence_witness,
    finite_resonance_audit,
    rotation_vector,
)
from .su2 import GroupElement, alg_exp_quat, quat_mul

EXIT_OK = 0
EXIT_TRUTH_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_SCHEME = 3
EXIT_ROTATION = 4
EXIT_IO = 5


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Declarative description of one synthetic experiment."""

    frequency: dict = field(default_factory=lambda: {"preset": "golden"})
    theta: float = 0.17
    chain: list = field(default_factory=list)
    perturbation: dict | None = None
    scheme: dict = field(default_factory=dict)
    dioph: dict = field(default_factory=lambda: {"gamma": 3.0, "tau": 2.0, "horizon": 10000})
    seed: int = 0
    equivalence_horizon: int = 50
    equivalence_tolerance: float = 1e-6
    report_path: str | None = None
    csv_path: str | None = None

    def resolve_frequency(self) -> Frequency:
        spec = self.frequency
        if "preset" in spec:
            name = spec["preset"]
            if name not in FREQUENCY_PRESETS:
                raise ConfigError("unknown frequency preset %r" % name)
            return Frequency((FREQUENCY_PRESETS[name],))
        if "value" in spec:
            vals = spec["value"]
            if isinstance(vals, (int, float)):
                vals = [vals]
            return Frequency(tuple(float(v) for v in vals))
        raise ConfigError("frequency spec needs 'preset' or 'value'")

    def resolve_scheme(self) -> SchemeParams:
        known = {f for f in SchemeParams.__dataclass_fields__}
        extra = set(self.scheme) - known
        if extra:
            raise ConfigError("unknown scheme parameters: %s" % sorted(extra))
        base = {"nu": self.resolve_dioph().tau + 2.0}
        base.update(self.scheme)
        return SchemeParams(**base)

    def resolve_dioph(self) -> DiophParams:
        return DiophParams(float(self.dioph.get("gamma", 3.0)),
                           float(self.dioph.get("tau", 2.0)),
                           int(self.dioph.get("horizon", 10000)))

    def to_dict(self) -> dict:
        return {
            "frequency": self.frequency,
            "theta": self.theta,
            "chain": self.chain,
            "perturbation": self.perturbation,
            "scheme": self.scheme,
            "dioph": self.dioph,
            "seed": self.seed,
            "equivalence_horizon": self.equivalence_horizon,
            "equivalence_tolerance": self.equivalence_tolerance,
            "report_path": self.report_path,
            "csv_path": self.csv_path,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigError("unknown config fields: %s" % sorted(extra))
        return cls(**data)

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()


def build_chain(cfg: ExperimentConfig, alpha: Frequency, rng) -> ConjugationChain:
    """Conjugation chain from the factor recipe; RNG draws are consumed in
    recipe order so the seed pins every coefficient."""
    factors = []
    for spec in cfg.chain:
        kind = spec.get("kind")
        if kind == "torus":
            winding = spec["winding"]
            if isinstance(winding, int):
                winding = [winding]
            if len(winding) != alpha.dimension:
                raise ConfigError("winding dimension mismatch")
            frame = GroupElement(np.asarray(spec["frame"])) if "frame" in spec \
                else GroupElement.identity()
            factors.append(TorusMorphism(tuple(winding), frame))
        elif kind == "exp":
            band = int(spec.get("band", 2))
            amplitude = float(spec.get("amplitude", 1e-3))
            factors.append(ExpFactor(random_map(alpha.dimension, band, amplitude, rng)))
        elif kind == "constant":
            factors.append(ConstantFactor(GroupElement(np.asarray(spec["element"]))))
        else:
            raise ConfigError("unknown chain factor kind %r" % kind)
    return ConjugationChain(tuple(factors), alpha.dimension)


def synthesize_cocycle(cfg: ExperimentConfig):
    """Build Phi = Conj_H (alpha, exp(theta e)) with H from the recipe, plus
    an optional seeded multiplicative perturbation.  Returns the cocycle and
    its ground-truth rotation class."""
    alpha = cfg.resolve_frequency()
    rng = np.random.default_rng(cfg.seed)
    chain = build_chain(cfg, alpha, rng)
    base = Cocycle(alpha, GroupElement(np.asarray(
        [np.cos(np.pi * cfg.theta), np.sin(np.pi * cfg.theta), 0.0, 0.0])),
        AlgebraMap.zeros(alpha.dimension, 0))

    content = chain.content_bound()
    pert_band = int(cfg.perturbation.get("band", 4)) if cfg.perturbation else 0
    band = max(cfg.resolve_scheme().n0, 2 * content + pert_band + 8)
    m = 4 * band + 4

    samples = conjugate_raw(chain, base, m)
    if cfg.perturbation:
        amplitude = float(cfg.perturbation.get("amplitude", 1e-4))
        pert = random_map(alpha.dimension, pert_band, amplitude, rng)
        samples = quat_mul(samples, alg_exp_quat(synthesize_map(pert, m)))
    try:
        phi = normalize(samples, alpha, band)
    except Exception as exc:
        raise ConfigError("recipe produced a non-normalizable cocycle: %s" % exc) from exc

    winding_total = np.zeros(alpha.dimension, dtype=int)
    for f in chain.factors:
        if isinstance(f, TorusMorphism):
            winding_total += np.asarray(f.winding, dtype=int)
    truth = {
        "theta": cfg.theta,
        "winding_total": winding_total.tolist(),
        "class_representative": cfg.theta + alpha.dot(winding_total),
    }
    return phi, truth


def run_experiment(cfg: ExperimentConfig):
    """Full pipeline; returns (report dict, exit code)."""
    alpha = cfg.resolve_frequency()
    dioph = cfg.resolve_dioph()
    params = cfg.resolve_scheme()

    report = {"config": cfg.to_dict(), "config_sha256": cfg.digest(),
              "horizons": {"dioph": dioph.horizon,
                           "equivalence": cfg.equivalence_horizon},
              "thresholds": {"nu": params.nu,
                             "stop_tolerance": params.stop_tolerance}}

    witness = diophantine_witness(alpha, dioph)
    if witness is not None:
        report["frequency_warning"] = (
            "frequency fails its Diophantine check at the declared constants "
            "(winding %r, defect %.3g): out of theorem hypotheses" %
            (list(witness.k), witness.defect))
        warnings.warn(report["frequency_warning"])

    phi, truth = synthesize_cocycle(cfg)
    report["ground_truth"] = truth
    report["cocycle"] = phi.to_dict()

    nf = run_scheme(phi, params, dioph=dioph if witness is None else None)
    report["normal_form"] = nf.to_dict()

    code = EXIT_OK
    try:
        rho = rotation_vector(nf)
    except UnresolvedRotation as exc:
        report["rotation"] = {"error": str(exc)}
        return report, EXIT_ROTATION
    report["rotation"] = rho.to_dict()
    classification = classify_arithmetic(rho, dioph)
    report["classification"] = classification.to_dict()
    report["audit"] = finite_resonance_audit(nf, rho, dioph)

    truth_vector = RotationVector(truth["class_representative"], alpha,
                                  {"source": "ground-truth"})
    match = equivalence_witness(rho, truth_vector, cfg.equivalence_horizon,
                                tol=cfg.equivalence_tolerance)
    report["truth_comparison"] = {
        "equivalent": match is not None,
        "witness": match,
    }
    if match is None:
        code = EXIT_TRUTH_MISMATCH

    if cfg.csv_path:
        nf.write_csv(cfg.csv_path)
    if cfg.report_path:
        with open(cfg.report_path, "w") as fh:
            _dump_report(report, fh)
    return report, code


def _dump_report(report: dict, fh) -> None:
    json.dump(report, fh, sort_keys=True, indent=1)
    fh.write("\n")


def _load_config(args) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
    cfg = ExperimentConfig()
    # flags first, then the config file on top (file wins)
    for name in ("theta", "seed"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "frequency", None):
        cfg.frequency = _frequency_flag(args.frequency)
    if getattr(args, "n0", None):
        cfg.scheme["n0"] = args.n0
    if getattr(args, "max_steps", None):
        cfg.scheme["max_steps"] = args.max_steps
    if getattr(args, "report", None):
        cfg.report_path = args.report
    if getattr(args, "csv", None):
        cfg.csv_path = args.csv
    merged = cfg.to_dict()
    merged.update(data)
    return ExperimentConfig.from_dict(merged)


def _frequency_flag(text: str) -> dict:
    if text in FREQUENCY_PRESETS:
        return {"preset": text}
    try:
        vals = [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ConfigError("cannot parse frequency %r" % text) from exc
    return {"value": vals}


def _add_common(p) -> None:
    p.add_argument("--config", help="JSON config file (overrides flags)")
    p.add_argument("--frequency", help="preset name or comma-separated components")
    p.add_argument("--theta", type=float, help="constant torus angle")
    p.add_argument("--seed", type=int, help="RNG seed")
    p.add_argument("--n0", type=int, help="initial scale")
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--report", help="report JSON output path")
    p.add_argument("--csv", help="diagnostics CSV output path")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="su2kam", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_syn = sub.add_parser("synthesize", help="build a cocycle with known truth")
    _add_common(p_syn)
    p_syn.add_argument("--output", help="cocycle JSON output path")

    p_run = sub.add_parser("run", help="synthesize, run the scheme, report")
    _add_common(p_run)

    p_rho = sub.add_parser("rho", help="rotation vector only")
    _add_common(p_rho)

    p_chk = sub.add_parser("check-dioph", help="Diophantine witness scan")
    p_chk.add_argument("--frequency", required=True)
    p_chk.add_argument("--gamma", type=float, default=3.0)
    p_chk.add_argument("--tau", type=float, default=2.0)
    p_chk.add_argument("--horizon", type=int, default=10000)

    p_mrg = sub.add_parser("report-merge", help="merge run reports")
    p_mrg.add_argument("inputs", nargs="+")
    p_mrg.add_argument("--output", required=True)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, ValueError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except SchemeError as exc:
        print("scheme error: %s" % exc, file=sys.stderr)
        return EXIT_SCHEME
    except UnresolvedRotation as exc:
        print("rotation error: %s" % exc, file=sys.stderr)
        return EXIT_ROTATION
    except OSError as exc:
        print("io error: %s" % exc, file=sys.stderr)
        return EXIT_IO


def _dispatch(args) -> int:
    if args.command == "synthesize":
        cfg = _load_config(args)
        phi, truth = synthesize_cocycle(cfg)
        doc = {"config_sha256": cfg.digest(), "cocycle": phi.to_dict(),
               "ground_truth": truth}
        if args.output:
            with open(args.output, "w") as fh:
                _dump_report(doc, fh)
        else:
            _dump_report(doc, sys.stdout)
        return EXIT_OK

    if args.command == "run":
        cfg = _load_config(args)
        report, code = run_experiment(cfg)
        if not cfg.report_path:
            _dump_report(report, sys.stdout)
        return code

    if args.command == "rho":
        cfg = _load_config(args)
        phi, _truth = synthesize_cocycle(cfg)
        nf = run_scheme(phi, cfg.resolve_scheme())
        rho = rotation_vector(nf)
        doc = {"config_sha256": cfg.digest(), "rotation": rho.to_dict()}
        if getattr(args, "report", None):
            with open(args.report, "w") as fh:
                _dump_report(doc, fh)
        else:
            _dump_report(doc, sys.stdout)
        return EXIT_OK

    if args.command == "check-dioph":
        freq_spec = _frequency_flag(args.frequency)
        cfg = ExperimentConfig(frequency=freq_spec)
        alpha = cfg.resolve_frequency()
        p = DiophParams(args.gamma, args.tau, args.horizon)
        witness = diophantine_witness(alpha, p)
        doc = {
            "alpha": list(alpha.components),
            "gamma": p.gamma, "tau": p.tau, "horizon": p.horizon,
            "diophantine_at_horizon": witness is None,
            "witness": None if witness is None else {
                "k": list(witness.k), "defect": witness.defect,
                "threshold": witness.threshold,
                "near_rational": witness.near_rational,
            },
        }
        _dump_report(doc, sys.stdout)
        return EXIT_OK

    if args.command == "report-merge":
        reports = []
        for path in args.inputs:
            with open(path) as fh:
                reports.append(json.load(fh))
        with open(args.output, "w") as fh:
            _dump_report({"reports": reports}, fh)
        return EXIT_OK

    raise ConfigError("unknown command %r" % args.command)


if __name__ == "__main__":
    sys.exit(main())
