"""Command-line front end: attribution runs, toy and XOR sweeps, and
distribution-model fitting."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import plots
from .distributions import (
    DataMatrix,
    DiscreteJointModel,
    fit_gaussian,
    gaussian_to_dict,
    load_csv,
)
from .errors import ChainShapError, ConfigError, PredictorError
from .graph import CATEGORICAL, FeatureSpace, load_graph
from .predictors import ExternalPredictor, LinearModel, TableModel
from .report import (
    atomic_write_text,
    report_to_csv,
    report_to_json,
    sina_to_csv,
)
from .shapley import (
    EXACT_ENUMERATION_CAP,
    PermutationDistribution,
    PermutationMode,
    shapley_values,
)
from .oracles import (
    ToyParams,
    ToyStructure,
    XorSpec,
    XorStructure,
    toy_shapley,
    xor_shapley,
)
from .values import (
    DiscreteExactValueFunction,
    LinearExactValueFunction,
    MonteCarloValueFunction,
    SamplerConfig,
    Variant,
)

VARIANTS = tuple(v.value for v in Variant)
SYMMETRIES = ("symmetric", "asymmetric")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    data: str
    model: dict
    graph: str | None = None
    instances: tuple = (0,)
    variant: str = "causal"
    symmetry: str = "symmetric"
    n_samples: int = 1000
    n_permutations: int | None = None
    seed: int = 0
    exact: bool = False
    decompose: bool = False
    regularization: float | None = None
    timeout: float = 60.0
    output: str = "chainshap-out"
    format: str = "csv"
    plot: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(
                f"--variant must be one of {VARIANTS}, got {self.variant!r}"
            )
        if self.symmetry not in SYMMETRIES:
            raise ConfigError(
                f"--symmetry must be one of {SYMMETRIES}, got {self.symmetry!r}"
            )
        if self.format not in FORMATS:
            raise ConfigError(f"--format must be one of {FORMATS}, got {self.format!r}")
        if self.n_samples < 1:
            raise ConfigError("--n-samples must be >= 1")
        object.__setattr__(
            self, "instances", tuple(
                tuple(i) if isinstance(i, (list, tuple)) else i for i in self.instances
            )
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["instances"] = [
            list(i) if isinstance(i, tuple) else i for i in self.instances
        ]
        return out

    @classmethod
    def from_dict(cls, spec: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(spec) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "data" not in spec or "model" not in spec:
            raise ConfigError("config requires 'data' and 'model'")
        return cls(**spec)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            with open(path) as fh:
                spec = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}")
        return cls.from_dict(spec)


def _build_predictor(config: RunConfig, space: FeatureSpace):
    spec = config.model
    kind = spec.get("type")
    if kind == "linear":
        coeffs = tuple(float(c) for c in spec["coefficients"])
        if len(coeffs) != space.n:
            raise ConfigError(
                f"linear model has {len(coeffs)} coefficients for {space.n} features"
            )
        return LinearModel(float(spec.get("intercept", 0.0)), coeffs)
    if kind == "table":
        outputs = {}
        for key, y in spec["outputs"].items():
            cells = key.split(",")
            if len(cells) != space.n:
                raise ConfigError(f"table key {key!r} does not cover all features")
            combo = []
            for j, cell in enumerate(cells):
                levels = space.kinds[j].levels
                if levels is None:
                    raise ConfigError("table models require categorical features")
                match = [lv for lv in levels if str(lv) == cell]
                if not match:
                    raise ConfigError(f"table key {key!r}: unknown level {cell!r}")
                combo.append(match[0])
            outputs[tuple(combo)] = float(y)
        return TableModel(outputs)
    if kind == "external":
        command = spec.get("command")
        if not command:
            raise ConfigError("external model requires a 'command' list")
        return ExternalPredictor(command, timeout=float(spec.get("timeout", config.timeout)))
    raise ConfigError(f"unknown model type {kind!r} (expected linear, table, external)")


def _resolve_instances(config: RunConfig, data: DataMatrix) -> list[list]:
    space = data.feature_space
    out = []
    for entry in config.instances:
        if isinstance(entry, tuple):
            if len(entry) != space.n:
                raise ConfigError(
                    f"inline instance has {len(entry)} values for {space.n} features"
                )
            row = []
            for j, v in enumerate(entry):
                if space.kinds[j].kind == CATEGORICAL:
                    levels = space.kinds[j].levels
                    match = [lv for lv in levels if lv == v or str(lv) == str(v)]
                    if not match:
                        raise ConfigError(f"instance value {v!r} not a level of "
                                          f"{space.names[j]!r}")
                    row.append(match[0])
                else:
                    row.append(float(v))
            out.append(row)
        else:
            idx = int(entry)
            if not 0 <= idx < data.m:
                raise ConfigError(f"instance row {idx} outside data with {data.m} rows")
            out.append(list(data.rows[idx]))
    return out


def _permutation_distribution(config: RunConfig, graph, n: int) -> PermutationDistribution:
    asym = config.symmetry == "asymmetric"
    if config.n_permutations is None:
        if n > EXACT_ENUMERATION_CAP:
            raise ConfigError(
                f"{n} features exceed the exact enumeration cap "
                f"({EXACT_ENUMERATION_CAP}); pass --n-permutations for sampling"
            )
        mode = PermutationMode.EXACT_ASYMMETRIC if asym else PermutationMode.EXACT_UNIFORM
    else:
        mode = (
            PermutationMode.SAMPLED_ASYMMETRIC if asym else PermutationMode.SAMPLED_UNIFORM
        )
    return PermutationDistribution(
        mode, n_permutations=config.n_permutations, graph=graph, seed=config.seed
    )


def run_explain(config: RunConfig) -> list:
    """Fit, attribute each requested instance, and write report files.

    Returns the in-memory reports; files land under ``config.output``.
    """
    data = load_csv(config.data)
    space = data.feature_space
    graph = load_graph(config.graph) if config.graph else None
    if config.variant == "causal" and graph is None:
        raise ConfigError("the causal variant requires --graph")
    if config.symmetry == "asymmetric" and graph is None:
        raise ConfigError("asymmetric weighting requires --graph")
    all_categorical = not space.continuous_indices
    if all_categorical:
        dist_model = DiscreteJointModel.from_data(data)
    else:
        dist_model = fit_gaussian(data, config.regularization)
    predictor = _build_predictor(config, space)
    instances = _resolve_instances(config, data)
    perm_dist = _permutation_distribution(config, graph, space.n)
    sampler = SamplerConfig(n_samples=config.n_samples, seed=config.seed)

    reports = []
    try:
        for x in instances:
            if config.exact:
                if isinstance(predictor, LinearModel) and not all_categorical:
                    vf = LinearExactValueFunction(
                        config.variant, graph, dist_model, predictor, x
                    )
                elif all_categorical:
                    vf = DiscreteExactValueFunction(
                        config.variant, graph, dist_model, predictor, x
                    )
                else:
                    raise ConfigError(
                        "--exact needs an inline linear model over continuous "
                        "features or an all-categorical table setup"
                    )
            else:
                vf = MonteCarloValueFunction(
                    config.variant, graph, dist_model, predictor, x, sampler
                )
            reports.append(
                shapley_values(
                    perm_dist,
                    vf,
                    decompose=config.decompose,
                    n_samples=None if config.exact else config.n_samples,
                    seed=config.seed,
                )
            )
    finally:
        if isinstance(predictor, ExternalPredictor):
            predictor.close()

    outdir = Path(config.output)
    for k, report in enumerate(reports):
        if config.format == "csv":
            atomic_write_text(outdir / f"report_{k:03d}.csv", report_to_csv(report))
        else:
            atomic_write_text(outdir / f"report_{k:03d}.json", report_to_json(report))
    atomic_write_text(outdir / "sina.csv", sina_to_csv(reports))
    if config.plot:
        plots.render_sina(reports, outdir / "sina.png")
    return reports


# --- toy and xor sweeps -----------------------------------------------------

TOY_CELLS = (
    ("marginal", "symmetric"),
    ("conditional", "symmetric"),
    ("conditional", "asymmetric"),
    ("causal", "symmetric"),
    ("causal", "asymmetric"),
)


def run_toy(args) -> list[dict]:
    structures = (
        [ToyStructure(args.structure)] if args.structure != "all" else list(ToyStructure)
    )
    alphas = _sweep_values(args.alpha_sweep) if args.alpha_sweep else [args.alpha]
    rows = []
    for structure in structures:
        for alpha in alphas:
            params = ToyParams(
                alpha=alpha, beta1=args.beta1, beta2=args.beta2,
                x1=args.x1, x2=args.x2, xbar1=args.xbar1, xbar2=args.xbar2,
            )
            for variant, symmetry in TOY_CELLS:
                split = toy_shapley(structure, variant, symmetry, params)
                for i in (1, 2):
                    rows.append(
                        {
                            "structure": structure.value,
                            "variant": variant,
                            "symmetry": symmetry,
                            "alpha": alpha,
                            "feature": f"x{i}",
                            "direct": split[i].direct,
                            "indirect": split[i].indirect,
                            "total": split[i].total,
                        }
                    )
    outdir = Path(args.output)
    atomic_write_text(outdir / "toy.csv", _rows_to_csv(rows))
    if args.plot and len(alphas) > 1:
        for structure in structures:
            sub = [
                {**r, "case": f"{r['variant']}/{r['symmetry']}"}
                for r in rows
                if r["structure"] == structure.value and r["feature"] == "x1"
            ]
            plots.render_sweep(
                sub, "alpha", ["total"], "case",
                outdir / f"toy_{structure.value}_x1.png",
                "dependence strength", "attribution of x1",
            )
    return rows


XOR_CASES = (
    ("conditional", "symmetric"),
    ("causal", "symmetric"),
    ("causal", "asymmetric"),
    ("marginal", "symmetric"),
)


def run_xor(args) -> list[dict]:
    epsilons = (
        _sweep_values(args.epsilon_sweep) if args.epsilon_sweep else [args.epsilon]
    )
    instance = (args.x1, args.x2)
    rows = []
    for eps in epsilons:
        spec = XorSpec(eps, XorStructure(args.structure), instance)
        for variant, symmetry in XOR_CASES:
            phi1, phi2 = xor_shapley(spec, variant, symmetry)
            rows.append(
                {
                    "epsilon": eps,
                    "variant": variant,
                    "symmetry": symmetry,
                    "phi1": phi1,
                    "phi2": phi2,
                    "difference": phi1 - phi2,
                }
            )
    outdir = Path(args.output)
    atomic_write_text(outdir / "xor.csv", _rows_to_csv(rows))
    if args.plot and len(epsilons) > 1:
        labelled = [
            {**r, "case": f"{r['variant']}/{r['symmetry']}"} for r in rows
        ]
        plots.render_sweep(
            labelled, "epsilon", ["phi1", "phi2", "difference"], "case",
            outdir / "xor.png", "causal strength", "attribution",
        )
    return rows


def run_fit(args) -> None:
    data = load_csv(args.data)
    model = fit_gaussian(data, args.regularization)
    atomic_write_text(args.output, json.dumps(gaussian_to_dict(model), indent=2) + "\n")


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0])
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (row[k] for k in header)])
    return buf.getvalue()


def _sweep_values(spec: str) -> list[float]:
    try:
        start, stop, count = spec.split(":")
        return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
    except ValueError:
        raise ConfigError(f"sweep spec must be start:stop:count, got {spec!r}")


# --- argument parsing -------------------------------------------------------

def _add_explain_args(sub):
    sub.add_argument("--config", required=True, help="JSON run configuration")
    sub.add_argument("--variant", choices=VARIANTS)
    sub.add_argument("--symmetry", choices=SYMMETRIES)
    sub.add_argument("--n-samples", type=int, dest="n_samples")
    sub.add_argument("--n-permutations", type=int, dest="n_permutations")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--exact", action="store_true", default=None)
    sub.add_argument("--output")
    sub.add_argument("--format", choices=FORMATS)
    sub.add_argument("--no-plot", action="store_true")


def _config_from_args(args, force_decompose: bool) -> RunConfig:
    config = RunConfig.load(args.config)
    overrides = {}
    for key in ("variant", "symmetry", "n_samples", "n_permutations", "seed",
                "output", "format"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if args.exact:
        overrides["exact"] = True
    if args.no_plot:
        overrides["plot"] = False
    if force_decompose:
        overrides["decompose"] = True
    return replace(config, **overrides) if overrides else config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainshap",
        description="Causal Shapley value attributions over causal chain graphs.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    for name, blurb in (
        ("explain", "compute per-feature attributions for instances"),
        ("decompose", "attributions with direct/indirect effect columns"),
    ):
        sub = subs.add_parser(name, help=blurb)
        _add_explain_args(sub)

    fit = subs.add_parser("fit", help="fit and export the distribution model")
    fit.add_argument("--data", required=True)
    fit.add_argument("--regularization", type=float, default=None)
    fit.add_argument("--output", required=True)

    toy = subs.add_parser("toy", help="closed-form two-feature structure sweeps")
    toy.add_argument("--structure", default="all",
                     choices=["all"] + [s.value for s in ToyStructure])
    toy.add_argument("--alpha", type=float, default=0.8)
    toy.add_argument("--alpha-sweep", dest="alpha_sweep", default=None)
    toy.add_argument("--beta1", type=float, default=0.0)
    toy.add_argument("--beta2", type=float, default=2.0)
    toy.add_argument("--x1", type=float, default=1.0)
    toy.add_argument("--x2", type=float, default=1.5)
    toy.add_argument("--xbar1", type=float, default=0.0)
    toy.add_argument("--xbar2", type=float, default=0.0)
    toy.add_argument("--output", default="chainshap-out")
    toy.add_argument("--no-plot", dest="plot", action="store_false")

    xor = subs.add_parser("xor", help="theoretical XOR attribution sweeps")
    xor.add_argument("--structure", default="chain-12",
                     choices=[s.value for s in XorStructure])
    xor.add_argument("--epsilon", type=float, default=0.5)
    xor.add_argument("--epsilon-sweep", dest="epsilon_sweep", default="0:0.9:10")
    xor.add_argument("--x1", type=int, default=0, choices=(0, 1))
    xor.add_argument("--x2", type=int, default=0, choices=(0, 1))
    xor.add_argument("--output", default="chainshap-out")
    xor.add_argument("--no-plot", dest="plot", action="store_false")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("explain", "decompose"):
            config = _config_from_args(args, force_decompose=args.command == "decompose")
            run_explain(config)
        elif args.command == "fit":
            run_fit(args)
        elif args.command == "toy":
            run_toy(args)
        elif args.command == "xor":
            run_xor(args)
    except PredictorError as exc:
        print(f"error: predictor failure: {exc}", file=sys.stderr)
        return 3
    except ChainShapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
