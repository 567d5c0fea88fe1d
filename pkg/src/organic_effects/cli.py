"""Command-line front end.

Subcommands::

    simulate  --spec s.json --n N --seed S --out d.csv
    estimate  --data d.csv [--estimator parametric|discrete|both] [--bootstrap B ...]
    identify  --data d.csv [--bins ...] [--smooth ALPHA] [--bootstrap B ...]
    oracle    --spec s.json --n N --seed S
    bootstrap --data d.csv --bootstrap B [--estimator ...]

Failures print ``error: <ErrorType>: <message>`` on stderr and exit with
the error type's code (see :mod:`organic_effects.errors`).
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass

from .bootstrap import bootstrap_effects
from .discrete import identify_effects
from .errors import OrganicError
from .io import bin_dataset, dumps_json, load_spec, parse_bins, read_csv, write_csv
from .model import ESTIMANDS, default_features, feature_label, parse_features
from .parametric import estimate_effects
from .scm import closed_form_effects, oracle_effects, simulate_observed

EXIT_USAGE = 2
EXIT_IO = 12


@dataclass(frozen=True)
class RunConfig:
    command: str
    data: str | None = None
    spec: str | None = None
    n: int | None = None
    seed: int = 0
    out: str | None = None
    features: str | None = None
    estimator: str = "parametric"
    bootstrap: int | None = None
    alpha: float = 0.05
    jobs: int = 1
    bins: tuple = ()
    smooth: float = 0.0
    fmt: str = "json"
    strict: bool = False
    shift_mode: str = "joint"

    def __post_init__(self):
        if (self.data is None) == (self.spec is None):
            raise ValueError("exactly one of --data or --spec is required")
        if self.bootstrap is not None and self.bootstrap < 2:
            raise ValueError("--bootstrap needs at least 2 replicates")
        if not 0 < self.alpha < 1:
            raise ValueError("--alpha must lie in (0, 1)")
        if self.smooth < 0:
            raise ValueError("--smooth must be nonnegative")
        if self.n is not None and self.n < 1:
            raise ValueError("--n must be positive")

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            command=args.command,
            data=getattr(args, "data", None),
            spec=getattr(args, "spec", None),
            n=getattr(args, "n", None),
            seed=args.seed,
            out=args.out,
            features=getattr(args, "features", None),
            estimator=getattr(args, "estimator", "parametric"),
            bootstrap=getattr(args, "bootstrap", None),
            alpha=getattr(args, "alpha", 0.05),
            jobs=getattr(args, "jobs", 1),
            bins=tuple(getattr(args, "bins", None) or ()),
            smooth=getattr(args, "smooth", 0.0),
            fmt=args.format,
            strict=getattr(args, "strict", False),
            shift_mode=getattr(args, "shift_mode", "joint"),
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="organic-effects",
        description="Organic direct and indirect effects with post-treatment confounders.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "table"), default="json")

    def inference(p, estimators):
        p.add_argument("--data", required=True, help="CSV with columns a, c1.., l1.., m, y")
        p.add_argument("--estimator", choices=estimators, default=estimators[0])
        p.add_argument("--features", help="outcome model features, e.g. '1,m,l1,m*l1'")
        p.add_argument("--bootstrap", type=int, metavar="B", help="bootstrap replicates")
        p.add_argument("--alpha", type=float, default=0.05)
        p.add_argument("--jobs", type=int, default=1, help="bootstrap worker threads")
        p.add_argument("--bins", action="append",
                       help="equal-width bins before the discrete engine: N or col=N[,col=N]")
        p.add_argument("--smooth", type=float, default=0.0, help="pseudo-count for frequency tables")
        p.add_argument("--strict", action="store_true", help="rank-deficient designs are errors")
        p.add_argument("--shift-mode", choices=("joint", "stratified"), default="joint")
        common(p)

    p = sub.add_parser("simulate", help="simulate observed data from a structural model")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    common(p)

    p = sub.add_parser("oracle", help="counterfactual ground truth for a structural model")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    common(p)

    inference(sub.add_parser("estimate", help="parametric plug-in estimate"),
              ("parametric", "discrete", "both"))
    inference(sub.add_parser("identify", help="exact discrete identification"), ("discrete",))
    inference(sub.add_parser("bootstrap", help="bootstrap standard errors and intervals"),
              ("parametric", "discrete", "both"))
    return parser


def _emit(config: RunConfig, payload: dict, table: str):
    text = dumps_json(payload) if config.fmt == "json" else table
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(payload: dict) -> str:
    lines = []
    boot = payload.get("bootstrap")
    se = payload.get("se") or (boot or {}).get("se")
    header = f"{'estimand':<18}{'estimate':>14}"
    if se:
        header += f"{'se':>12}"
    if boot:
        header += f"{'ci_lower':>14}{'ci_upper':>14}"
    lines.append(header)
    for name in ESTIMANDS:
        row = f"{name:<18}{payload[name]:>14.6g}"
        if se:
            row += f"{se[name]:>12.4g}"
        if boot:
            row += f"{boot['ci_lower'][name]:>14.6g}{boot['ci_upper'][name]:>14.6g}"
        lines.append(row)
    for key, value in payload.items():
        if key not in ESTIMANDS and not isinstance(value, dict):
            lines.append(f"{key}: {value}")
    for key in ("discrete", "closed_form"):
        if key in payload:
            lines.append(f"[{key}]")
            lines.extend(f"  {name}: {v:.6g}" if isinstance(v, float) else f"  {name}: {v}"
                         for name, v in payload[key].items() if not isinstance(v, dict))
    return "\n".join(lines) + "\n"


def _features(config, dataset):
    if config.features:
        return parse_features(config.features)
    return default_features(dataset.k, dataset.p)


def _run_estimator(config, dataset, estimator, features):
    if estimator == "discrete":
        if config.bins:
            dataset = bin_dataset(dataset, parse_bins(config.bins, dataset))
        point = identify_effects(dataset, config.smooth)
    else:
        point = estimate_effects(dataset, features, shift_mode=config.shift_mode,
                                 strict=config.strict)
    out = point.to_dict()
    if config.bootstrap:
        summary = bootstrap_effects(dataset, features, config.bootstrap, config.alpha, config.seed,
                                    estimator=estimator, n_jobs=config.jobs,
                                    shift_mode=config.shift_mode, strict=config.strict,
                                    smoothing=config.smooth)
        out["bootstrap"] = summary.to_dict()
    return out


def _cmd_simulate(config):
    if not config.out:
        raise ValueError("simulate requires --out")
    dataset = simulate_observed(load_spec(config.spec), config.n, config.seed)
    write_csv(dataset, config.out)
    summary = {"out": config.out, "n": dataset.n, "k": dataset.k, "p": dataset.p,
               "seed": config.seed, "n_treated": int((dataset.a == 1).sum())}
    text = dumps_json(summary) if config.fmt == "json" else "".join(
        f"{key}: {value}\n" for key, value in summary.items())
    sys.stdout.write(text)


def _cmd_oracle(config):
    spec = load_spec(config.spec)
    oracle = oracle_effects(spec, config.n, config.seed)
    closed = closed_form_effects(spec)
    payload = {**oracle.to_dict(), "n": config.n, "seed": config.seed,
               "closed_form": closed.to_dict()}
    _emit(config, payload, _table(payload))


def _cmd_inference(config):
    dataset = read_csv(config.data, require_both_arms=True)
    features = _features(config, dataset)
    estimator = config.estimator
    primary = "discrete" if estimator == "discrete" else "parametric"
    payload = _run_estimator(config, dataset, primary, features)
    payload = {**{k: payload[k] for k in ESTIMANDS}, "estimator": estimator, "n": dataset.n,
               "n_treated": int((dataset.a == 1).sum()), **{k: v for k, v in payload.items()
                                                           if k not in ESTIMANDS}}
    if primary == "parametric":
        payload["features"] = [feature_label(f) for f in features]
    if estimator == "both":
        payload["discrete"] = _run_estimator(config, dataset, "discrete", features)
    _emit(config, payload, _table(payload))


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.from_args(args)
        if config.command == "bootstrap" and not config.bootstrap:
            config = RunConfig(**{**config.__dict__, "bootstrap": 1000})
        if config.command == "simulate":
            _cmd_simulate(config)
        elif config.command == "oracle":
            _cmd_oracle(config)
        else:
            _cmd_inference(config)
    except OrganicError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: IOError: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: ConfigError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


def main(argv=None):
    warnings.formatwarning = lambda msg, cat, *a, **k: f"warning: {cat.__name__}: {msg}\n"
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
