"""Command-line driver: ingest, estimate, optimize, evaluate.

Subcommands ``optimize``, ``backtest``, ``simulate`` and ``test``. Reports are
JSON documents written to ``--out`` (stdout when omitted). Errors are JSON
objects ``{"error": {"kind": ..., "message": ...}}`` on stderr.

Exit codes: 0 ok, 2 parse/config, 3 data, 4 singular/degenerate,
5 Sharpe test degenerate with an otherwise clean run.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .data_ingest import (
    DEFAULT_PERIOD_COLUMN,
    AlignedPanel,
    align,
    format_panel_csv,
    load_panel,
    load_series,
)
from .errors import ConfigError, InsufficientOverlap, MvrefError, ParseError
from .estimation import DEFAULT_ALPHA, MomentEstimates, estimate_moments
from .optimizer import OptimalPortfolio, optimize, portfolio_returns
from .report import dumps
from .similarity import compute_S, evaluate
from .simulate import generate_panel, load_market_spec

EXIT_OK = 0
EXIT_DEGENERATE_TEST = 5
DEFAULT_SPLIT = 0.5


@dataclass
class RunConfig:
    reference: str | None = None
    accepted: list[str] = field(default_factory=list)
    panel: str | None = None
    reference_column: str | None = None
    period_column: str = DEFAULT_PERIOD_COLUMN
    delimiter: str = ","
    split: float | None = None
    alpha: float = DEFAULT_ALPHA
    monitoring_cost: float = 0.0
    out: str | None = None
    spec: str | None = None
    seed: int | None = None
    T: int | None = None
    weights: str | None = None

    def validate(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if not (self.monitoring_cost >= 0.0 and math.isfinite(self.monitoring_cost)):
            raise ConfigError(f"--monitoring-cost must be nonnegative, got {self.monitoring_cost}")
        if self.split is not None and not 0.0 < self.split < 1.0:
            raise ConfigError(f"--split must lie in (0, 1), got {self.split}")

    def input_summary(self) -> dict:
        if self.panel is not None:
            return {"panel": self.panel, "reference_column": self.reference_column}
        return {"reference": self.reference, "accepted": list(self.accepted)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser, *, inputs: bool = True) -> None:
    p.add_argument("--config", help="JSON file of default option values")
    p.add_argument("--out", help="output path (default: stdout)")
    if not inputs:
        return
    p.add_argument("--reference", help="CSV of reference security returns")
    p.add_argument("--accepted", nargs="+", help="CSV files, one per accepted security")
    p.add_argument("--panel", help="wide CSV with reference and accepted columns")
    p.add_argument("--reference-column", help="reference column in --panel (default: first)")
    p.add_argument("--period-column", help=f"period column name (default: {DEFAULT_PERIOD_COLUMN})")
    p.add_argument("--delimiter", help="field delimiter (default: ',')")
    p.add_argument("--alpha", type=float, help="significance level (default: 0.05)")
    p.add_argument("--monitoring-cost", type=float, help="per-period cost deducted from the reference mean")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvref", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mvref {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="estimate moments and solve for the optimal weights")
    _add_common(p)

    p = sub.add_parser("backtest", help="optimize on the first window, evaluate on the rest")
    _add_common(p)
    p.add_argument("--split", type=float, help=f"estimation fraction (default: {DEFAULT_SPLIT})")

    p = sub.add_parser("test", help="run the similarity tests on given weights")
    _add_common(p)
    p.add_argument("--weights", help="JSON file: list of weights or {label: weight}")
    p.add_argument("--split", type=float, help="estimate mu_rs on this leading fraction only")

    p = sub.add_parser("simulate", help="emit a simulated panel CSV")
    _add_common(p, inputs=False)
    p.add_argument("--spec", help="JSON market spec")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.add_argument("--T", type=int, help="override the number of periods")
    return parser


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such config file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def make_config(args: argparse.Namespace) -> RunConfig:
    values = _load_config_file(getattr(args, "config", None))
    unknown = set(values) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for name in RunConfig.__dataclass_fields__:
        given = getattr(args, name, None)
        if given is not None:
            values[name] = given
    try:
        cfg = RunConfig(**values)
        cfg.alpha = float(cfg.alpha)
        cfg.monitoring_cost = float(cfg.monitoring_cost)
        cfg.split = None if cfg.split is None else float(cfg.split)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None
    cfg.validate()
    return cfg


def load_inputs(cfg: RunConfig) -> AlignedPanel:
    opts = {"period_column": cfg.period_column, "delimiter": cfg.delimiter}
    if cfg.panel is not None:
        if cfg.reference or cfg.accepted:
            raise ConfigError("use either --panel or --reference/--accepted, not both")
        return load_panel(cfg.panel, cfg.reference_column, **opts)
    if cfg.reference is None or not cfg.accepted:
        raise ConfigError("inputs required: --panel, or --reference with --accepted")
    ref = load_series(cfg.reference, **opts)
    accepted = [load_series(path, **opts) for path in cfg.accepted]
    return align(ref, accepted)


def split_panel(panel: AlignedPanel, split: float) -> tuple[AlignedPanel, AlignedPanel]:
    """First ceil(split*T) periods estimate, the remainder evaluates."""
    # round first so 0.7 * 10 = 7.000000000000001 does not ceil to 8
    cut = math.ceil(round(split * panel.T, 9))
    if cut < 3 or panel.T - cut < 3:
        raise InsufficientOverlap(
            f"split {split} of T={panel.T} gives windows of {cut} and {panel.T - cut} periods; "
            "each needs at least 3"
        )
    return panel.window(0, cut), panel.window(cut, panel.T)


def _window_info(panel: AlignedPanel) -> dict:
    return {"T": panel.T, "first_period": panel.period_keys[0], "last_period": panel.period_keys[-1]}


def _inputs_section(cfg: RunConfig, panel: AlignedPanel, **extra) -> dict:
    section = {
        "source": cfg.input_summary(),
        "reference_label": panel.reference_label,
        "labels": list(panel.labels),
        "N": panel.N,
        "T": panel.T,
        "alpha": cfg.alpha,
        "monitoring_cost": cfg.monitoring_cost,
    }
    section.update(extra)
    return section


def _estimates_section(est: MomentEstimates) -> dict:
    return {
        "T": est.T,
        "mu": est.mu,
        "sigma": est.sigma,
        "mu_rs": est.mu_rs,
        "mu_rs_sample": est.mu_rs_sample,
        "var_rs": est.var_rs,
        "mu_rs_ci": list(est.mu_rs_ci),
    }


def _diagnostics_section(port: OptimalPortfolio) -> dict:
    return {
        "hessian_pd": port.hessian_pd,
        "hessian_min_pivot": port.hessian_min_pivot,
        "condition_estimate": port.condition_estimate,
        "residual_inf": port.residual,
    }


def _metadata() -> dict:
    return {"program": "mvref", "version": __version__}


def run_optimize(cfg: RunConfig) -> tuple[dict, int]:
    panel = load_inputs(cfg)
    est = estimate_moments(panel, cfg.alpha, cfg.monitoring_cost)
    port = optimize(est)
    po = portfolio_returns(port.weights, panel)
    report = {
        "command": "optimize",
        "inputs": _inputs_section(cfg, panel, estimation_window=_window_info(panel)),
        "estimates": _estimates_section(est),
        "portfolio": port.to_dict(),
        "similarity": {"S_estimation": compute_S(po, est.mu_rs)},
        "diagnostics": _diagnostics_section(port),
        "metadata": _metadata(),
    }
    return report, EXIT_OK


def run_backtest(cfg: RunConfig) -> tuple[dict, int]:
    panel = load_inputs(cfg)
    split = DEFAULT_SPLIT if cfg.split is None else cfg.split
    est_win, eval_win = split_panel(panel, split)
    est = estimate_moments(est_win, cfg.alpha, cfg.monitoring_cost)
    port = optimize(est)
    po_in = portfolio_returns(port.weights, est_win)
    po_out = portfolio_returns(port.weights, eval_win)
    sim = evaluate(eval_win.reference, po_out, est.mu_rs, cfg.alpha)
    report = {
        "command": "backtest",
        "inputs": _inputs_section(
            cfg, panel, split=split,
            estimation_window=_window_info(est_win), evaluation_window=_window_info(eval_win),
        ),
        "estimates": _estimates_section(est),
        "portfolio": port.to_dict(),
        "similarity": {"S_estimation": compute_S(po_in, est.mu_rs), **sim.to_dict()},
        "diagnostics": _diagnostics_section(port),
        "metadata": _metadata(),
    }
    return report, EXIT_DEGENERATE_TEST if sim.degenerate else EXIT_OK


def _read_weights(path: str | None, labels: Sequence[str]) -> np.ndarray:
    if path is None:
        raise ConfigError("--weights is required for the test command")
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such weights file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if isinstance(data, dict) and "weights" in data:
        data = data["weights"]
    if isinstance(data, dict):
        missing = [s for s in labels if s not in data]
        extra = [k for k in data if k not in labels]
        if missing or extra:
            raise ConfigError(f"weights do not match labels: missing {missing}, unknown {extra}")
        data = [data[s] for s in labels]
    if not isinstance(data, list) or len(data) != len(labels):
        raise ConfigError(f"expected {len(labels)} weights")
    try:
        w = np.array([float(v) for v in data])
    except (TypeError, ValueError):
        raise ParseError(f"{path}: weights must be numbers") from None
    if not np.all(np.isfinite(w)):
        raise ParseError(f"{path}: weights must be finite")
    return w


def run_test(cfg: RunConfig) -> tuple[dict, int]:
    panel = load_inputs(cfg)
    w = _read_weights(cfg.weights, panel.labels)
    if cfg.split is None:
        est_win = eval_win = panel
    else:
        est_win, eval_win = split_panel(panel, cfg.split)
    est = estimate_moments(est_win, cfg.alpha, cfg.monitoring_cost)
    po = portfolio_returns(w, eval_win)
    sim = evaluate(eval_win.reference, po, est.mu_rs, cfg.alpha)
    report = {
        "command": "test",
        "inputs": _inputs_section(
            cfg, panel, split=cfg.split,
            estimation_window=_window_info(est_win), evaluation_window=_window_info(eval_win),
        ),
        "estimates": _estimates_section(est),
        "portfolio": {
            "labels": list(panel.labels),
            "weights": w,
            "weight_sum": float(w.sum()),
            "in_sample_mean": float(w @ est.mu),
            "in_sample_variance": float(w @ est.sigma @ w),
        },
        "similarity": sim.to_dict(),
        "diagnostics": {},
        "metadata": _metadata(),
    }
    return report, EXIT_DEGENERATE_TEST if sim.degenerate else EXIT_OK


def run_simulate(cfg: RunConfig) -> tuple[str, int]:
    if cfg.spec is None:
        raise ConfigError("--spec is required for the simulate command")
    spec = load_market_spec(cfg.spec)
    if cfg.seed is not None or cfg.T is not None:
        spec = spec.with_seed(spec.seed if cfg.seed is None else cfg.seed, cfg.T)
    return format_panel_csv(generate_panel(spec)), EXIT_OK


COMMANDS = {
    "optimize": run_optimize,
    "backtest": run_backtest,
    "test": run_test,
}


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args)
        if args.command == "simulate":
            text, code = run_simulate(cfg)
        else:
            report, code = COMMANDS[args.command](cfg)
            text = dumps(report)
        _write(text, cfg.out)
        return code
    except MvrefError as exc:
        sys.stderr.write(json.dumps({"error": exc.to_dict()}) + "\n")
        return exc.exit_code
    except OSError as exc:
        err = ConfigError(f"{exc.filename or ''}: {exc.strerror or exc}")
        sys.stderr.write(json.dumps({"error": err.to_dict()}) + "\n")
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
