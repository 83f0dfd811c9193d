"""Command-line interface.

Commands: validate, evaluate, allocate, simulate. Exit codes are a
contract so CI pipelines can gate on risk results:

    0  model tolerable / allocation feasible / simulation consistent
    1  intolerable, infeasible, or simulation inconsistent
    2  invalid model (validation findings are printed)
    3  operational error (I/O, JSON, bad flags or arguments)

Tables print numbers to 3 significant figures; `--format machine` emits
JSON with full precision and stable ordering (segments in scheme order,
subsystems in declaration order).

Set SILALLOC_MAX_SUBSYSTEMS to raise the exhaustive-enumeration guardrail
(default 26 subsystems) when you really mean to walk that many states.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .allocation import (
    AllocationError,
    AllocationOptions,
    AllocationResult,
    allocate,
    instantiate_pfd,
)
from .engine import (
    CRITERIA,
    EngineError,
    PER_SEGMENT,
    RiskReport,
    consequence_frequencies,
    risk_measures,
)
from .model import ScaledPfd, SystemModel, ValidationReport, validate
from .modelfile import (
    ModelFileError,
    ModelSemanticsError,
    load_model,
)
from .oracle import monte_carlo_w

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INVALID_MODEL = 2
EXIT_ERROR = 3

MAX_SUBSYSTEMS_ENV = "SILALLOC_MAX_SUBSYSTEMS"


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; 2 means "invalid model" here, so remap
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(value: float) -> str:
    return f"{value:.3g}"


def _max_subsystems() -> int | None:
    raw = os.environ.get(MAX_SUBSYSTEMS_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(
            f"{MAX_SUBSYSTEMS_ENV} must be an integer, got {raw!r}"
        ) from None


def _print_findings(report: ValidationReport) -> None:
    for finding in report.findings:
        print(str(finding))


def _load_validated(path: str) -> SystemModel:
    """Load and validate; raises for every failure path, prints warnings."""
    model = load_model(path)
    report = validate(model, max_subsystems=_max_subsystems())
    if not report.ok:
        raise ModelSemanticsError(list(report.findings))
    _print_findings(report)  # warnings only, since the report is ok
    return model


def _resolve_pfds(model: SystemModel, args) -> tuple[tuple[float, ...], dict]:
    """Apply --pfd-scalar and --pfd-override; returns (vector, provenance)."""
    scaled = [model.subsystems[j].name for j in model.scaled_subsystems]
    scalar = args.pfd_scalar
    if scalar is None:
        if scaled:
            raise UsageError(
                "--pfd-scalar is required: subsystems "
                + ", ".join(scaled)
                + " have scaled PFDs"
            )
        scalar = 0.0
    if not (0.0 <= scalar <= 1.0):
        raise UsageError(f"--pfd-scalar must be in [0, 1], got {scalar!r}")

    pfds = list(instantiate_pfd(model, scalar))
    sources = [
        "scaled" if isinstance(s.pfd, ScaledPfd) else "fixed"
        for s in model.subsystems
    ]

    overrides: dict[str, float] = {}
    names = model.subsystem_names
    for item in args.pfd_override or []:
        name, _, raw = item.partition("=")
        if not _ or name not in names:
            raise UsageError(
                f"--pfd-override expects NAME=VALUE with a declared "
                f"subsystem name, got {item!r}"
            )
        try:
            value = float(raw)
        except ValueError:
            raise UsageError(f"--pfd-override value is not a number: {item!r}")
        if not (0.0 <= value <= 1.0):
            raise UsageError(f"--pfd-override value out of [0, 1]: {item!r}")
        j = names.index(name)
        pfds[j] = value
        sources[j] = "override"
        overrides[name] = value

    provenance = {
        "pfd_scalar": scalar if args.pfd_scalar is not None else None,
        "overrides": overrides,
        "sources": sources,
    }
    return tuple(pfds), provenance


# ---------------------------------------------------------------------------
# validate

def _cmd_validate(args) -> int:
    model = load_model(args.model)
    report = validate(model, max_subsystems=_max_subsystems())
    _print_findings(report)
    print(f"{model.name}: {report.status}")
    return EXIT_PASS if report.ok else EXIT_INVALID_MODEL


# ---------------------------------------------------------------------------
# evaluate

def _report_dict(model: SystemModel, report: RiskReport, pfds, provenance) -> dict:
    return {
        "command": "evaluate",
        "model": model.name,
        "hazard_frequency_per_year": model.hazard_frequency,
        "criterion": report.criterion,
        "pfd_scalar": provenance["pfd_scalar"],
        "overrides": provenance["overrides"],
        "subsystem_pfds": [
            {"name": name, "pfd": value, "source": source}
            for name, value, source in zip(
                model.subsystem_names, pfds, provenance["sources"]
            )
        ],
        "segments": [
            {
                "name": a.segment,
                "frequency_per_year": a.frequency,
                "tolerance_per_year": a.tolerance,
                "margin": a.margin,
                "pass": a.passed,
            }
            for a in report.per_segment
        ],
        "collective": None
        if report.collective is None
        else {
            "risk": report.collective.risk,
            "tolerable_risk": report.collective.tolerable_risk,
            "pass": report.collective.passed,
        },
        "overall_pass": report.overall_pass,
    }


def _print_report_table(model, report: RiskReport, pfds, provenance) -> None:
    print(f"Model: {model.name}")
    scalar = provenance["pfd_scalar"]
    parts = [f"criterion: {report.criterion}"]
    if scalar is not None:
        parts.append(f"p = {_fmt(scalar)}")
    print("Evaluation (" + ", ".join(parts) + ")")
    print()
    width = max(len("Subsystem"), *(len(n) for n in model.subsystem_names))
    print(f"{'Subsystem':<{width}}  {'PFD':>9}  Source")
    for name, value, source in zip(
        model.subsystem_names, pfds, provenance["sources"]
    ):
        print(f"{name:<{width}}  {_fmt(value):>9}  {source}")
    print()
    width = max(len("Segment"), *(len(a.segment) for a in report.per_segment))
    print(
        f"{'Segment':<{width}}  {'Freq/yr':>9}  {'Tol/yr':>9}  "
        f"{'Margin':>9}  Result"
    )
    for a in report.per_segment:
        verdict = "pass" if a.passed else "FAIL"
        print(
            f"{a.segment:<{width}}  {_fmt(a.frequency):>9}  "
            f"{_fmt(a.tolerance):>9}  {_fmt(a.margin):>9}  {verdict}"
        )
    if report.collective is not None:
        c = report.collective
        verdict = "pass" if c.passed else "FAIL"
        print()
        print(
            f"Collective risk: {_fmt(c.risk)} vs tolerable "
            f"{_fmt(c.tolerable_risk)}  {verdict}"
        )
    print()
    print("Overall: " + ("TOLERABLE" if report.overall_pass else "INTOLERABLE"))


def _cmd_evaluate(args) -> int:
    model = _load_validated(args.model)
    pfds, provenance = _resolve_pfds(model, args)
    w = consequence_frequencies(model, pfds, max_subsystems=_max_subsystems())
    report = risk_measures(w, model.scheme, args.criterion)
    if args.format == "machine":
        print(json.dumps(_report_dict(model, report, pfds, provenance), indent=2))
    else:
        _print_report_table(model, report, pfds, provenance)
    return EXIT_PASS if report.overall_pass else EXIT_FAIL


# ---------------------------------------------------------------------------
# allocate

def _allocation_dict(model: SystemModel, result: AllocationResult) -> dict:
    return {
        "command": "allocate",
        "model": model.name,
        "feasible": result.feasible,
        "p_star_raw": result.p_star_raw,
        "p_star_recommended": result.p_star_recommended,
        "sil_pfd": None if result.sil_pfd is None else result.sil_pfd.value,
        "binding_segment": result.binding_segment,
        "resolved_pfds": None
        if result.resolved_pfds is None
        else [
            {"name": name, "pfd": value}
            for name, value in zip(model.subsystem_names, result.resolved_pfds)
        ],
        "pfh": None
        if result.pfh is None
        else {
            "tau_hours": result.pfh.tau_hours,
            "value": result.pfh.value,
            "sil": result.pfh.band.value,
        },
        "non_monotone": result.non_monotone,
        "notes": list(result.notes),
        "trace": [
            {"p": t.p, "frequencies": list(t.frequencies), "pass": t.passed}
            for t in result.trace
        ],
    }


def _print_allocation_table(model: SystemModel, result: AllocationResult) -> None:
    print(f"Model: {model.name}")
    for note in result.notes:
        print(f"note: {note}")
    if result.non_monotone:
        print("warning: pass/fail was not monotone in p; grid-scan result")
    if not result.feasible:
        print()
        print("Allocation INFEASIBLE: no scalar in the bracket satisfies the "
              "criterion.")
        return
    print()
    print(f"Raw threshold:      {result.p_star_raw!r}")
    print(
        f"Recommended target: {result.p_star_recommended!r}  "
        f"[{result.sil_pfd}]"
    )
    print(f"Binding segment:    {result.binding_segment}")
    if result.pfh is not None:
        print(
            f"PFH target:         {_fmt(result.pfh.value)} /h at tau = "
            f"{_fmt(result.pfh.tau_hours)} h  [{result.pfh.band}]"
        )
    print()
    width = max(len("Subsystem"), *(len(n) for n in model.subsystem_names))
    print(f"{'Subsystem':<{width}}  {'Target PFD':>11}")
    for name, value in zip(model.subsystem_names, result.resolved_pfds):
        print(f"{name:<{width}}  {_fmt(value):>11}")
    print()
    print(f"Engine evaluations: {len(result.trace)}")


def _cmd_allocate(args) -> int:
    model = _load_validated(args.model)
    try:
        lo, hi = (float(part) for part in args.bracket.split(","))
    except ValueError:
        raise UsageError(
            f"--bracket expects LO,HI (two numbers), got {args.bracket!r}"
        )
    opts = AllocationOptions(
        criterion=args.criterion, bracket=(lo, hi), tolerance=args.tol
    )
    result = allocate(
        model, opts, tau_hours=args.tau, max_subsystems=_max_subsystems()
    )
    if args.format == "machine":
        print(json.dumps(_allocation_dict(model, result), indent=2))
    else:
        _print_allocation_table(model, result)
    return EXIT_PASS if result.feasible else EXIT_FAIL


# ---------------------------------------------------------------------------
# simulate

def _simulation_dict(model, estimate, exact, z_scores) -> dict:
    return {
        "command": "simulate",
        "model": model.name,
        "n_samples": estimate.n_samples,
        "seed": estimate.seed,
        "segments": [
            {
                "name": name,
                "exact": exact_value,
                "estimate": estimated,
                "stderr": err,
                "count": count,
                "z": z,
            }
            for name, exact_value, estimated, err, count, z in zip(
                model.scheme.names,
                exact.values,
                estimate.estimates,
                estimate.stderr,
                estimate.counts,
                z_scores,
            )
        ],
        "max_abs_z": max(abs(z) for z in z_scores),
        "pass": all(abs(z) <= 4.0 for z in z_scores),
    }


def _cmd_simulate(args) -> int:
    if args.samples < 1:
        raise UsageError(f"--samples must be >= 1, got {args.samples}")
    if args.seed < 0:
        raise UsageError(f"--seed must be >= 0, got {args.seed}")
    model = _load_validated(args.model)
    pfds, _ = _resolve_pfds(model, args)
    exact = consequence_frequencies(
        model, pfds, max_subsystems=_max_subsystems()
    )
    estimate = monte_carlo_w(model, pfds, args.samples, args.seed)

    z_scores = []
    for estimated, err, exact_value in zip(estimate.estimates, estimate.stderr, exact.values):
        if err > 0.0:
            z_scores.append((estimated - exact_value) / err)
        else:
            z_scores.append(0.0 if estimated == exact_value else math.inf)
    consistent = all(abs(z) <= 4.0 for z in z_scores)

    if args.format == "machine":
        print(json.dumps(_simulation_dict(model, estimate, exact, z_scores),
                         indent=2))
    else:
        print(f"Model: {model.name}")
        print(f"Samples: {estimate.n_samples} | seed: {estimate.seed}")
        print()
        width = max(len("Segment"), *(len(n) for n in model.scheme.names))
        print(
            f"{'Segment':<{width}}  {'Exact':>9}  {'Estimate':>9}  "
            f"{'Stderr':>9}  {'z':>7}"
        )
        for name, exact_value, estimated, err, z in zip(
            model.scheme.names, exact.values, estimate.estimates,
            estimate.stderr, z_scores,
        ):
            print(
                f"{name:<{width}}  {_fmt(exact_value):>9}  {_fmt(estimated):>9}  "
                f"{_fmt(err):>9}  {z:>7.2f}"
            )
        print()
        print(
            "Simulation "
            + ("CONSISTENT" if consistent else "INCONSISTENT")
            + " with the exact engine (|z| <= 4)"
        )
    return EXIT_PASS if consistent else EXIT_FAIL


# ---------------------------------------------------------------------------

def _parse_samples(raw: str) -> int:
    # accept scientific notation like 1e7 for convenience
    try:
        value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {raw!r}")
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not a whole number: {raw!r}")
    return int(value)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="silalloc",
        description=(
            "Allocate target PFD/SIL to mitigation safety functions by "
            "exhaustive evaluation of mitigation-system availability states."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser(
        "validate", help="check a model file against every structural rule"
    )
    p_validate.add_argument("model", help="model JSON file")
    p_validate.set_defaults(handler=_cmd_validate)

    p_evaluate = sub.add_parser(
        "evaluate", help="compute segment frequencies and compare to tolerances"
    )
    p_evaluate.add_argument("model", help="model JSON file")
    p_evaluate.add_argument(
        "--pfd-scalar", type=float, default=None, metavar="P",
        help="allocation scalar resolving the scaled PFD entries",
    )
    p_evaluate.add_argument(
        "--pfd-override", action="append", metavar="NAME=VALUE",
        help="force one subsystem's PFD after resolution (repeatable)",
    )
    p_evaluate.add_argument(
        "--criterion", choices=CRITERIA, default=PER_SEGMENT
    )
    p_evaluate.add_argument(
        "--format", choices=("table", "machine"), default="table"
    )
    p_evaluate.set_defaults(handler=_cmd_evaluate)

    p_allocate = sub.add_parser(
        "allocate", help="search the largest tolerable target PFD and band it"
    )
    p_allocate.add_argument("model", help="model JSON file")
    p_allocate.add_argument(
        "--criterion", choices=CRITERIA, default=PER_SEGMENT
    )
    p_allocate.add_argument(
        "--bracket", default="1e-6,1e-1", metavar="LO,HI",
        help="search bracket for the scalar (default 1e-6,1e-1)",
    )
    p_allocate.add_argument(
        "--tol", type=float, default=0.01, metavar="REL",
        help="relative bracket width at which bisection stops (default 0.01)",
    )
    p_allocate.add_argument(
        "--tau", type=float, default=None, metavar="HOURS",
        help="proof-test interval; also report a PFH target",
    )
    p_allocate.add_argument(
        "--format", choices=("table", "machine"), default="table"
    )
    p_allocate.set_defaults(handler=_cmd_allocate)

    p_simulate = sub.add_parser(
        "simulate", help="cross-check the engine against Monte Carlo sampling"
    )
    p_simulate.add_argument("model", help="model JSON file")
    p_simulate.add_argument(
        "--pfd-scalar", type=float, default=None, metavar="P"
    )
    p_simulate.add_argument(
        "--pfd-override", action="append", metavar="NAME=VALUE"
    )
    p_simulate.add_argument(
        "--samples", type=_parse_samples, default=1_000_000, metavar="N"
    )
    p_simulate.add_argument("--seed", type=int, default=0, metavar="S")
    p_simulate.add_argument(
        "--format", choices=("table", "machine"), default="table"
    )
    p_simulate.set_defaults(handler=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ModelFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ModelSemanticsError as exc:
        for finding in exc.findings:
            print(str(finding))
        print("model is invalid", file=sys.stderr)
        return EXIT_INVALID_MODEL
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (AllocationError, EngineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
