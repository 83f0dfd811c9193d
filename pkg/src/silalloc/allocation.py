"""Target-PFD search and SIL banding.

Subsystems belonging to the safety function under study carry scaled PFDs
(weight * p); the remaining subsystems are fixed from experience. Allocation
searches for the largest scalar p whose resolved PFD vector still satisfies
the chosen risk criterion, then rounds it *down* to one significant figure
as the recommended target (conservative, and the form practitioners quote).

The search is a bisection on log10(p). Tolerability is monotone in p for
failure-driven segments, but arbitrary predicates do not guarantee it, so
every evaluation is recorded and checked for order consistency; if the
pass/fail pattern turns out non-monotone the search degrades to a
descending one-significant-figure grid scan and flags the result.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from .engine import (
    COLLECTIVE,
    CRITERIA,
    PER_SEGMENT,
    RiskReport,
    consequence_frequencies,
    risk_measures,
)
from .model import FixedPfd, ScaledPfd, SystemModel


class AllocationError(ValueError):
    pass


class SilBand(enum.Enum):
    """IEC 61508 integrity band for a target failure measure.

    NONE_BELOW_SIL1: less risk reduction than SIL1 requires (e.g. PFD at or
    above 1e-1). BEYOND_SIL4: stricter than the SIL4 decade. Decade bands
    are half-open [lower, upper), so a PFD of exactly 1e-2 is SIL1.
    """

    NONE_BELOW_SIL1 = "none (below SIL1)"
    SIL1 = "SIL1"
    SIL2 = "SIL2"
    SIL3 = "SIL3"
    SIL4 = "SIL4"
    BEYOND_SIL4 = "beyond SIL4"

    def __str__(self) -> str:
        return self.value


def sil_from_pfd(pfd: float) -> SilBand:
    """Band a demand-mode target PFD into SIL decades."""
    if not (0.0 < pfd <= 1.0):
        raise AllocationError(f"PFD must be in (0, 1], got {pfd!r}")
    if pfd >= 1e-1:
        return SilBand.NONE_BELOW_SIL1
    if pfd >= 1e-2:
        return SilBand.SIL1
    if pfd >= 1e-3:
        return SilBand.SIL2
    if pfd >= 1e-4:
        return SilBand.SIL3
    if pfd >= 1e-5:
        return SilBand.SIL4
    return SilBand.BEYOND_SIL4


def sil_from_pfh(pfh: float) -> SilBand:
    """Band a per-hour dangerous-failure frequency into SIL decades."""
    if not (pfh > 0.0):
        raise AllocationError(f"PFH must be > 0, got {pfh!r}")
    if pfh >= 1e-5:
        return SilBand.NONE_BELOW_SIL1
    if pfh >= 1e-6:
        return SilBand.SIL1
    if pfh >= 1e-7:
        return SilBand.SIL2
    if pfh >= 1e-8:
        return SilBand.SIL3
    if pfh >= 1e-9:
        return SilBand.SIL4
    return SilBand.BEYOND_SIL4


def pfh_from_pfd(pfd: float, tau_hours: float) -> float:
    """Equivalent target PFH for a target PFD under proof-test interval tau.

    Valid as a target conversion when the resulting PFH * tau is well below
    one; emits a warning once PFH * tau exceeds 0.1.
    """
    if not (tau_hours > 0):
        raise AllocationError(f"proof-test interval must be > 0, got {tau_hours!r}")
    if not (0.0 <= pfd <= 1.0):
        raise AllocationError(f"PFD must be in [0, 1], got {pfd!r}")
    pfh = 2.0 * pfd / tau_hours
    if pfh * tau_hours > 0.1:
        warnings.warn(
            f"PFH*tau = {pfh * tau_hours:.3g} is not small; the PFD/PFH "
            "target conversion assumes PFH*tau << 1",
            stacklevel=2,
        )
    return pfh


def round_down_one_sig_fig(value: float) -> float:
    """Largest d*10^e <= value with a single significant digit d in 1..9."""
    if not (value > 0):
        raise AllocationError(f"expected a positive value, got {value!r}")
    exponent = math.floor(math.log10(value))
    digit = int(value / 10.0**exponent)
    # guard the float edges of log10/division
    if digit > 9:
        digit, exponent = 1, exponent + 1
    if digit < 1:
        digit, exponent = 9, exponent - 1
    candidate = float(f"{digit}e{exponent}")
    if candidate > value:
        digit -= 1
        if digit == 0:
            digit, exponent = 9, exponent - 1
        candidate = float(f"{digit}e{exponent}")
    elif digit < 9 and float(f"{digit + 1}e{exponent}") <= value:
        candidate = float(f"{digit + 1}e{exponent}")
    return candidate


def instantiate_pfd(model: SystemModel, p: float) -> tuple[float, ...]:
    """Resolve the PFD vector at allocation scalar `p`.

    Fixed entries pass through; scaled entries become weight * p. A scaled
    entry resolving above 1 is an error (it is no longer a probability).
    """
    if not (0.0 <= p <= 1.0):
        raise AllocationError(f"allocation scalar must be in [0, 1], got {p!r}")
    resolved = []
    for sub in model.subsystems:
        if isinstance(sub.pfd, FixedPfd):
            resolved.append(sub.pfd.value)
        elif isinstance(sub.pfd, ScaledPfd):
            value = sub.pfd.weight * p
            if value > 1.0:
                raise AllocationError(
                    f"scaled value exceeds 1: subsystem {sub.name!r} resolves "
                    f"to {value!r} at p = {p!r}"
                )
            resolved.append(value)
        else:
            raise AllocationError(f"not a PFD spec: {sub.pfd!r}")
    return tuple(resolved)


@dataclass(frozen=True)
class AllocationOptions:
    criterion: str = PER_SEGMENT
    bracket: tuple[float, float] = (1e-6, 1e-1)
    tolerance: float = 0.01  # relative bracket width at which bisection stops


@dataclass(frozen=True)
class TracePoint:
    p: float
    frequencies: tuple[float, ...]
    passed: bool


@dataclass(frozen=True)
class PfhTarget:
    tau_hours: float
    value: float
    band: SilBand


@dataclass(frozen=True)
class AllocationResult:
    feasible: bool
    p_star_raw: float | None
    p_star_recommended: float | None
    resolved_pfds: tuple[float, ...] | None  # at p_star_recommended
    binding_segment: str | None  # largest frequency/tolerance ratio at p_star_raw
    sil_pfd: SilBand | None  # band of p_star_recommended
    pfh: PfhTarget | None
    trace: tuple[TracePoint, ...]
    non_monotone: bool = False
    notes: tuple[str, ...] = ()


class _Evaluator:
    """Criterion evaluation with a trace of every point tried."""

    def __init__(self, model: SystemModel, opts: AllocationOptions,
                 max_subsystems: int | None):
        self.model = model
        self.opts = opts
        self.max_subsystems = max_subsystems
        self.trace: list[TracePoint] = []
        self.reports: dict[float, RiskReport] = {}

    def __call__(self, p: float) -> bool:
        if p not in self.reports:
            pfds = instantiate_pfd(self.model, p)
            w = consequence_frequencies(
                self.model, pfds, max_subsystems=self.max_subsystems
            )
            report = risk_measures(w, self.model.scheme, self.opts.criterion)
            self.reports[p] = report
            self.trace.append(TracePoint(p, w.values, report.overall_pass))
        return self.reports[p].overall_pass

    def monotone(self) -> bool:
        """No failing point may sit below a passing point."""
        evaluated = sorted(self.reports.items())
        seen_fail = False
        for _, report in evaluated:
            if not report.overall_pass:
                seen_fail = True
            elif seen_fail:
                return False
        return True


def _binding_segment(report: RiskReport) -> str:
    # max() keeps the first of equal margins, i.e. the most severe segment
    return max(report.per_segment, key=lambda a: a.margin).segment


def _descending_grid(lo: float, hi: float):
    """One-significant-figure values within [lo, hi], largest first."""
    exponent = math.floor(math.log10(hi))
    while True:
        for digit in range(9, 0, -1):
            value = float(f"{digit}e{exponent}")
            if value > hi:
                continue
            if value < lo:
                return
            yield value
        exponent -= 1


def allocate(
    model: SystemModel,
    opts: AllocationOptions = AllocationOptions(),
    *,
    tau_hours: float | None = None,
    max_subsystems: int | None = None,
) -> AllocationResult:
    """Search the largest tolerable allocation scalar and band it into SIL.

    Preconditions: the model validates ok and has at least one scaled PFD.
    Evaluates the criterion at the bracket ends first: if the top already
    passes there is nothing to allocate; if the bottom already fails the
    fixed subsystems alone breach the tolerance and the search is
    infeasible. Otherwise bisects on log10(p) until the bracket is narrower
    than `opts.tolerance` in relative terms.

    With `tau_hours` the recommended target is also converted to a PFH
    target and banded separately.
    """
    if opts.criterion not in CRITERIA:
        raise AllocationError(
            f"unknown criterion {opts.criterion!r}; use one of {CRITERIA}"
        )
    p_lo, p_hi = opts.bracket
    if not (0.0 < p_lo < p_hi <= 1.0):
        raise AllocationError(
            f"bracket must satisfy 0 < lo < hi <= 1, got ({p_lo!r}, {p_hi!r})"
        )
    if not (0.0 < opts.tolerance < 0.5):
        raise AllocationError(
            f"tolerance must be in (0, 0.5), got {opts.tolerance!r}"
        )
    if not model.scaled_subsystems:
        raise AllocationError(
            "model has no scaled PFD entries; nothing to allocate"
        )

    notes: list[str] = []

    # keep every scaled entry a probability across the whole bracket
    max_weight = max(
        model.subsystems[j].pfd.weight for j in model.scaled_subsystems
    )
    if max_weight * p_hi > 1.0:
        shrunk = 1.0 / max_weight
        if shrunk <= p_lo:
            raise AllocationError(
                f"bracket is empty: scaled weights force p <= {shrunk!r}, "
                f"which is not above the bracket bottom {p_lo!r}"
            )
        notes.append(
            f"bracket top lowered from {p_hi!r} to {shrunk!r} so that every "
            "scaled PFD stays within [0, 1]"
        )
        p_hi = shrunk

    evaluate = _Evaluator(model, opts, max_subsystems)

    if evaluate(p_hi):
        p_star_raw = p_hi
        notes.append(
            f"criterion already met at the bracket top p = {p_hi!r}; "
            "no reduction needed"
        )
    elif not evaluate(p_lo):
        notes.append(
            f"criterion fails even at the bracket bottom p = {p_lo!r}: the "
            "fixed subsystems alone breach the tolerance"
        )
        return AllocationResult(
            feasible=False,
            p_star_raw=None,
            p_star_recommended=None,
            resolved_pfds=None,
            binding_segment=None,
            sil_pfd=None,
            pfh=None,
            trace=tuple(evaluate.trace),
            notes=tuple(notes),
        )
    else:
        lo_pass, hi_fail = p_lo, p_hi
        while hi_fail / lo_pass - 1.0 > opts.tolerance:
            mid = 10.0 ** ((math.log10(lo_pass) + math.log10(hi_fail)) / 2.0)
            if not (lo_pass < mid < hi_fail):
                break  # bracket exhausted at float resolution
            if evaluate(mid):
                lo_pass = mid
            else:
                hi_fail = mid
        p_star_raw = lo_pass

    non_monotone = not evaluate.monotone()
    p_star_recommended = round_down_one_sig_fig(p_star_raw)
    if not evaluate(p_star_recommended):
        non_monotone = True

    if non_monotone:
        notes.append(
            "pass/fail was not monotone in p across the evaluated points; "
            "fell back to a descending one-significant-figure grid scan"
        )
        p_star_raw = None
        for candidate in _descending_grid(p_lo, p_hi):
            if evaluate(candidate):
                p_star_raw = candidate
                break
        if p_star_raw is None:
            # the grid may miss p_lo itself; trust the bracket-bottom check
            p_star_raw = p_lo
            if not evaluate(p_lo):
                return AllocationResult(
                    feasible=False,
                    p_star_raw=None,
                    p_star_recommended=None,
                    resolved_pfds=None,
                    binding_segment=None,
                    sil_pfd=None,
                    pfh=None,
                    trace=tuple(evaluate.trace),
                    non_monotone=True,
                    notes=tuple(notes),
                )
        p_star_recommended = round_down_one_sig_fig(p_star_raw)
        if not evaluate(p_star_recommended):
            # keep the pass guarantee over the one-digit form
            notes.append(
                f"rounded-down target {p_star_recommended!r} does not pass; "
                f"recommending the raw threshold {p_star_raw!r} instead"
            )
            p_star_recommended = p_star_raw

    raw_report = evaluate.reports[p_star_raw]
    binding = _binding_segment(raw_report)
    resolved = instantiate_pfd(model, p_star_recommended)

    pfh = None
    if tau_hours is not None:
        value = pfh_from_pfd(p_star_recommended, tau_hours)
        pfh = PfhTarget(
            tau_hours=tau_hours, value=value, band=sil_from_pfh(value)
        )

    return AllocationResult(
        feasible=True,
        p_star_raw=p_star_raw,
        p_star_recommended=p_star_recommended,
        resolved_pfds=resolved,
        binding_segment=binding,
        sil_pfd=sil_from_pfd(p_star_recommended),
        pfh=pfh,
        trace=tuple(evaluate.trace),
        non_monotone=non_monotone,
        notes=tuple(notes),
    )
