"""Exact risk evaluation by exhaustive enumeration of availability states.

A system of independent subsystems occupies one of 2**subsystems
availability states. For each state the engine derives the
function-success row, assigns the state to its unique consequence segment,
and accumulates the state's occurrence frequency into that segment.
Nothing is materialized: states are streamed, so memory stays constant no
matter how many states there are.

Numeric discipline, because these are safety numbers:

* Per-segment accumulators use compensated (Neumaier) summation and a fixed
  sequential order, so results are reproducible bit-for-bit.
* Internally the fold runs in *name-sorted* subsystem order rather than
  declaration order. Floating-point products and sums are not
  reorder-stable, so canonicalizing the order makes segment frequencies
  exactly invariant under permutations of the subsystem list.
* Zero-frequency states are skipped; they carry no hazard mass and skipping
  keeps accumulator sequences identical across models that agree on all
  nonzero states.

State indexing convention (public operations): bit j of the state index is
the availability of subsystem j in declaration order, so state 0 is
"everything unavailable" and the all-ones index is "everything available".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .model import (
    ConsequenceScheme,
    DEFAULT_MAX_SUBSYSTEMS,
    MappingMatrix,
    SystemModel,
)
from .predicates import EvalContext, eval_predicate

PER_SEGMENT = "per-segment"
COLLECTIVE = "collective"
CRITERIA = (PER_SEGMENT, COLLECTIVE)


class EngineError(ValueError):
    pass


class EnumerationCapError(EngineError):
    """Raised when the state count would exceed the enumeration guardrail."""


class PartitionBreachError(EngineError):
    """A state matched zero or several segments during evaluation.

    `validate` rules this out up front; hitting it means the model was not
    validated (or was mutated) and the segment totals would be wrong.
    """


class NeumaierSum:
    """Compensated sequential accumulator.

    Improved Kahan-Babuska variant: the compensation term also captures the
    case where the running sum is smaller than the addend. Addition order is
    part of the contract; callers must feed values in a deterministic order.
    """

    __slots__ = ("_sum", "_compensation")

    def __init__(self):
        self._sum = 0.0
        self._compensation = 0.0

    def add(self, value: float) -> None:
        total = self._sum + value
        if abs(self._sum) >= abs(value):
            self._compensation += (self._sum - total) + value
        else:
            self._compensation += (value - total) + self._sum
        self._sum = total

    @property
    def value(self) -> float:
        return self._sum + self._compensation


@dataclass(frozen=True)
class ConsequenceFrequencies:
    """Per-segment hazard frequencies (events per year), scheme order."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def total(self) -> float:
        return math.fsum(self.values)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, h):
        return self.values[h]


@dataclass(frozen=True)
class SegmentAssessment:
    segment: str
    frequency: float
    tolerance: float
    passed: bool
    margin: float  # frequency / tolerance; > 1 means intolerable


@dataclass(frozen=True)
class CollectiveAssessment:
    risk: float
    tolerable_risk: float
    passed: bool


@dataclass(frozen=True)
class RiskReport:
    frequencies: ConsequenceFrequencies
    per_segment: tuple[SegmentAssessment, ...]
    collective: CollectiveAssessment | None
    criterion: str
    overall_pass: bool


def function_states(state: int, mapping: MappingMatrix) -> tuple[int, ...]:
    """Success bits of every function in availability state `state`.

    A function succeeds iff all the subsystems it requires are available;
    bit j of `state` is the availability of subsystem j (declaration order).
    """
    result = []
    for k in range(len(mapping.entries[0]) if mapping.entries else 0):
        ok = 1
        for j, row in enumerate(mapping.entries):
            if row[k] and not (state >> j) & 1:
                ok = 0
                break
        result.append(ok)
    return tuple(result)


def state_frequency(
    state: int, pfds: Sequence[float], hazard_frequency: float
) -> float:
    """Frequency (per year) of the hazard striking while in `state`.

    Each subsystem contributes its availability probability (1 - pfd) or
    its unavailability probability (pfd) according to the state bit; the
    product times the hazard frequency is the state's share. Over all
    states the shares sum back to the hazard frequency.
    """
    frequency = hazard_frequency
    for j, pfd in enumerate(pfds):
        frequency *= (1.0 - pfd) if (state >> j) & 1 else pfd
    return frequency


def _check_pfds(pfds: Sequence[float], n_sub: int) -> None:
    if len(pfds) != n_sub:
        raise EngineError(
            f"PFD vector has {len(pfds)} entries for {n_sub} subsystems"
        )
    for j, value in enumerate(pfds):
        if not (0.0 <= value <= 1.0):
            raise EngineError(
                f"PFD of subsystem {j} out of [0, 1]: {value!r}"
            )


def consequence_frequencies(
    model: SystemModel,
    pfds: Sequence[float],
    *,
    max_subsystems: int | None = None,
) -> ConsequenceFrequencies:
    """Stream all availability states and total each segment's frequency.

    Precondition: `validate(model)` is ok (in particular the partition
    property holds); `pfds` is the resolved per-subsystem vector in
    declaration order. A state matching zero or several segments raises
    PartitionBreachError rather than producing silently wrong totals.

    Raises EnumerationCapError when the subsystem count exceeds the
    guardrail (default 26); pass `max_subsystems` to raise it deliberately.
    """
    n_sub = len(model.subsystems)
    cap = DEFAULT_MAX_SUBSYSTEMS if max_subsystems is None else max_subsystems
    if n_sub > cap:
        raise EnumerationCapError(
            f"{n_sub} subsystems would need 2^{n_sub} states; the enumeration "
            f"cap is {cap} (override it explicitly to proceed)"
        )
    _check_pfds(pfds, n_sub)

    # Canonical evaluation order: see module docstring.
    order = sorted(range(n_sub), key=lambda j: model.subsystems[j].name)
    unavailable = [float(pfds[j]) for j in order]
    available = [1.0 - value for value in unavailable]

    n_fn = len(model.functions)
    masks = []
    for k in range(n_fn):
        mask = 0
        for position, j in enumerate(order):
            if model.mapping.entries[j][k]:
                mask |= 1 << position
        masks.append(mask)

    segments = model.scheme.segments
    accumulators = [NeumaierSum() for _ in segments]
    segment_of_row: dict[int, int] = {}
    hazard = float(model.hazard_frequency)

    for state in range(1 << n_sub):
        frequency = hazard
        for position in range(n_sub):
            if (state >> position) & 1:
                frequency *= available[position]
            else:
                frequency *= unavailable[position]
        if frequency == 0.0:
            continue

        row_key = 0
        for k, mask in enumerate(masks):
            if state & mask == mask:
                row_key |= 1 << k

        h = segment_of_row.get(row_key)
        if h is None:
            function_row = tuple((row_key >> k) & 1 for k in range(n_fn))
            values: list[int] = []
            for segment in segments:
                values.append(
                    eval_predicate(
                        segment.predicate, EvalContext(function_row, values)
                    )
                )
            claims = [idx for idx, bit in enumerate(values) if bit]
            if len(claims) != 1:
                row = "".join(str(b) for b in function_row)
                raise PartitionBreachError(
                    f"function row {row} is claimed by {len(claims)} segments; "
                    "the model was not validated"
                )
            h = claims[0]
            segment_of_row[row_key] = h

        accumulators[h].add(frequency)

    return ConsequenceFrequencies(tuple(acc.value for acc in accumulators))


def risk_measures(
    frequencies: ConsequenceFrequencies,
    scheme: ConsequenceScheme,
    criterion: str = PER_SEGMENT,
) -> RiskReport:
    """Compare estimated against tolerable frequencies.

    Per-segment: every segment frequency must not exceed its tolerance.
    Collective: the severity-weighted totals are compared instead, and the
    scheme must carry severities. Comparisons are exact <= on the computed
    values; no epsilon is applied.
    """
    if criterion not in CRITERIA:
        raise EngineError(f"unknown criterion {criterion!r}; use one of {CRITERIA}")
    if len(frequencies) != len(scheme.segments):
        raise EngineError(
            f"{len(frequencies)} frequencies for {len(scheme.segments)} segments"
        )

    per_segment = []
    for segment, frequency in zip(scheme.segments, frequencies):
        per_segment.append(
            SegmentAssessment(
                segment=segment.name,
                frequency=frequency,
                tolerance=segment.tolerance,
                passed=frequency <= segment.tolerance,
                margin=frequency / segment.tolerance,
            )
        )

    collective = None
    if criterion == COLLECTIVE:
        if not scheme.severities_present:
            raise EngineError(
                "collective criterion requires a severity on every segment"
            )
        risk = math.fsum(
            frequency * segment.severity
            for frequency, segment in zip(frequencies, scheme.segments)
        )
        tolerable = math.fsum(
            s.tolerance * s.severity for s in scheme.segments
        )
        collective = CollectiveAssessment(
            risk=risk, tolerable_risk=tolerable, passed=risk <= tolerable
        )
        overall = collective.passed
    else:
        overall = all(a.passed for a in per_segment)

    return RiskReport(
        frequencies=frequencies,
        per_segment=tuple(per_segment),
        collective=collective,
        criterion=criterion,
        overall_pass=overall,
    )
