"""Independent verification paths for the exact engine.

Three cross-checks, each deliberately computed along a different route than
the streaming enumeration:

* `monte_carlo_w` -- seeded simulation of subsystem availability; the
  estimates must straddle the exact segment frequencies within sampling
  error.
* `lopa_frequency` -- the classic product of an initiating-event frequency
  and independent layer PFDs; equals the engine on serial-chain models.
* `eta_reference` -- event-tree branch products over function outcomes;
  valid only when functions share no subsystems, which is exactly the
  restriction the state-enumeration approach removes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import ConsequenceFrequencies, PartitionBreachError
from .model import SystemModel
from .predicates import (
    And,
    ConstFalse,
    ConstTrue,
    FunctionLit,
    Not,
    Or,
    PredicateAst,
    SegmentRef,
    EvalContext,
    eval_predicate,
)

# Fixed sampling chunk; part of the reproducibility contract, since each
# chunk draws from its own deterministic sub-seed (seed, chunk index).
MC_CHUNK_SIZE = 1_000_000


class EtaIndependenceError(ValueError):
    """Functions share a subsystem, so branch products are invalid."""


@dataclass(frozen=True)
class McEstimate:
    """Sampled segment frequencies with binomial standard errors."""

    estimates: tuple[float, ...]
    stderr: tuple[float, ...]
    n_samples: int
    seed: int
    counts: tuple[int, ...]


def _bulk_eval(
    ast: PredicateAst,
    function_rows: np.ndarray,
    earlier_values: list[np.ndarray],
) -> np.ndarray:
    """Vectorized predicate evaluation over a (samples, functions) bool array."""
    if isinstance(ast, ConstTrue):
        return np.ones(function_rows.shape[0], dtype=bool)
    if isinstance(ast, ConstFalse):
        return np.zeros(function_rows.shape[0], dtype=bool)
    if isinstance(ast, FunctionLit):
        return function_rows[:, ast.index]
    if isinstance(ast, SegmentRef):
        return earlier_values[ast.index]
    if isinstance(ast, Not):
        return ~_bulk_eval(ast.operand, function_rows, earlier_values)
    if isinstance(ast, And):
        return _bulk_eval(ast.left, function_rows, earlier_values) & _bulk_eval(
            ast.right, function_rows, earlier_values
        )
    if isinstance(ast, Or):
        return _bulk_eval(ast.left, function_rows, earlier_values) | _bulk_eval(
            ast.right, function_rows, earlier_values
        )
    raise TypeError(f"not a predicate node: {ast!r}")


def monte_carlo_w(
    model: SystemModel,
    pfds: Sequence[float],
    n_samples: int,
    seed: int,
    *,
    chunk_size: int = MC_CHUNK_SIZE,
) -> McEstimate:
    """Estimate segment frequencies by sampling subsystem availability.

    Each sample draws every subsystem independently (unavailable with
    probability pfd), derives the function-success row and assigns the
    sample to its unique segment. Estimates are hazard_frequency *
    count / n_samples. Reproducible: the same (seed, n_samples, chunk_size)
    always yields the same counts, and chunks may be evaluated in any order
    or in parallel without changing them.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples!r}")
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")

    n_sub = len(model.subsystems)
    n_fn = len(model.functions)
    if len(pfds) != n_sub:
        raise ValueError(
            f"PFD vector has {len(pfds)} entries for {n_sub} subsystems"
        )

    pfd_row = np.asarray(pfds, dtype=float)
    if (pfd_row < 0).any() or (pfd_row > 1).any():
        raise ValueError("PFDs must lie in [0, 1]")

    required = [
        np.asarray(model.mapping.required_subsystems(k), dtype=int)
        for k in range(n_fn)
    ]
    segments = model.scheme.segments
    counts = np.zeros(len(segments), dtype=np.int64)

    drawn = 0
    chunk_index = 0
    while drawn < n_samples:
        size = min(chunk_size, n_samples - drawn)
        rng = np.random.default_rng(np.random.SeedSequence([seed, chunk_index]))
        unavailable = rng.random((size, n_sub)) < pfd_row

        function_rows = np.empty((size, n_fn), dtype=bool)
        for k in range(n_fn):
            function_rows[:, k] = ~unavailable[:, required[k]].any(axis=1)

        values: list[np.ndarray] = []
        for segment in segments:
            values.append(_bulk_eval(segment.predicate, function_rows, values))
        stacked = np.column_stack(values)
        claims_per_sample = stacked.sum(axis=1)
        if not (claims_per_sample == 1).all():
            bad = int(np.flatnonzero(claims_per_sample != 1)[0])
            row = "".join("1" if b else "0" for b in function_rows[bad])
            raise PartitionBreachError(
                f"function row {row} is claimed by "
                f"{int(claims_per_sample[bad])} segments; the model was not "
                "validated"
            )
        counts += stacked.sum(axis=0, dtype=np.int64)

        drawn += size
        chunk_index += 1

    hazard = float(model.hazard_frequency)
    proportions = counts / n_samples
    estimates = hazard * proportions
    stderr = hazard * np.sqrt(proportions * (1.0 - proportions) / n_samples)
    return McEstimate(
        estimates=tuple(float(x) for x in estimates),
        stderr=tuple(float(x) for x in stderr),
        n_samples=int(n_samples),
        seed=int(seed),
        counts=tuple(int(c) for c in counts),
    )


def lopa_frequency(w_ie: float, layer_pfds: Sequence[float]) -> float:
    """Hazard frequency left after a chain of independent protection layers.

    The plain product formula: initiating-event frequency times every
    layer's PFD. An empty chain passes the frequency through unchanged.
    """
    if not (w_ie >= 0):
        raise ValueError(f"initiating-event frequency must be >= 0, got {w_ie!r}")
    result = float(w_ie)
    for i, pfd in enumerate(layer_pfds):
        if not (0.0 <= pfd <= 1.0):
            raise ValueError(f"layer {i} PFD out of [0, 1]: {pfd!r}")
        result *= pfd
    return result


def eta_reference(
    model: SystemModel, pfds: Sequence[float]
) -> ConsequenceFrequencies:
    """Event-tree branch products over the 2^m function outcomes.

    Requires pairwise-disjoint function requirements: with no shared
    subsystems the function successes are independent, so each outcome
    combination's probability is a plain branch product. Models with shared
    subsystems are rejected -- those are precisely the models the exhaustive
    engine exists for.
    """
    n_sub = len(model.subsystems)
    n_fn = len(model.functions)
    if len(pfds) != n_sub:
        raise ValueError(
            f"PFD vector has {len(pfds)} entries for {n_sub} subsystems"
        )

    owner: dict[int, int] = {}
    for k in range(n_fn):
        for j in model.mapping.required_subsystems(k):
            if j in owner:
                raise EtaIndependenceError(
                    "ETA independence violated: subsystem "
                    f"{model.subsystems[j].name!r} is shared by functions "
                    f"{model.functions[owner[j]].name!r} and "
                    f"{model.functions[k].name!r}"
                )
            owner[j] = k

    failure = []
    for k in range(n_fn):
        available = 1.0
        for j in model.mapping.required_subsystems(k):
            available *= 1.0 - pfds[j]
        failure.append(1.0 - available)

    segments = model.scheme.segments
    terms: list[list[float]] = [[] for _ in segments]
    hazard = float(model.hazard_frequency)
    for outcome in range(1 << n_fn):
        function_row = tuple((outcome >> k) & 1 for k in range(n_fn))
        probability = hazard
        for k in range(n_fn):
            if function_row[k]:
                probability *= 1.0 - failure[k]
            else:
                probability *= failure[k]
        values: list[int] = []
        for segment in segments:
            values.append(
                eval_predicate(
                    segment.predicate, EvalContext(function_row, values)
                )
            )
        claims = [h for h, bit in enumerate(values) if bit]
        if len(claims) != 1:
            row = "".join(str(b) for b in function_row)
            raise PartitionBreachError(
                f"function row {row} is claimed by {len(claims)} segments; "
                "the model was not validated"
            )
        terms[claims[0]].append(probability)

    return ConsequenceFrequencies(tuple(math.fsum(t) for t in terms))
