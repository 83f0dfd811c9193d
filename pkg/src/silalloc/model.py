"""Domain types for a mitigation system and load-time structural validation.

A mitigation system is a set of independent subsystems executing a set of
mitigation functions; a binary mapping matrix states which subsystems each
function requires. Hazard outcomes are partitioned into ordered consequence
segments (most severe first), each with a tolerable frequency and a boolean
predicate that claims states.

All types are frozen dataclasses: immutable after construction and safe to
share across threads. `validate` is the single gate every structural
invariant the evaluation engine relies on must pass through.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .predicates import (
    And,
    ConstFalse,
    ConstTrue,
    EvalContext,
    FunctionLit,
    IDENT_RE,
    Not,
    Or,
    PredicateAst,
    SegmentRef,
    eval_predicate,
)

# Exhaustive evaluation walks two-to-the-subsystems states; past this many
# the run time leaves interactive territory. Overridable wherever checked.
DEFAULT_MAX_SUBSYSTEMS = 26


@dataclass(frozen=True)
class FixedPfd:
    """Subsystem unavailability fixed at a known value."""

    value: float


@dataclass(frozen=True)
class ScaledPfd:
    """Subsystem unavailability expressed as weight * p for the allocation
    scalar p (the apportionment of a single target across subsystems)."""

    weight: float


PfdSpec = Union[FixedPfd, ScaledPfd]


@dataclass(frozen=True)
class SubsystemDef:
    name: str
    pfd: PfdSpec


@dataclass(frozen=True)
class FunctionDef:
    name: str


@dataclass(frozen=True)
class MappingMatrix:
    """Binary matrix, one row per subsystem, one column per function.

    entry [j][k] == 1 means function k requires subsystem j to be available.
    """

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "entries", tuple(tuple(row) for row in self.entries)
        )

    def column(self, k: int) -> tuple[int, ...]:
        return tuple(row[k] for row in self.entries)

    def required_subsystems(self, k: int) -> tuple[int, ...]:
        """Indices of the subsystems function k requires."""
        return tuple(j for j, row in enumerate(self.entries) if row[k])


@dataclass(frozen=True)
class SegmentDef:
    name: str
    tolerance: float
    predicate: PredicateAst
    severity: float | None = None


@dataclass(frozen=True)
class ConsequenceScheme:
    """Ordered consequence segments, most severe first."""

    segments: tuple[SegmentDef, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def severities_present(self) -> bool:
        return all(s.severity is not None for s in self.segments) and bool(
            self.segments
        )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.segments)

    @property
    def tolerances(self) -> tuple[float, ...]:
        return tuple(s.tolerance for s in self.segments)


@dataclass(frozen=True)
class SystemModel:
    name: str
    subsystems: tuple[SubsystemDef, ...]
    functions: tuple[FunctionDef, ...]
    mapping: MappingMatrix
    hazard_frequency: float
    scheme: ConsequenceScheme

    def __post_init__(self):
        object.__setattr__(self, "subsystems", tuple(self.subsystems))
        object.__setattr__(self, "functions", tuple(self.functions))

    @property
    def subsystem_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.subsystems)

    @property
    def function_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.functions)

    @property
    def scaled_subsystems(self) -> tuple[int, ...]:
        return tuple(
            j for j, s in enumerate(self.subsystems) if isinstance(s.pfd, ScaledPfd)
        )


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: str

    def __str__(self) -> str:
        return f"{self.severity}[{self.code}] {self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    def __post_init__(self):
        object.__setattr__(self, "findings", tuple(self.findings))

    @property
    def ok(self) -> bool:
        return not any(f.severity == "error" for f in self.findings)

    @property
    def status(self) -> str:
        return "ok" if self.ok else "failed"

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class _Findings:
    def __init__(self):
        self.items: list[Finding] = []

    def error(self, code: str, location: str, message: str) -> None:
        self.items.append(Finding("error", code, message, location))

    def warning(self, code: str, location: str, message: str) -> None:
        self.items.append(Finding("warning", code, message, location))


def _check_names(kind: str, names: Iterable[str], out: _Findings) -> None:
    seen: set[str] = set()
    for idx, name in enumerate(names):
        where = f"{kind}s[{idx}]"
        if not name or not IDENT_RE.match(name):
            out.error(
                "bad-name",
                where,
                f"{kind} name {name!r} is not a valid identifier",
            )
        if name in seen:
            out.error("duplicate-name", where, f"duplicate {kind} name {name!r}")
        seen.add(name)


def _check_predicate_refs(
    model: SystemModel, out: _Findings
) -> bool:
    """Verify every AST node resolves; returns True when safe to evaluate."""
    resolvable = True
    function_names = model.function_names
    segment_names = model.scheme.names

    def walk(node: PredicateAst, h: int, where: str) -> None:
        nonlocal resolvable
        if isinstance(node, FunctionLit):
            if not (0 <= node.index < len(function_names)) or (
                function_names[node.index] != node.name
            ):
                resolvable = False
                out.error(
                    "unknown-reference",
                    where,
                    f"predicate references unknown function {node.name!r}",
                )
        elif isinstance(node, SegmentRef):
            if not (0 <= node.index < h) or segment_names[node.index] != node.name:
                resolvable = False
                out.error(
                    "unknown-reference",
                    where,
                    f"predicate references segment {node.name!r} which is not "
                    "strictly earlier in the scheme",
                )
        elif isinstance(node, Not):
            walk(node.operand, h, where)
        elif isinstance(node, (And, Or)):
            walk(node.left, h, where)
            walk(node.right, h, where)
        elif not isinstance(node, (ConstTrue, ConstFalse)):
            resolvable = False
            out.error(
                "unknown-reference", where, f"not a predicate node: {node!r}"
            )

    for h, segment in enumerate(model.scheme.segments):
        walk(segment.predicate, h, f"segments[{h}] {segment.name!r}")
    return resolvable


def _classify_row(
    scheme: ConsequenceScheme, function_row: tuple[int, ...]
) -> list[int]:
    """Evaluate all segment predicates over one function row, threading the
    already-computed earlier values; returns indices of claiming segments."""
    values: list[int] = []
    for segment in scheme.segments:
        values.append(
            eval_predicate(segment.predicate, EvalContext(function_row, values))
        )
    return [h for h, bit in enumerate(values) if bit]


def _describe_state(model: SystemModel, available: set[int]) -> str:
    if len(available) == len(model.subsystems):
        detail = "all subsystems available"
    else:
        unavailable = [
            s.name for j, s in enumerate(model.subsystems) if j not in available
        ]
        detail = "unavailable: " + ", ".join(unavailable)
    index = sum(1 << j for j in available)
    return f"state {index} ({detail})"


def _partition_finding(
    model: SystemModel,
    function_row: tuple[int, ...],
    available: set[int],
    claims: list[int],
    out: _Findings,
) -> None:
    state = _describe_state(model, available)
    row = "".join(str(b) for b in function_row)
    if not claims:
        message = (
            f"no segment claims {state}, function row {row}; every state must "
            "fall in exactly one consequence segment"
        )
    else:
        names = ", ".join(model.scheme.segments[h].name for h in claims)
        message = (
            f"segments {names} all claim {state}, function row {row}; every "
            "state must fall in exactly one consequence segment"
        )
    out.error("partition-violation", "scheme", message)


def _check_partition(model: SystemModel, out: _Findings) -> None:
    """Exactly-one-segment check over every reachable function row.

    Rows are deduplicated before predicate evaluation, so at most
    min(2^functions, 2^subsystems) rows are evaluated: with no more
    functions than subsystems, every candidate row is tested for
    reachability directly (a row is reachable iff no failed function has
    all of its required subsystems forced available by the successful
    ones); otherwise the states are walked and distinct rows collected.
    Enumeration starts from the all-available state so the most intuitive
    witness is reported first.
    """
    n_sub = len(model.subsystems)
    n_fn = len(model.functions)
    required = [
        frozenset(model.mapping.required_subsystems(k)) for k in range(n_fn)
    ]

    if n_fn <= n_sub:
        for row_key in range(2**n_fn - 1, -1, -1):
            function_row = tuple((row_key >> k) & 1 for k in range(n_fn))
            forced: set[int] = set()
            for k in range(n_fn):
                if function_row[k]:
                    forced |= required[k]
            if any(
                required[k] <= forced
                for k in range(n_fn)
                if not function_row[k]
            ):
                continue  # unreachable combination
            claims = _classify_row(model.scheme, function_row)
            if len(claims) != 1:
                _partition_finding(model, function_row, forced, claims, out)
                return
    else:
        masks = [sum(1 << j for j in required[k]) for k in range(n_fn)]
        seen: set[int] = set()
        for state in range(2**n_sub - 1, -1, -1):
            row_key = 0
            for k, mask in enumerate(masks):
                if state & mask == mask:
                    row_key |= 1 << k
            if row_key in seen:
                continue
            seen.add(row_key)
            function_row = tuple((row_key >> k) & 1 for k in range(n_fn))
            claims = _classify_row(model.scheme, function_row)
            if len(claims) != 1:
                available = {j for j in range(n_sub) if (state >> j) & 1}
                _partition_finding(model, function_row, available, claims, out)
                return


def validate(
    model: SystemModel, *, max_subsystems: int | None = None
) -> ValidationReport:
    """Check every structural invariant the engine relies on.

    Pure and deterministic. The report is ok iff there are no error
    findings, which requires in particular the partition property: every
    reachable function-state row is claimed by exactly one segment. A
    violated partition is an error, not a warning, because segment
    frequencies would otherwise silently double-count or drop hazard mass.

    `max_subsystems` overrides the exhaustive-enumeration guardrail
    (default 26 subsystems).
    """
    out = _Findings()
    cap = DEFAULT_MAX_SUBSYSTEMS if max_subsystems is None else max_subsystems

    n_sub = len(model.subsystems)
    n_fn = len(model.functions)
    n_seg = len(model.scheme.segments)

    if n_sub < 1:
        out.error("empty-model", "subsystems", "model declares no subsystems")
    if n_sub > cap:
        out.error(
            "too-many-subsystems",
            "subsystems",
            f"{n_sub} subsystems would need 2^{n_sub} states; the enumeration "
            f"cap is {cap} (override it explicitly to proceed)",
        )
    if n_fn < 1:
        out.error("empty-model", "functions", "model declares no functions")
    if n_seg < 1:
        out.error("empty-model", "segments", "model declares no segments")

    _check_names("subsystem", model.subsystem_names, out)
    _check_names("function", model.function_names, out)
    _check_names("segment", model.scheme.names, out)

    overlap = set(model.function_names) & set(model.scheme.names)
    for name in sorted(overlap):
        out.warning(
            "name-shadowing",
            "scheme",
            f"{name!r} names both a function and a segment; predicates "
            "resolve it as the function",
        )

    if not (_is_number(model.hazard_frequency) and model.hazard_frequency > 0):
        out.error(
            "bad-frequency",
            "hazard_frequency",
            f"hazard frequency must be > 0, got {model.hazard_frequency!r}",
        )

    for j, sub in enumerate(model.subsystems):
        where = f"subsystems[{j}] {sub.name!r}"
        if isinstance(sub.pfd, FixedPfd):
            if not (_is_number(sub.pfd.value) and 0.0 <= sub.pfd.value <= 1.0):
                out.error(
                    "pfd-out-of-range",
                    where,
                    f"probability out of range: fixed PFD {sub.pfd.value!r} "
                    "is not in [0, 1]",
                )
        elif isinstance(sub.pfd, ScaledPfd):
            if not (_is_number(sub.pfd.weight) and sub.pfd.weight > 0):
                out.error(
                    "bad-weight",
                    where,
                    f"scaled PFD weight must be > 0, got {sub.pfd.weight!r}",
                )
        else:
            out.error("bad-pfd", where, f"not a PFD spec: {sub.pfd!r}")

    dims_ok = True
    if len(model.mapping.entries) != n_sub:
        dims_ok = False
        out.error(
            "dimension-mismatch",
            "mapping",
            f"mapping has {len(model.mapping.entries)} rows for "
            f"{n_sub} subsystems",
        )
    for j, row in enumerate(model.mapping.entries):
        if len(row) != n_fn:
            dims_ok = False
            out.error(
                "dimension-mismatch",
                f"mapping row {j}",
                f"row has {len(row)} entries for {n_fn} functions",
            )
            continue
        for k, bit in enumerate(row):
            if bit not in (0, 1):
                dims_ok = False
                out.error(
                    "bad-mapping-entry",
                    f"mapping[{j}][{k}]",
                    f"mapping entries must be 0 or 1, got {bit!r}",
                )
    if dims_ok:
        for k in range(n_fn):
            if not any(row[k] for row in model.mapping.entries):
                dims_ok = False
                out.error(
                    "unsupported-function",
                    f"functions[{k}] {model.functions[k].name!r}",
                    "function requires no subsystem; every function needs "
                    "at least one",
                )

    with_severity = 0
    for h, segment in enumerate(model.scheme.segments):
        where = f"segments[{h}] {segment.name!r}"
        if not (_is_number(segment.tolerance) and segment.tolerance > 0):
            out.error(
                "bad-tolerance",
                where,
                f"tolerable frequency must be > 0, got {segment.tolerance!r}",
            )
        if segment.severity is not None:
            with_severity += 1
            if not (_is_number(segment.severity) and segment.severity > 0):
                out.error(
                    "bad-severity",
                    where,
                    f"severity must be > 0, got {segment.severity!r}",
                )
    if 0 < with_severity < n_seg:
        out.error(
            "partial-severities",
            "scheme",
            f"severities are set on {with_severity} of {n_seg} segments; "
            "set all or none",
        )

    refs_ok = n_seg >= 1 and _check_predicate_refs(model, out)

    # Partition needs a consistent mapping and resolvable predicates, and
    # must respect the enumeration cap.
    if dims_ok and refs_ok and 1 <= n_sub <= cap and n_fn >= 1:
        _check_partition(model, out)

    return ValidationReport(tuple(out.items))
