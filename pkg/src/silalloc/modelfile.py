"""Model file format: JSON in, JSON out, plus the bundled example model.

Schema (all keys required unless noted)::

    {
      "name": "...",
      "hazard_frequency_per_year": 0.7,
      "subsystems": [
        {"name": "LHD", "pfd": {"scaled": 0.25}},
        {"name": "TOp", "pfd": {"fixed": 0.1}},
        ...
      ],
      "functions": [
        {"name": "AFS", "requires": ["LHD", "FDP", "FSS"]},
        ...
      ],
      "segments": [
        {"name": "Catastrophic", "tolerance_per_year": 0.001,
         "severity": 40.0,            // optional, all segments or none
         "predicate": "!ASE & !MSE & !EE"},
        ...
      ]
    }

`requires` is the mapping matrix written column-wise; predicates are
expression strings in the predicate grammar. Files are strict: unknown keys
are rejected, since a typoed key in a safety model should never pass
silently.

Error split: `ModelFileError` is a structural problem (unreadable file, bad
JSON, wrong types) -- the document cannot be interpreted at all.
`ModelSemanticsError` carries validation-style findings for name and
predicate problems in an otherwise well-formed document.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

from .model import (
    ConsequenceScheme,
    Finding,
    FixedPfd,
    FunctionDef,
    MappingMatrix,
    ScaledPfd,
    SegmentDef,
    SubsystemDef,
    SystemModel,
)
from .predicates import (
    PredicateEnv,
    PredicateError,
    format_predicate,
    parse_predicate,
)


class ModelFileError(Exception):
    """The document is structurally unusable (I/O, JSON, types, shape)."""


class ModelSemanticsError(Exception):
    """Well-formed document with unresolvable names or predicates."""

    def __init__(self, findings: list[Finding]):
        self.findings = tuple(findings)
        super().__init__(
            "; ".join(str(f) for f in self.findings) or "invalid model"
        )


def _require(obj: dict, key: str, kind: type, where: str) -> Any:
    if key not in obj:
        raise ModelFileError(f"{where}: missing key {key!r}")
    value = obj[key]
    if kind in (int, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ModelFileError(
                f"{where}: {key!r} must be a number, got {type(value).__name__}"
            )
        return float(value)
    if not isinstance(value, kind):
        raise ModelFileError(
            f"{where}: {key!r} must be a {kind.__name__}, "
            f"got {type(value).__name__}"
        )
    return value


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        names = ", ".join(repr(k) for k in sorted(unknown))
        raise ModelFileError(f"{where}: unknown key(s) {names}")


def model_from_dict(document: dict) -> SystemModel:
    """Build a SystemModel from a parsed document.

    Raises ModelFileError for structural problems and ModelSemanticsError
    for unresolvable names/predicates. The result still needs `validate`;
    this function only guarantees the model could be constructed.
    """
    if not isinstance(document, dict):
        raise ModelFileError(
            f"model document must be an object, got {type(document).__name__}"
        )
    _reject_unknown(
        document,
        {"name", "hazard_frequency_per_year", "subsystems", "functions",
         "segments"},
        "document",
    )
    name = _require(document, "name", str, "document")
    hazard = _require(document, "hazard_frequency_per_year", float, "document")

    raw_subsystems = _require(document, "subsystems", list, "document")
    raw_functions = _require(document, "functions", list, "document")
    raw_segments = _require(document, "segments", list, "document")

    findings: list[Finding] = []

    subsystems = []
    for j, entry in enumerate(raw_subsystems):
        where = f"subsystems[{j}]"
        if not isinstance(entry, dict):
            raise ModelFileError(f"{where}: must be an object")
        _reject_unknown(entry, {"name", "pfd"}, where)
        sub_name = _require(entry, "name", str, where)
        pfd_obj = _require(entry, "pfd", dict, where)
        if set(pfd_obj) == {"fixed"}:
            pfd = FixedPfd(_require(pfd_obj, "fixed", float, where))
        elif set(pfd_obj) == {"scaled"}:
            pfd = ScaledPfd(_require(pfd_obj, "scaled", float, where))
        else:
            raise ModelFileError(
                f"{where}: 'pfd' must be exactly one of "
                "{'fixed': value} or {'scaled': weight}"
            )
        subsystems.append(SubsystemDef(sub_name, pfd))

    subsystem_index: dict[str, int] = {}
    for j, sub in enumerate(subsystems):
        if sub.name in subsystem_index:
            findings.append(
                Finding(
                    "error",
                    "duplicate-name",
                    f"duplicate subsystem name {sub.name!r}",
                    f"subsystems[{j}]",
                )
            )
        else:
            subsystem_index[sub.name] = j

    functions = []
    requires_lists = []
    for k, entry in enumerate(raw_functions):
        where = f"functions[{k}]"
        if not isinstance(entry, dict):
            raise ModelFileError(f"{where}: must be an object")
        _reject_unknown(entry, {"name", "requires"}, where)
        fn_name = _require(entry, "name", str, where)
        requires = _require(entry, "requires", list, where)
        for item in requires:
            if not isinstance(item, str):
                raise ModelFileError(
                    f"{where}: 'requires' must be a list of subsystem names"
                )
        functions.append(FunctionDef(fn_name))
        requires_lists.append(requires)

    for k, requires in enumerate(requires_lists):
        for item in requires:
            if item not in subsystem_index:
                findings.append(
                    Finding(
                        "error",
                        "unknown-reference",
                        f"unknown subsystem {item!r} in 'requires'",
                        f"functions[{k}] {functions[k].name!r}",
                    )
                )

    rows = [[0] * len(functions) for _ in subsystems]
    if not findings:  # mapping is only meaningful with resolvable names
        for k, requires in enumerate(requires_lists):
            for item in requires:
                rows[subsystem_index[item]][k] = 1
    mapping = MappingMatrix(tuple(tuple(row) for row in rows))

    function_names = tuple(f.name for f in functions)
    segment_names = []
    for h, entry in enumerate(raw_segments):
        if isinstance(entry, dict) and isinstance(entry.get("name"), str):
            segment_names.append(entry["name"])
        else:
            segment_names.append(f"<segments[{h}]>")

    segments = []
    for h, entry in enumerate(raw_segments):
        where = f"segments[{h}]"
        if not isinstance(entry, dict):
            raise ModelFileError(f"{where}: must be an object")
        _reject_unknown(
            entry, {"name", "tolerance_per_year", "severity", "predicate"}, where
        )
        seg_name = _require(entry, "name", str, where)
        tolerance = _require(entry, "tolerance_per_year", float, where)
        severity = None
        if "severity" in entry:
            severity = _require(entry, "severity", float, where)
        text = _require(entry, "predicate", str, where)
        env = PredicateEnv(
            functions=function_names,
            earlier_segments=tuple(segment_names[:h]),
            unresolved_segments=tuple(segment_names[h:]),
        )
        try:
            predicate = parse_predicate(text, env)
        except PredicateError as exc:
            findings.append(
                Finding(
                    "error",
                    "bad-predicate",
                    str(exc),
                    f"{where} {seg_name!r}",
                )
            )
            continue
        segments.append(SegmentDef(seg_name, tolerance, predicate, severity))

    if findings:
        raise ModelSemanticsError(findings)

    return SystemModel(
        name=name,
        subsystems=tuple(subsystems),
        functions=tuple(functions),
        mapping=mapping,
        hazard_frequency=hazard,
        scheme=ConsequenceScheme(tuple(segments)),
    )


def load_model(path: str | Path) -> SystemModel:
    """Read and build a model from a JSON file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path} is not valid JSON: {exc}") from exc
    return model_from_dict(document)


def model_to_dict(model: SystemModel) -> dict:
    """Serialize back to the file schema; inverse of `model_from_dict`."""
    subsystems = []
    for sub in model.subsystems:
        if isinstance(sub.pfd, FixedPfd):
            pfd: dict = {"fixed": sub.pfd.value}
        else:
            pfd = {"scaled": sub.pfd.weight}
        subsystems.append({"name": sub.name, "pfd": pfd})

    functions = []
    for k, fn in enumerate(model.functions):
        requires = [
            model.subsystems[j].name
            for j in model.mapping.required_subsystems(k)
        ]
        functions.append({"name": fn.name, "requires": requires})

    segments = []
    for segment in model.scheme.segments:
        entry: dict = {
            "name": segment.name,
            "tolerance_per_year": segment.tolerance,
        }
        if segment.severity is not None:
            entry["severity"] = segment.severity
        entry["predicate"] = format_predicate(segment.predicate)
        segments.append(entry)

    return {
        "name": model.name,
        "hazard_frequency_per_year": model.hazard_frequency,
        "subsystems": subsystems,
        "functions": functions,
        "segments": segments,
    }


def save_model(model: SystemModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8"
    )


def bundled_model_path(name: str = "tunnel") -> Path:
    """Filesystem path of a model shipped with the package."""
    resource = resources.files("silalloc").joinpath("data").joinpath(
        f"{name}.json"
    )
    path = Path(str(resource))
    if not path.is_file():
        raise ModelFileError(f"no bundled model named {name!r}")
    return path


def load_bundled_model(name: str = "tunnel") -> SystemModel:
    return load_model(bundled_model_path(name))
