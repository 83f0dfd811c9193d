"""Shared fixtures and model builders for the test suite."""

import random

import pytest

from silalloc.model import (
    ConsequenceScheme,
    FixedPfd,
    FunctionDef,
    MappingMatrix,
    SegmentDef,
    SubsystemDef,
    SystemModel,
)
from silalloc.modelfile import load_bundled_model, model_from_dict
from silalloc.predicates import (
    And,
    ConstFalse,
    ConstTrue,
    FunctionLit,
    Not,
    Or,
    SegmentRef,
)


@pytest.fixture(scope="session")
def tunnel_model():
    return load_bundled_model("tunnel")


@pytest.fixture(scope="session")
def tunnel_path():
    from silalloc.modelfile import bundled_model_path

    return bundled_model_path("tunnel")


def build_model(subsystems, functions, segments, hazard=1.0, name="test model"):
    """Compact model builder going through the document loader.

    subsystems: [(name, {"fixed": x} | {"scaled": w}), ...]
    functions:  [(name, [required subsystem names]), ...]
    segments:   [(name, tolerance, predicate text[, severity]), ...]
    """
    document = {
        "name": name,
        "hazard_frequency_per_year": hazard,
        "subsystems": [{"name": n, "pfd": spec} for n, spec in subsystems],
        "functions": [{"name": n, "requires": req} for n, req in functions],
        "segments": [],
    }
    for entry in segments:
        seg = {"name": entry[0], "tolerance_per_year": entry[1],
               "predicate": entry[2]}
        if len(entry) > 3:
            seg["severity"] = entry[3]
        document["segments"].append(seg)
    return model_from_dict(document)


# ---------------------------------------------------------------------------
# Random model generation (seeded; used by the property and acceptance tests)


def random_raw_predicate(rng: random.Random, function_names, depth=3):
    """Random boolean expression over function literals."""
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        choice = rng.random()
        if choice < 0.1:
            return ConstTrue()
        if choice < 0.2:
            return ConstFalse()
        k = rng.randrange(len(function_names))
        return FunctionLit(function_names[k], k)
    if roll < 0.55:
        return Not(random_raw_predicate(rng, function_names, depth - 1))
    left = random_raw_predicate(rng, function_names, depth - 1)
    right = random_raw_predicate(rng, function_names, depth - 1)
    return And(left, right) if roll < 0.8 else Or(left, right)


def one_hot_scheme(rng: random.Random, function_names, n_segments):
    """Random segment predicates repaired into an exact partition.

    Segment h claims states matching its raw predicate and none of the
    earlier segments; the last segment catches everything left. Exactly one
    segment then claims every state by construction.
    """
    names = [f"G{h}" for h in range(n_segments)]
    segments = []
    for h in range(n_segments - 1):
        node = random_raw_predicate(rng, function_names)
        for h2 in range(h):
            node = And(node, Not(SegmentRef(names[h2], h2)))
        segments.append(
            SegmentDef(names[h], tolerance=rng.uniform(0.01, 10.0), predicate=node)
        )
    catch_all = ConstTrue()
    for h2 in range(n_segments - 1):
        term = Not(SegmentRef(names[h2], h2))
        catch_all = term if h2 == 0 else And(catch_all, term)
    segments.append(
        SegmentDef(
            names[n_segments - 1],
            tolerance=rng.uniform(0.01, 10.0),
            predicate=catch_all,
        )
    )
    return ConsequenceScheme(tuple(segments))


def random_model(
    rng: random.Random,
    max_subsystems=8,
    max_functions=4,
    max_segments=4,
    disjoint=False,
):
    """Random valid model; with disjoint=True no subsystem is shared."""
    if disjoint:
        m = rng.randint(1, max_functions)
        l = rng.randint(m, max_subsystems)
    else:
        l = rng.randint(1, max_subsystems)
        m = rng.randint(1, max_functions)
    n = rng.randint(1, max_segments)

    subsystem_names = [f"S{j}" for j in range(l)]
    function_names = [f"F{k}" for k in range(m)]

    rows = [[0] * m for _ in range(l)]
    if disjoint:
        pool = list(range(l))
        rng.shuffle(pool)
        # slice the first `used` pooled subsystems into m nonempty groups;
        # any leftover subsystems belong to no function
        used = rng.randint(m, l)
        cuts = sorted(rng.sample(range(1, used), m - 1)) if m > 1 else []
        bounds = [0] + cuts + [used]
        for k in range(m):
            for j in pool[bounds[k]:bounds[k + 1]]:
                rows[j][k] = 1
    else:
        for k in range(m):
            chosen = rng.sample(range(l), rng.randint(1, l))
            for j in chosen:
                rows[j][k] = 1

    subsystems = tuple(
        SubsystemDef(name, FixedPfd(rng.random())) for name in subsystem_names
    )
    return SystemModel(
        name="random",
        subsystems=subsystems,
        functions=tuple(FunctionDef(n) for n in function_names),
        mapping=MappingMatrix(tuple(tuple(r) for r in rows)),
        hazard_frequency=rng.uniform(0.1, 5.0),
        scheme=one_hot_scheme(rng, function_names, n),
    )


def random_pfds(rng: random.Random, l: int):
    return tuple(rng.random() for _ in range(l))
