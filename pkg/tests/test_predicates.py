"""Predicate grammar, evaluation and round-trip properties."""

import random

import pytest

from silalloc.predicates import (
    And,
    ConstFalse,
    ConstTrue,
    EvalContext,
    FunctionLit,
    Not,
    Or,
    PredicateEnv,
    PredicateNameError,
    PredicateSyntaxError,
    SegmentRef,
    eval_predicate,
    format_predicate,
    parse_predicate,
)

TUNNEL_ENV = PredicateEnv(functions=("AFS", "MFS", "ASE", "MSE", "EE"))


def test_parse_conjunction_of_negated_literals():
    ast = parse_predicate("!ASE & !MSE & !EE", TUNNEL_ENV)
    assert ast == And(
        And(Not(FunctionLit("ASE", 2)), Not(FunctionLit("MSE", 3))),
        Not(FunctionLit("EE", 4)),
    )


def test_parse_constants():
    assert parse_predicate("false", TUNNEL_ENV) == ConstFalse()
    assert parse_predicate("true", TUNNEL_ENV) == ConstTrue()


def test_parse_segment_reference():
    env = PredicateEnv(
        functions=("AFS", "MFS", "ASE", "MSE", "EE"),
        earlier_segments=("CAT",),
    )
    ast = parse_predicate("!AFS & !MFS & !EE & !CAT", env)
    assert ast == And(
        And(
            And(Not(FunctionLit("AFS", 0)), Not(FunctionLit("MFS", 1))),
            Not(FunctionLit("EE", 4)),
        ),
        Not(SegmentRef("CAT", 0)),
    )


def test_keyword_synonyms():
    assert parse_predicate("not ASE and not MSE", TUNNEL_ENV) == parse_predicate(
        "!ASE & !MSE", TUNNEL_ENV
    )
    assert parse_predicate("ASE or MSE", TUNNEL_ENV) == parse_predicate(
        "ASE | MSE", TUNNEL_ENV
    )


def test_precedence_not_over_and_over_or():
    ast = parse_predicate("!AFS & MFS | ASE", TUNNEL_ENV)
    assert ast == Or(
        And(Not(FunctionLit("AFS", 0)), FunctionLit("MFS", 1)),
        FunctionLit("ASE", 2),
    )


def test_parentheses_override_precedence():
    ast = parse_predicate("!(AFS | MFS) & ASE", TUNNEL_ENV)
    assert ast == And(
        Not(Or(FunctionLit("AFS", 0), FunctionLit("MFS", 1))),
        FunctionLit("ASE", 2),
    )


def test_whitespace_insensitive():
    assert parse_predicate("!ASE&!MSE", TUNNEL_ENV) == parse_predicate(
        "  ! ASE \t&\n ! MSE ", TUNNEL_ENV
    )


def test_syntax_error_at_end_of_input():
    with pytest.raises(PredicateSyntaxError) as err:
        parse_predicate("(AFS & ", TUNNEL_ENV)
    assert err.value.position == 7
    assert "atom" in err.value.expected or "'('" in err.value.expected


def test_syntax_error_missing_close_paren():
    with pytest.raises(PredicateSyntaxError) as err:
        parse_predicate("(AFS | MFS", TUNNEL_ENV)
    assert "')'" in err.value.expected


def test_syntax_error_trailing_garbage():
    with pytest.raises(PredicateSyntaxError):
        parse_predicate("AFS MFS", TUNNEL_ENV)


def test_syntax_error_bad_character():
    with pytest.raises(PredicateSyntaxError) as err:
        parse_predicate("AFS ^ MFS", TUNNEL_ENV)
    assert err.value.position == 4


def test_unknown_identifier():
    with pytest.raises(PredicateNameError) as err:
        parse_predicate("!ASE & XYZ", TUNNEL_ENV)
    assert err.value.name == "XYZ"
    assert "XYZ" in str(err.value)


def test_reference_to_later_segment_is_rejected():
    env = PredicateEnv(
        functions=("AFS",),
        earlier_segments=("CAT",),
        unresolved_segments=("MAJ", "MIN"),
    )
    with pytest.raises(PredicateNameError) as err:
        parse_predicate("!MIN", env)
    assert err.value.name == "MIN"
    assert "earlier" in str(err.value)


def test_identifiers_case_sensitive():
    env = PredicateEnv(functions=("TOp",))
    with pytest.raises(PredicateNameError):
        parse_predicate("top", env)


def test_empty_text_rejected():
    with pytest.raises(PredicateSyntaxError):
        parse_predicate("   ", TUNNEL_ENV)


def test_empty_env_rejected():
    with pytest.raises(ValueError):
        parse_predicate("true", PredicateEnv(functions=()))


# ---------------------------------------------------------------------------
# Evaluation

def test_eval_negated_literals_at_all_success():
    ast = parse_predicate("!ASE & !MSE & !EE", TUNNEL_ENV)
    assert eval_predicate(ast, EvalContext((1, 1, 1, 1, 1))) == 0
    assert eval_predicate(ast, EvalContext((0, 0, 0, 0, 0))) == 1


def test_eval_complement_via_segment_refs():
    env = PredicateEnv(
        functions=TUNNEL_ENV.functions,
        earlier_segments=("CAT", "MAJ", "MOD"),
    )
    ast = parse_predicate("!CAT & !MAJ & !MOD", env)
    assert eval_predicate(ast, EvalContext((1, 1, 1, 1, 1), (0, 0, 0))) == 1
    assert eval_predicate(ast, EvalContext((1, 1, 1, 1, 1), (0, 1, 0))) == 0


def test_eval_mixed_function_and_segment_row():
    # AFS and MFS failed, ASE and MSE succeeded, EE failed, earlier CAT = 0
    env = PredicateEnv(
        functions=TUNNEL_ENV.functions, earlier_segments=("CAT",)
    )
    ast = parse_predicate("!AFS & !MFS & !EE & !CAT", env)
    assert eval_predicate(ast, EvalContext((0, 0, 1, 1, 0), (0,))) == 1


# ---------------------------------------------------------------------------
# Properties (seeded random ASTs)

def _random_context(rng, env):
    return EvalContext(
        function_row=tuple(rng.randint(0, 1) for _ in env.functions),
        earlier_values=tuple(rng.randint(0, 1) for _ in env.earlier_segments),
    )


def _random_ast(rng, env, depth=4):
    roll = rng.random()
    if depth <= 0 or roll < 0.3:
        pick = rng.random()
        if pick < 0.15:
            return ConstTrue()
        if pick < 0.3:
            return ConstFalse()
        if env.earlier_segments and pick < 0.5:
            h = rng.randrange(len(env.earlier_segments))
            return SegmentRef(env.earlier_segments[h], h)
        k = rng.randrange(len(env.functions))
        return FunctionLit(env.functions[k], k)
    if roll < 0.5:
        return Not(_random_ast(rng, env, depth - 1))
    left = _random_ast(rng, env, depth - 1)
    right = _random_ast(rng, env, depth - 1)
    return And(left, right) if roll < 0.75 else Or(left, right)


def test_format_parse_round_trip():
    rng = random.Random(20240817)
    env = PredicateEnv(
        functions=("AFS", "MFS", "ASE", "MSE", "EE"),
        earlier_segments=("CAT", "MAJ"),
    )
    for _ in range(500):
        ast = _random_ast(rng, env)
        assert parse_predicate(format_predicate(ast), env) == ast


def test_eval_respects_de_morgan():
    rng = random.Random(987654)
    env = PredicateEnv(
        functions=("A", "B", "C"), earlier_segments=("G0",)
    )
    for _ in range(500):
        a = _random_ast(rng, env, depth=3)
        b = _random_ast(rng, env, depth=3)
        ctx = _random_context(rng, env)
        assert eval_predicate(Not(And(a, b)), ctx) == eval_predicate(
            Or(Not(a), Not(b)), ctx
        )
        assert eval_predicate(Not(Or(a, b)), ctx) == eval_predicate(
            And(Not(a), Not(b)), ctx
        )


def test_segment_threading_matches_explicit_expansion(tunnel_model):
    """Evaluating segments in order with threaded earlier values equals
    substituting the earlier definitions inline."""
    segments = tunnel_model.scheme.segments
    for key in range(1 << 5):
        row = tuple((key >> k) & 1 for k in range(5))
        values = []
        for segment in segments:
            values.append(
                eval_predicate(segment.predicate, EvalContext(row, values))
            )
        cat = int(not row[2] and not row[3] and not row[4])
        major = int(not row[0] and not row[1] and not row[4] and not cat)
        moderate = int(not row[0] and not row[1] and row[4])
        minor = int(not moderate and not major and not cat)
        assert values == [cat, major, moderate, minor, 0]
