"""Boolean consequence predicates.

A consequence segment is claimed by a state when its predicate evaluates
to 1 over that state's function-success row. Predicates are boolean
expressions over two kinds of names:

* function literals -- 1 iff the named mitigation function succeeds in
  the current state;
* segment references -- the already-computed value of a *strictly
  earlier* segment's predicate for the same state (this is how
  "none of the above" segments are expressed).

Grammar (whitespace-insensitive, identifiers case-sensitive)::

    expr  := or
    or    := and  ( ('|' | 'or')  and  )*
    and   := unary ( ('&' | 'and') unary )*
    unary := ('!' | 'not') unary | atom
    atom  := 'true' | 'false' | IDENT | '(' expr ')'

Precedence is ! > & > | ; & and | are left-associative. An IDENT is
resolved against function names first, then earlier segment names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union


class PredicateError(ValueError):
    """Base class for predicate parsing problems."""


class PredicateSyntaxError(PredicateError):
    """Malformed expression text.

    Attributes:
        position: 0-based character offset of the offending token.
        expected: human-readable description of what was expected there.
    """

    def __init__(self, message: str, position: int, expected: str):
        super().__init__(message)
        self.position = position
        self.expected = expected


class PredicateNameError(PredicateError):
    """Identifier that does not resolve in the current environment."""

    def __init__(self, message: str, name: str, position: int):
        super().__init__(message)
        self.name = name
        self.position = position


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class ConstTrue:
    pass


@dataclass(frozen=True)
class ConstFalse:
    pass


@dataclass(frozen=True)
class FunctionLit:
    """Success literal of the function at `index` in the model's function list."""

    name: str
    index: int


@dataclass(frozen=True)
class SegmentRef:
    """Value of the strictly earlier segment at `index` in the scheme."""

    name: str
    index: int


@dataclass(frozen=True)
class Not:
    operand: "PredicateAst"


@dataclass(frozen=True)
class And:
    left: "PredicateAst"
    right: "PredicateAst"


@dataclass(frozen=True)
class Or:
    left: "PredicateAst"
    right: "PredicateAst"


PredicateAst = Union[ConstTrue, ConstFalse, FunctionLit, SegmentRef, Not, And, Or]


@dataclass(frozen=True)
class PredicateEnv:
    """Name environment a predicate is parsed against.

    `functions` is the full ordered function-name list; `earlier_segments`
    the names of segments evaluated before the one being parsed.
    `unresolved_segments` (the current and later segment names) is optional
    and only sharpens error messages for out-of-order references.
    """

    functions: tuple[str, ...]
    earlier_segments: tuple[str, ...] = ()
    unresolved_segments: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvalContext:
    """One state's inputs: function-success row plus earlier segment values.

    `earlier_values[h]` must hold the already-computed value of segment h
    for the same state, for every h before the segment being evaluated.
    """

    function_row: Sequence[int]
    earlier_values: Sequence[int] = ()


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|[&|!()]")
_KEYWORDS = {"true": "TRUE", "false": "FALSE", "not": "NOT", "and": "AND", "or": "OR"}
_SYMBOLS = {"&": "AND", "|": "OR", "!": "NOT", "(": "LPAREN", ")": "RPAREN"}

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise PredicateSyntaxError(
                f"unexpected character {text[pos]!r} at position {pos}",
                position=pos,
                expected="identifier, 'true', 'false', '!', '(' or operator",
            )
        lexeme = match.group()
        if lexeme in _SYMBOLS:
            kind = _SYMBOLS[lexeme]
        else:
            kind = _KEYWORDS.get(lexeme, "IDENT")
        tokens.append(_Token(kind, lexeme, pos))
        pos = match.end()
    tokens.append(_Token("EOF", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, tokens: list[_Token], env: PredicateEnv):
        self.tokens = tokens
        self.env = env
        self.current = 0

    def peek(self) -> _Token:
        return self.tokens[self.current]

    def advance(self) -> _Token:
        token = self.tokens[self.current]
        if token.kind != "EOF":
            self.current += 1
        return token

    def match(self, kind: str) -> bool:
        if self.peek().kind == kind:
            self.advance()
            return True
        return False

    def expression(self) -> PredicateAst:
        return self.or_expr()

    def or_expr(self) -> PredicateAst:
        node = self.and_expr()
        while self.match("OR"):
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> PredicateAst:
        node = self.unary()
        while self.match("AND"):
            node = And(node, self.unary())
        return node

    def unary(self) -> PredicateAst:
        if self.match("NOT"):
            return Not(self.unary())
        return self.atom()

    def atom(self) -> PredicateAst:
        token = self.peek()
        if token.kind == "TRUE":
            self.advance()
            return ConstTrue()
        if token.kind == "FALSE":
            self.advance()
            return ConstFalse()
        if token.kind == "IDENT":
            self.advance()
            return self.resolve(token)
        if token.kind == "LPAREN":
            self.advance()
            node = self.expression()
            closing = self.peek()
            if closing.kind != "RPAREN":
                raise PredicateSyntaxError(
                    f"expected ')' at position {closing.position}, "
                    f"got {closing.text or 'end of input'!r}",
                    position=closing.position,
                    expected="')'",
                )
            self.advance()
            return node
        got = token.text or "end of input"
        raise PredicateSyntaxError(
            f"expected an atom at position {token.position}, got {got!r}",
            position=token.position,
            expected="'true', 'false', identifier or '('",
        )

    def resolve(self, token: _Token) -> PredicateAst:
        name = token.text
        if name in self.env.functions:
            return FunctionLit(name, self.env.functions.index(name))
        if name in self.env.earlier_segments:
            return SegmentRef(name, self.env.earlier_segments.index(name))
        if name in self.env.unresolved_segments:
            raise PredicateNameError(
                f"segment {name!r} referenced at position {token.position} is not "
                "evaluated before this segment (only strictly earlier segments "
                "may be referenced)",
                name=name,
                position=token.position,
            )
        raise PredicateNameError(
            f"unknown identifier {name!r} at position {token.position}",
            name=name,
            position=token.position,
        )


def parse_predicate(text: str, env: PredicateEnv) -> PredicateAst:
    """Parse `text` into an AST, resolving names against `env`.

    Raises PredicateSyntaxError for malformed input and PredicateNameError
    for identifiers that are not a declared function or an earlier segment.
    """
    if not env.functions:
        raise ValueError("predicate environment declares no functions")
    if not text.strip():
        raise PredicateSyntaxError(
            "empty predicate expression", position=0, expected="an expression"
        )
    parser = _Parser(_tokenize(text), env)
    node = parser.expression()
    trailing = parser.peek()
    if trailing.kind != "EOF":
        raise PredicateSyntaxError(
            f"unexpected {trailing.text!r} after expression "
            f"at position {trailing.position}",
            position=trailing.position,
            expected="end of input or an operator",
        )
    return node


# ---------------------------------------------------------------------------
# Evaluation and printing

def eval_predicate(ast: PredicateAst, ctx: EvalContext) -> int:
    """Evaluate to 0 or 1. Total: resolution errors cannot occur here."""
    if isinstance(ast, ConstTrue):
        return 1
    if isinstance(ast, ConstFalse):
        return 0
    if isinstance(ast, FunctionLit):
        return 1 if ctx.function_row[ast.index] else 0
    if isinstance(ast, SegmentRef):
        return 1 if ctx.earlier_values[ast.index] else 0
    if isinstance(ast, Not):
        return 1 - eval_predicate(ast.operand, ctx)
    if isinstance(ast, And):
        if not eval_predicate(ast.left, ctx):
            return 0
        return eval_predicate(ast.right, ctx)
    if isinstance(ast, Or):
        if eval_predicate(ast.left, ctx):
            return 1
        return eval_predicate(ast.right, ctx)
    raise TypeError(f"not a predicate node: {ast!r}")


_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_ATOM = 4


def _precedence(ast: PredicateAst) -> int:
    if isinstance(ast, Or):
        return _PREC_OR
    if isinstance(ast, And):
        return _PREC_AND
    if isinstance(ast, Not):
        return _PREC_NOT
    return _PREC_ATOM


def format_predicate(ast: PredicateAst) -> str:
    """Canonical text form; parse_predicate(format_predicate(a), env) == a."""
    if isinstance(ast, ConstTrue):
        return "true"
    if isinstance(ast, ConstFalse):
        return "false"
    if isinstance(ast, (FunctionLit, SegmentRef)):
        return ast.name
    if isinstance(ast, Not):
        inner = format_predicate(ast.operand)
        if _precedence(ast.operand) < _PREC_NOT:
            inner = f"({inner})"
        return f"!{inner}"
    if isinstance(ast, (And, Or)):
        own = _precedence(ast)
        op = "&" if isinstance(ast, And) else "|"
        left = format_predicate(ast.left)
        if _precedence(ast.left) < own:
            left = f"({left})"
        right = format_predicate(ast.right)
        # parenthesize an equal-precedence right child so left-associative
        # reparsing reproduces the original tree shape
        if _precedence(ast.right) <= own:
            right = f"({right})"
        return f"{left} {op} {right}"
    raise TypeError(f"not a predicate node: {ast!r}")


def referenced_names(ast: PredicateAst) -> tuple[set[str], set[str]]:
    """Return (function names, segment names) referenced anywhere in `ast`."""
    functions: set[str] = set()
    segments: set[str] = set()

    def walk(node: PredicateAst) -> None:
        if isinstance(node, FunctionLit):
            functions.add(node.name)
        elif isinstance(node, SegmentRef):
            segments.add(node.name)
        elif isinstance(node, Not):
            walk(node.operand)
        elif isinstance(node, (And, Or)):
            walk(node.left)
            walk(node.right)

    walk(ast)
    return functions, segments
