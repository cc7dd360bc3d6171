"""Line-oriented IF/THEN rule text format.

One statement per line::

    IF ecg IS Medium AND age IS Young THEN disease_level IS High

Keywords are case-insensitive; variable and term labels keep their case.
Blank lines and ``#`` comments are ignored. A trailing ``# pinned`` comment on
a statement line is the one recognized annotation: the renderer emits it for
pinned rules so that parse(render(rules)) reproduces provenance exactly.
``OR`` is reserved and rejected.
"""

from __future__ import annotations

import re
from typing import Iterable

from .rules import GENERATED, PINNED, Rule, make_rule

_KEYWORDS = {"if", "is", "and", "then", "or"}
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_TOKEN = re.compile(r"\S+")


class ParseError(ValueError):
    """Malformed rule text, with 1-based line and column of the offense."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class _Tokens:
    def __init__(self, line_no: int, text: str):
        self.line_no = line_no
        self.items = [(m.start() + 1, m.group()) for m in _TOKEN.finditer(text)]
        self.pos = 0
        self.end_col = len(text) + 1

    def peek(self) -> tuple[int, str] | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def next(self, expect: str) -> tuple[int, str]:
        tok = self.peek()
        if tok is None:
            raise ParseError(self.line_no, self.end_col, f"expected {expect}")
        self.pos += 1
        return tok

    def keyword(self, word: str) -> None:
        col, tok = self.next(f"'{word.upper()}'")
        if tok.lower() != word:
            raise ParseError(
                self.line_no, col, f"expected '{word.upper()}', got {tok!r}"
            )

    def identifier(self, what: str) -> str:
        col, tok = self.next(what)
        low = tok.lower()
        if low == "or":
            raise ParseError(self.line_no, col, "'OR' is reserved and not supported")
        if low in _KEYWORDS or not _IDENT.match(tok):
            raise ParseError(self.line_no, col, f"expected {what}, got {tok!r}")
        return tok


def _parse_statement(line_no: int, text: str, provenance: str) -> Rule:
    toks = _Tokens(line_no, text)
    toks.keyword("if")
    clauses = []
    while True:
        var = toks.identifier("a variable name")
        toks.keyword("is")
        term = toks.identifier("a term label")
        clauses.append((var, term))
        col_tok = toks.peek()
        if col_tok is None:
            raise ParseError(line_no, toks.end_col, "expected 'AND' or 'THEN'")
        col, tok = col_tok
        low = tok.lower()
        if low == "and":
            toks.pos += 1
            continue
        if low == "then":
            toks.pos += 1
            break
        if low == "or":
            raise ParseError(line_no, col, "'OR' is reserved and not supported")
        raise ParseError(line_no, col, f"expected 'AND' or 'THEN', got {tok!r}")

    out_var = toks.identifier("an output variable name")
    toks.keyword("is")
    out_term = toks.identifier("an output term label")
    trailing = toks.peek()
    if trailing is not None:
        raise ParseError(line_no, trailing[0], f"unexpected {trailing[1]!r} after rule")
    try:
        return make_rule(clauses, (out_var, out_term), provenance)
    except ValueError as e:
        raise ParseError(line_no, 1, str(e)) from None


def parse_rules(text: str) -> list[Rule]:
    """Parse rule-DSL source into rules.

    Purely syntactic: variable and term names are checked against a knowledge
    base at bind time, not here.
    """
    rules = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stmt, _, comment = raw.partition("#")
        provenance = PINNED if comment.strip().lower() == "pinned" else GENERATED
        if not stmt.strip():
            continue
        rules.append(_parse_statement(line_no, stmt, provenance))
    return rules


def render_rule(rule: Rule, annotate: bool = True) -> str:
    parts = " AND ".join(f"{v} IS {t}" for v, t in rule.antecedent.clauses)
    line = f"IF {parts} THEN {rule.consequent[0]} IS {rule.consequent[1]}"
    if annotate and rule.provenance == PINNED:
        line += "  # pinned"
    return line


def render_rules(rules: Iterable[Rule]) -> str:
    """Inverse of parse_rules: parse_rules(render_rules(rs)) == rs."""
    lines = [render_rule(r) for r in rules]
    return "\n".join(lines) + ("\n" if lines else "")
