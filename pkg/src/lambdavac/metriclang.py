"""Text formats: expressions and ``.metric`` solution files.

Expression grammar (``^`` binds tightest and associates to the right,
unary minus sits between ``*`` and ``^``)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | 'pi' | IDENT | ('sin' | 'cos') '(' expr ')' | '(' expr ')'

Trees are built as written: a chain ``a + b + c`` becomes one sum, a
parenthesised sum inside it stays a separate node, ``a - b`` is
``a + (-1)*b`` and ``a / b`` is ``a * b^(-1)``.  Only chains whose
operands are all numbers are folded.  This keeps
``parse(serialize(e))`` structurally equal to ``e`` for parsed input.

Solution files are line oriented::

    # comment
    coords t x y z
    param Lambda = 1
    param m = 1
    a = 2 + cos(x)

or, instead of ``a``, ten lines ``g i j = <expr>`` with ``i <= j``.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .symcore import Add, Cos, Expr, Mul, Num, Pow, Sin, Sym, power, serialize, substitute_many

__all__ = [
    "ParseError",
    "SolutionFileError",
    "SolutionSpec",
    "SolutionWarning",
    "parse_expression",
    "parse_solution_file",
    "read_solution_file",
    "serialize_expression",
    "format_solution_file",
]

RESERVED = frozenset({"sin", "cos", "pi"})


class ParseError(ValueError):
    """Malformed expression text; ``offset`` is a 0-based character index."""

    def __init__(self, message: str, text: str, offset: int, line: int | None = None):
        self.message = message
        self.text = text
        self.offset = offset
        self.line = line
        where = f"line {line}, offset {offset}" if line is not None else f"offset {offset}"
        super().__init__(f"{message} at {where}")

    def pointer(self) -> str:
        """The offending text with a caret under the error position."""
        return f"{self.text}\n{' ' * self.offset}^"


class SolutionFileError(ValueError):
    """Invalid ``.metric`` file content; ``line`` is 1-based (0 for whole-file)."""

    def __init__(self, message: str, line: int = 0):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class SolutionWarning(UserWarning):
    """Accepted but unusual input (for example ``m = 0``)."""


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, name, op, end
    text: str
    pos: int


def _tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    out.append(_Tok("end", "", len(text)))
    return out


def _number(text: str) -> Num:
    if re.fullmatch(r"\d+", text):
        return Num(int(text))
    return Num(Fraction(text))


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------


def _fold_sum(terms: list) -> Expr:
    if len(terms) == 1:
        return terms[0]
    if all(isinstance(t, Num) for t in terms):
        return Num(_sum_values(t.value for t in terms))
    return Add(*terms)


def _sum_values(values):
    total = Fraction(0)
    for v in values:
        total = total + v if not isinstance(total, float) and not isinstance(v, float) else float(total) + float(v)
    return total


def _fold_product(factors: list) -> Expr:
    if len(factors) == 1:
        return factors[0]
    if all(isinstance(f, Num) for f in factors):
        out = Fraction(1)
        for f in factors:
            v = f.value
            out = out * v if not isinstance(out, float) and not isinstance(v, float) else float(out) * float(v)
        return Num(out)
    return Mul(*factors)


def _negate(e: Expr) -> Expr:
    if isinstance(e, Num):
        return Num(-e.value)
    return Mul(Num(-1), e)


def _power(base: Expr, exponent: Expr) -> Expr:
    if isinstance(base, Num):
        folded = power(base, exponent)
        if isinstance(folded, Num):
            return folded
    return Pow(base, exponent)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message: str, tok: _Tok | None = None):
        tok = tok or self.cur
        raise ParseError(message, self.text, tok.pos)

    def unexpected(self):
        tok = self.cur
        if tok.kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {tok.text!r}")

    def take(self, text: str) -> bool:
        if self.cur.kind == "op" and self.cur.text == text:
            self.i += 1
            return True
        return False

    def parse(self) -> Expr:
        if self.cur.kind == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.cur.kind != "end":
            if self.cur.text == ")":
                self.fail("unbalanced parenthesis ')'")
            self.unexpected()
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while True:
            if self.take("+"):
                terms.append(self.term())
            elif self.take("-"):
                terms.append(_negate(self.term()))
            else:
                return _fold_sum(terms)

    def term(self) -> Expr:
        factors = [self.unary()]
        while True:
            if self.take("*"):
                factors.append(self.unary())
            elif self.take("/"):
                factors.append(_power(self.unary(), Num(-1)))
            else:
                return _fold_product(factors)

    def unary(self) -> Expr:
        if self.take("-"):
            return _negate(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.cur.kind == "op" and self.cur.text == "^":
            tok = self.toks[self.i + 1]
            self.i += 1
            exponent = self.unary()
            if not isinstance(exponent, Num):
                self.fail("exponent must be a numeric constant", tok)
            return _power(base, exponent)
        return base

    def atom(self) -> Expr:
        tok = self.cur
        if tok.kind == "num":
            self.i += 1
            return _number(tok.text)
        if tok.kind == "name":
            self.i += 1
            if tok.text == "pi":
                return Num(math.pi)
            if tok.text in ("sin", "cos"):
                paren = self.cur
                if not self.take("("):
                    self.fail(f"expected '(' after {tok.text}")
                arg = self.expr()
                self.close(paren)
                return Sin(arg) if tok.text == "sin" else Cos(arg)
            if self.cur.kind == "op" and self.cur.text == "(":
                self.fail(f"unknown function {tok.text!r}", tok)
            return Sym(tok.text)
        if self.take("("):
            e = self.expr()
            self.close(tok)
            return e
        self.unexpected()

    def close(self, opener: _Tok):
        if not self.take(")"):
            if self.cur.kind == "end":
                raise ParseError("unbalanced parenthesis '('", self.text, opener.pos)
            self.unexpected()


def parse_expression(text: str) -> Expr:
    """Parse one expression; raises :class:`ParseError` with an offset."""
    return _Parser(text).parse()


def serialize_expression(e: Expr) -> str:
    """Canonical text accepted by :func:`parse_expression`."""
    return serialize(e)


# ---------------------------------------------------------------------------
# solution files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolutionSpec:
    """Validated content of a ``.metric`` file.

    ``mode`` is ``"ansatz"`` (``a`` set) or ``"explicit"`` (``components``
    holds the ten ``(i, j)``, ``i <= j`` entries).  Expressions keep
    parameter names symbolic; :meth:`bound` substitutes the values.
    """

    coords: tuple
    params: Mapping
    mode: str
    a: Expr | None = None
    components: Mapping = field(default_factory=dict)
    name: str | None = None

    @property
    def lam(self):
        return self.params.get("Lambda")

    @property
    def m(self):
        return self.params.get("m")

    def bound(self, e: Expr, overrides: Mapping | None = None) -> Expr:
        values = dict(self.params)
        values.update(overrides or {})
        return substitute_many(e, {k: Num(v) for k, v in values.items()})


_COORDS = re.compile(r"coords\s+(.*)")
_PARAM = re.compile(r"param\s+([A-Za-z_][A-Za-z0-9_]*)\s*=(.*)")
_COMP = re.compile(r"g\s+(\d+)\s+(\d+)\s*=(.*)")
_A = re.compile(r"a\s*=(.*)")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _expr_at(text: str, lineno: int, column: int) -> Expr:
    try:
        return parse_expression(text)
    except ParseError as err:
        raise ParseError(err.message, err.text, err.offset + column, line=lineno) from None


def parse_solution_file(text: str, name: str | None = None) -> SolutionSpec:
    """Parse and validate ``.metric`` text (LF or CRLF line endings)."""
    coords = None
    params: dict = {}
    a = None
    a_line = 0
    comps: dict = {}
    comp_lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        body = line.strip()
        if not body:
            continue
        indent = len(line) - len(line.lstrip())
        if m := _COORDS.fullmatch(body):
            if coords is not None:
                raise SolutionFileError("duplicate coords line", lineno)
            names = tuple(m.group(1).split())
            if len(names) != 4:
                raise SolutionFileError(f"expected 4 coordinate names, got {len(names)}", lineno)
            for n in names:
                if not _IDENT.fullmatch(n) or n in RESERVED:
                    raise SolutionFileError(f"bad coordinate name {n!r}", lineno)
            if len(set(names)) != 4:
                raise SolutionFileError("coordinate names must be distinct", lineno)
            coords = names
        elif m := _PARAM.fullmatch(body):
            pname = m.group(1)
            if pname in params:
                raise SolutionFileError(f"duplicate param {pname!r}", lineno)
            if pname in RESERVED:
                raise SolutionFileError(f"reserved name {pname!r}", lineno)
            value = _expr_at(m.group(2), lineno, indent + m.start(2))
            if not isinstance(value, Num):
                raise SolutionFileError(f"param {pname!r} must be a number", lineno)
            params[pname] = value.value
        elif m := _COMP.fullmatch(body):
            i, j = int(m.group(1)), int(m.group(2))
            if i > 3 or j > 3:
                raise SolutionFileError(f"component index out of range: g {i} {j}", lineno)
            key = (min(i, j), max(i, j))
            if key in comps:
                raise SolutionFileError(f"duplicate component g {key[0]} {key[1]}", lineno)
            comps[key] = _expr_at(m.group(3), lineno, indent + m.start(3))
            comp_lines[key] = lineno
        elif m := _A.fullmatch(body):
            if a is not None:
                raise SolutionFileError("duplicate 'a' line", lineno)
            a = _expr_at(m.group(1), lineno, indent + m.start(1))
            a_line = lineno
        else:
            word = body.split()[0]
            raise SolutionFileError(f"unrecognized directive {word!r}", lineno)

    if coords is None:
        raise SolutionFileError("missing 'coords' line")
    if a is not None and comps:
        raise SolutionFileError("give either 'a' or metric components, not both", a_line)
    if a is None and not comps:
        raise SolutionFileError("no 'a' line and no metric components")
    for pname in params:
        if pname in coords:
            raise SolutionFileError(f"param {pname!r} shadows a coordinate")
    allowed = set(coords) | set(params)

    if a is not None:
        for required in ("Lambda", "m"):
            if required not in params:
                raise SolutionFileError(f"missing 'param {required} = ...' line")
        extra = a.free_symbols - set(coords[:2]) - set(params)
        if extra & set(coords):
            raise SolutionFileError(f"a must depend on {coords[0]}, {coords[1]} only; found {', '.join(sorted(extra))}", a_line)
        if extra:
            raise SolutionFileError(f"unknown symbol(s) in a: {', '.join(sorted(extra))}", a_line)
        mval = params["m"]
        if mval < 0:
            raise SolutionFileError("m must be nonnegative")
        if mval == 0:
            warnings.warn("m = 0: the integration constant vanishes (conformally flat case)", SolutionWarning, stacklevel=2)
        elif not float(mval).is_integer():
            warnings.warn(f"m = {mval} is not a positive integer; accepted as a real constant", SolutionWarning, stacklevel=2)
        return SolutionSpec(coords, params, "ansatz", a=a, name=name)

    missing = [(i, j) for i in range(4) for j in range(i, 4) if (i, j) not in comps]
    if missing:
        listed = ", ".join(f"g {i} {j}" for i, j in missing)
        raise SolutionFileError(f"explicit metric needs 10 components; missing {listed}")
    for key, e in comps.items():
        extra = e.free_symbols - allowed
        if extra:
            raise SolutionFileError(f"unknown symbol(s): {', '.join(sorted(extra))}", comp_lines[key])
    return SolutionSpec(coords, params, "explicit", components=comps, name=name)


def read_solution_file(path) -> SolutionSpec:
    from pathlib import Path

    p = Path(path)
    return parse_solution_file(p.read_text(encoding="utf-8"), name=p.stem)


def _format_number(v) -> str:
    return serialize(Num(v))


def format_solution_file(spec: SolutionSpec) -> str:
    """Inverse of :func:`parse_solution_file` (comments are not kept)."""
    lines = ["coords " + " ".join(spec.coords)]
    for k in sorted(spec.params):
        lines.append(f"param {k} = {_format_number(spec.params[k])}")
    if spec.mode == "ansatz":
        lines.append(f"a = {serialize(spec.a)}")
    else:
        for (i, j), e in sorted(spec.components.items()):
            lines.append(f"g {i} {j} = {serialize(e)}")
    return "\n".join(lines) + "\n"
