"""Parser for the straight-line shape-program language.

One call per line, with an optional identifier binding:

    body = cube(name="body", scale=(1, 2, 1))
    boolean(body, hole, operation="DIFFERENCE")

Literals: integers, reals, double-quoted strings, true/false, 2- or 3-tuples
of numbers, and lists of tuples (curve control points). Bare identifiers in
argument position are references to previously bound objects. Comments start
with '#'. There are no loops, conditionals, or expressions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .diagnostics import Diagnostic


@dataclass(frozen=True)
class ObjectRef:
    """A bare identifier used as an argument (an object reference)."""

    name: str


@dataclass
class Statement:
    line: int
    callee: str
    target: Optional[str] = None
    args: List[Any] = field(default_factory=list)
    kwargs: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ShapeProgram:
    source: str
    statements: List[Statement]

    def render(self) -> str:
        return "\n".join(_render_statement(s) for s in self.statements) + (
            "\n" if self.statements else ""
        )


@dataclass
class ParseResult:
    program: Optional[ShapeProgram]
    diagnostics: List[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.program is not None


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>[-+]?(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[=(),\[\]])
    """,
    re.VERBOSE,
)

IDENT_RE = re.compile(r"^[a-z_][a-z0-9_]*$")


def _tokenize(text: str) -> Optional[List[Tuple[str, str]]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            return None
        pos = m.end()
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group()))
    return tokens


class _LineParser:
    def __init__(self, tokens: List[Tuple[str, str]], line: int):
        self.tokens = tokens
        self.line = line
        self.pos = 0

    def peek(self) -> Optional[Tuple[str, str]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> Optional[Tuple[str, str]]:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def expect_punct(self, ch: str) -> None:
        tok = self.take()
        if tok is None:
            if ch in ")]":
                raise _SyntaxError(f"unbalanced parenthesis: expected '{ch}'")
            raise _SyntaxError(f"unexpected end of line: expected '{ch}'")
        if tok != ("punct", ch):
            raise _SyntaxError(f"expected '{ch}', found '{tok[1]}'")

    def parse_statement(self) -> Statement:
        tok = self.take()
        if tok is None or tok[0] != "ident":
            raise _SyntaxError("expected an identifier")
        target = None
        callee = tok[1]
        if self.peek() == ("punct", "="):
            self.take()
            target = callee
            tok = self.take()
            if tok is None or tok[0] != "ident":
                raise _SyntaxError("expected a call after '='")
            callee = tok[1]
        self.expect_punct("(")
        args: List[Any] = []
        kwargs: Dict[str, Any] = {}
        if self.peek() == ("punct", ")"):
            self.take()
        else:
            while True:
                self._parse_arg(args, kwargs)
                tok = self.take()
                if tok == ("punct", ")"):
                    break
                if tok is None:
                    raise _SyntaxError("unbalanced parenthesis: expected ')'")
                if tok != ("punct", ","):
                    raise _SyntaxError(f"expected ',' or ')', found '{tok[1]}'")
        if self.peek() is not None:
            raise _SyntaxError(f"unexpected trailing input '{self.peek()[1]}'")
        return Statement(line=self.line, callee=callee, target=target,
                         args=args, kwargs=kwargs)

    def _parse_arg(self, args: List[Any], kwargs: Dict[str, Any]) -> None:
        tok = self.peek()
        if tok is not None and tok[0] == "ident" and self._lookahead_is_kw():
            name = self.take()[1]
            self.take()  # '='
            if name in kwargs:
                raise _SyntaxError(f"duplicate keyword argument '{name}'")
            kwargs[name] = self.parse_value()
        else:
            if kwargs:
                raise _SyntaxError("positional argument after keyword argument")
            args.append(self.parse_value())

    def _lookahead_is_kw(self) -> bool:
        return (self.pos + 1 < len(self.tokens)
                and self.tokens[self.pos + 1] == ("punct", "="))

    def parse_value(self) -> Any:
        tok = self.take()
        if tok is None:
            raise _SyntaxError("expected a value")
        kind, text = tok
        if kind == "number":
            return int(text) if re.fullmatch(r"[-+]?\d+", text) else float(text)
        if kind == "string":
            return _unescape(text)
        if kind == "ident":
            if text == "true" or text == "True":
                return True
            if text == "false" or text == "False":
                return False
            return ObjectRef(text)
        if tok == ("punct", "("):
            return self._parse_tuple()
        if tok == ("punct", "["):
            return self._parse_list()
        raise _SyntaxError(f"unexpected token '{text}'")

    def _parse_tuple(self) -> tuple:
        items: List[float] = []
        while True:
            tok = self.take()
            if tok is None:
                raise _SyntaxError("unbalanced parenthesis in tuple")
            if tok[0] != "number":
                raise _SyntaxError(f"tuples may contain only numbers, found '{tok[1]}'")
            items.append(float(tok[1]))
            tok = self.take()
            if tok == ("punct", ")"):
                break
            if tok is None:
                raise _SyntaxError("unbalanced parenthesis in tuple")
            if tok != ("punct", ","):
                raise _SyntaxError(f"expected ',' or ')' in tuple, found '{tok[1]}'")
        if len(items) not in (2, 3):
            raise _SyntaxError(f"tuples must have 2 or 3 components, got {len(items)}")
        return tuple(items)

    def _parse_list(self) -> list:
        items: List[tuple] = []
        if self.peek() == ("punct", "]"):
            self.take()
            return items
        while True:
            self.expect_punct("(")
            items.append(self._parse_tuple())
            tok = self.take()
            if tok == ("punct", "]"):
                break
            if tok is None:
                raise _SyntaxError("unbalanced bracket in list")
            if tok != ("punct", ","):
                raise _SyntaxError(f"expected ',' or ']' in list, found '{tok[1]}'")
        return items


class _SyntaxError(Exception):
    pass


def _unescape(quoted: str) -> str:
    body = quoted[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


def parse(source: str) -> ParseResult:
    """Parse DSL source. Never raises; syntax problems become diagnostics."""
    statements: List[Statement] = []
    diagnostics: List[Diagnostic] = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip() if not _hash_in_string(raw) else raw.strip()
        if not line:
            continue
        tokens = _tokenize(line)
        if tokens is None:
            diagnostics.append(Diagnostic(lineno, "error", "unrecognized characters"))
            continue
        try:
            statements.append(_LineParser(tokens, lineno).parse_statement())
        except _SyntaxError as exc:
            diagnostics.append(Diagnostic(lineno, "error", str(exc)))
    if diagnostics:
        return ParseResult(None, diagnostics)
    return ParseResult(ShapeProgram(source=source, statements=statements), [])


def _hash_in_string(raw: str) -> bool:
    # '#' inside a quoted string is not a comment
    h = raw.find("#")
    if h < 0:
        return False
    return raw[:h].count('"') % 2 == 1


def _format_value(v: Any) -> str:
    if isinstance(v, ObjectRef):
        return v.name
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(v, tuple):
        return "(" + ", ".join(_format_number(x) for x in v) + ")"
    if isinstance(v, list):
        return "[" + ", ".join(_format_value(t) for t in v) + "]"
    if isinstance(v, (int, float)):
        return _format_number(v)
    raise TypeError(f"unformattable value {v!r}")


def _format_number(x) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _render_statement(s: Statement) -> str:
    parts = [_format_value(a) for a in s.args]
    parts += [f"{k}={_format_value(v)}" for k, v in s.kwargs.items()]
    call = f"{s.callee}({', '.join(parts)})"
    return f"{s.target} = {call}" if s.target else call
