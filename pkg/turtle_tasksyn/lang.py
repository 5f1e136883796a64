"""
Text form of turtle programs (``.xlc`` files).

Grammar, case sensitive, ASCII only. Words and counts are separated by
whitespace; braces delimit themselves, so ``repeat 3{forward}`` is accepted::

    program := stmt*
    stmt    := basic | "setpencolor" COLOR | "repeat" INT "{" token+ "}"
    token   := basic | "setpencolor" COLOR
    basic   := "forward" | "back" | "left" | "right"

``print_program`` emits the canonical layout: one statement per line, repeat
bodies indented by two spaces, the closing brace on its own line.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Optional

from .task_model import (
    MAX_REPEAT,
    MIN_REPEAT,
    Basic,
    Command,
    PenColor,
    Program,
    Repeat,
    SetPenColor,
)

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"\s+|[A-Za-z_]\w*|\d\w*|[{}]", re.ASCII)
_COUNTS = {str(n): n for n in range(MIN_REPEAT, MAX_REPEAT + 1)}
_COMMANDS = {command.value: command for command in Command}
_COLORS = {color.value: color for color in PenColor}
INDENT = "  "


class ParseError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass(frozen=True)
class _Lexeme:
    text: str
    line: int
    column: int


def _tokenize(text: str) -> tuple[list[_Lexeme], tuple[int, int]]:
    """Split ``text`` into lexemes; also returns the position one past the end."""
    lexemes = []
    line, column, pos = 1, 1, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(line, column, f"unexpected character {text[pos]!r}")
        chunk = match.group(0)
        if not chunk.isspace():
            lexemes.append(_Lexeme(chunk, line, column))
        for char in chunk:
            if char == "\n":
                line, column = line + 1, 1
            else:
                column += 1
        pos = match.end()
    return lexemes, (line, column)


class _Parser:
    def __init__(self, text: str):
        self.lexemes, self.end = _tokenize(text)
        self.index = 0

    def peek(self) -> Optional[_Lexeme]:
        return self.lexemes[self.index] if self.index < len(self.lexemes) else None

    def take(self) -> _Lexeme:
        lexeme = self.peek()
        self.index += 1
        return lexeme

    def fail_at_end(self, message: str) -> ParseError:
        return ParseError(self.end[0], self.end[1], message)

    def program(self) -> Program:
        statements = []
        while self.peek() is not None:
            lexeme = self.peek()
            if lexeme.text == "repeat":
                statements.append(self.repeat())
            elif lexeme.text == "}":
                raise ParseError(lexeme.line, lexeme.column, "unmatched '}'")
            else:
                statements.append(self.token())
        return Program(tuple(statements))

    def token(self):
        lexeme = self.take()
        if lexeme.text in _COMMANDS:
            return Basic(_COMMANDS[lexeme.text])
        if lexeme.text == "setpencolor":
            color = self.peek()
            if color is None:
                raise self.fail_at_end("setpencolor needs a color")
            if color.text not in _COLORS:
                raise ParseError(color.line, color.column,
                                 f"unknown color {color.text!r}, expected one of {', '.join(_COLORS)}")
            self.take()
            return SetPenColor(_COLORS[color.text])
        raise ParseError(lexeme.line, lexeme.column, f"unknown token {lexeme.text!r}")

    def repeat(self) -> Repeat:
        keyword = self.take()
        count = self.peek()
        if count is None:
            raise self.fail_at_end("repeat needs a count")
        if not count.text.isdigit():
            raise ParseError(count.line, count.column, f"repeat count must be an integer, got {count.text!r}")
        if count.text not in _COUNTS:
            shown = count.text if len(count.text) <= 8 else count.text[:8] + "..."
            raise ParseError(count.line, count.column, f"repeat count {shown} outside {MIN_REPEAT}..{MAX_REPEAT}")
        self.take()
        brace = self.peek()
        if brace is None:
            raise self.fail_at_end("expected '{' after repeat count")
        if brace.text != "{":
            raise ParseError(brace.line, brace.column, f"expected '{{', got {brace.text!r}")
        self.take()

        body = []
        while True:
            lexeme = self.peek()
            if lexeme is None:
                raise self.fail_at_end(f"unclosed '{{' of repeat at line {keyword.line}")
            if lexeme.text == "}":
                if not body:
                    raise ParseError(lexeme.line, lexeme.column, "empty repeat body")
                self.take()
                return Repeat(_COUNTS[count.text], tuple(body))
            if lexeme.text == "repeat":
                raise ParseError(lexeme.line, lexeme.column, "nested repeat is not allowed")
            if lexeme.text == "{":
                raise ParseError(lexeme.line, lexeme.column, "unexpected '{'")
            body.append(self.token())


def parse(text: str) -> Program:
    """Parse DSL text; raises ParseError with a 1-based position."""
    return _Parser(text).program()


def _token_text(token) -> str:
    if isinstance(token, SetPenColor):
        return f"setpencolor {token.color.value}"
    return token.command.value


def print_program(code: Program) -> str:
    lines = []
    for stmt in code.statements:
        if isinstance(stmt, Repeat):
            lines.append(f"repeat {stmt.count} {{")
            lines.extend(INDENT + _token_text(token) for token in stmt.body)
            lines.append("}")
        else:
            lines.append(_token_text(stmt))
    return "\n".join(lines)


def load_program(path: str) -> Program:
    with open(path, "r", encoding="utf-8") as f:
        return parse(f.read())


def dump_program(code: Program, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(print_program(code) + "\n")
