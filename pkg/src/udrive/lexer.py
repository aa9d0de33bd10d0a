"""Tokenizer for uDrive programs and online commands.

Keywords: ``rule``, ``trigger``, ``condition``, ``then``, ``until``, ``end``.
``#`` starts a line comment.  Unknown characters become ERROR tokens so the
parser can surface them with spans instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from udrive.diagnostics import Span


class TokenType(Enum):
    KW_RULE = "rule"
    KW_TRIGGER = "trigger"
    KW_CONDITION = "condition"
    KW_THEN = "then"
    KW_UNTIL = "until"
    KW_END = "end"
    IDENT = "IDENT"
    NUMBER = "NUMBER"
    STRING = "STRING"
    BANG = "!"
    LPAREN = "("
    RPAREN = ")"
    COMMA = ","
    SEMI = ";"
    ERROR = "ERROR"
    EOF = "EOF"


KEYWORDS = {
    "rule": TokenType.KW_RULE,
    "trigger": TokenType.KW_TRIGGER,
    "condition": TokenType.KW_CONDITION,
    "then": TokenType.KW_THEN,
    "until": TokenType.KW_UNTIL,
    "end": TokenType.KW_END,
}

_PUNCT = {
    "!": TokenType.BANG,
    "(": TokenType.LPAREN,
    ")": TokenType.RPAREN,
    ",": TokenType.COMMA,
    ";": TokenType.SEMI,
}


@dataclass(frozen=True)
class Token:
    type: TokenType
    text: str
    value: object  # str for IDENT/STRING, float for NUMBER, None otherwise
    span: Span


def _ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(text: str) -> list[Token]:
    """Break input into tokens, covering it fully (comments/space skipped)."""
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def span_here(length: int) -> Span:
        return Span(line, col, line, col + length)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, None, span_here(1)))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            j = i + 1
            buf: list[str] = []
            closed = False
            while j < n:
                c = text[j]
                if c == "\\" and j + 1 < n:
                    esc = text[j + 1]
                    buf.append({"n": "\n", "t": "\t"}.get(esc, esc))
                    j += 2
                    continue
                if c == '"':
                    closed = True
                    j += 1
                    break
                if c == "\n":
                    break
                buf.append(c)
                j += 1
            length = j - i
            sp = Span(start_line, start_col, start_line, start_col + length)
            if closed:
                tokens.append(Token(TokenType.STRING, text[i:j], "".join(buf), sp))
            else:
                tokens.append(Token(TokenType.ERROR, text[i:j], "unterminated string", sp))
            col += length
            i = j
            continue
        if ch.isdigit() or (
            ch == "-" and i + 1 < n and (text[i + 1].isdigit() or text[i + 1] == ".")
        ) or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            if text[j] == "-":
                j += 1
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            raw = text[i:j]
            length = j - i
            try:
                value = float(raw)
            except ValueError:
                tokens.append(Token(TokenType.ERROR, raw, "bad number", span_here(length)))
            else:
                tokens.append(Token(TokenType.NUMBER, raw, value, span_here(length)))
            col += length
            i = j
            continue
        if _ident_start(ch):
            j = i
            while j < n and _ident_char(text[j]):
                j += 1
            raw = text[i:j]
            length = j - i
            ttype = KEYWORDS.get(raw, TokenType.IDENT)
            tokens.append(Token(ttype, raw, raw, span_here(length)))
            col += length
            i = j
            continue
        tokens.append(Token(TokenType.ERROR, ch, f"unexpected character {ch!r}", span_here(1)))
        i += 1
        col += 1

    return tokens
