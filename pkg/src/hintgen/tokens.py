"""Error-tolerant lexer for learner Python programs and token-level edit distance.

The lexer never raises: broken input is flagged via ``TokenStream.had_errors``
and lexing continues. Comments and intra-line whitespace are dropped;
indentation is significant and surfaces as INDENT/DEDENT tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class TokenKind(Enum):
    NAME = "NAME"
    NUMBER = "NUMBER"
    STRING = "STRING"
    OP = "OP"
    NEWLINE = "NEWLINE"
    INDENT = "INDENT"
    DEDENT = "DEDENT"
    ERRORCHAR = "ERRORCHAR"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int  # 1-based
    col: int  # 0-based

    def pair(self) -> tuple[TokenKind, str]:
        return (self.kind, self.text)


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[Token, ...]
    had_errors: bool

    def pairs(self) -> list[tuple[TokenKind, str]]:
        return [t.pair() for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)


TAB_WIDTH = 8

_NAME_RE = re.compile(r"[^\W\d]\w*", re.UNICODE)

_EXPONENT = r"[eE][-+]?\d(?:_?\d)*"
_DEC = r"\d(?:_?\d)*"
_POINT_FLOAT = rf"(?:{_DEC})?\.{_DEC}|{_DEC}\."
_FLOAT = rf"(?:{_POINT_FLOAT})(?:{_EXPONENT})?|{_DEC}(?:{_EXPONENT})"
_NUMBER_RE = re.compile(
    rf"(?:{_FLOAT}|{_DEC})[jJ]"
    rf"|{_FLOAT}"
    r"|0[xX](?:_?[0-9a-fA-F])+"
    r"|0[bB](?:_?[01])+"
    r"|0[oO](?:_?[0-7])+"
    rf"|{_DEC}"
)

# Longest-match operator set, mirroring the subject language's punctuation.
_OPERATORS = sorted(
    [
        "**=", "//=", ">>=", "<<=", "...", "!=", ">=", "<=", "==", "->",
        ":=", "**", "//", "<<", ">>", "+=", "-=", "*=", "/=", "%=", "@=",
        "&=", "|=", "^=", "(", ")", "[", "]", "{", "}", ",", ":", ".",
        ";", "@", "=", "+", "-", "*", "/", "%", "&", "|", "^", "~", "<", ">",
    ],
    key=len,
    reverse=True,
)

_STRING_PREFIXES = {
    "", "r", "b", "u", "f", "rb", "br", "fr", "rf",
}

_OPEN_BRACKETS = "([{"
_CLOSE_BRACKETS = ")]}"


def _is_string_prefix(word: str) -> bool:
    return word.lower() in _STRING_PREFIXES


class _Lexer:
    def __init__(self, source: str) -> None:
        self.src = source
        self.i = 0
        self.line = 1
        self.col = 0
        self.tokens: list[Token] = []
        self.had_errors = False
        self.indents = [0]
        self.paren_depth = 0

    def error(self) -> None:
        self.had_errors = True

    def at_end(self) -> bool:
        return self.i >= len(self.src)

    def peek(self, offset: int = 0) -> str:
        j = self.i + offset
        return self.src[j] if j < len(self.src) else ""

    def emit(self, kind: TokenKind, text: str, line: int, col: int) -> None:
        self.tokens.append(Token(kind, text, line, col))

    def advance(self, n: int = 1) -> str:
        chunk = self.src[self.i : self.i + n]
        for ch in chunk:
            if ch == "\n":
                self.line += 1
                self.col = 0
            elif ch == "\t":
                self.col = (self.col // TAB_WIDTH + 1) * TAB_WIDTH
            else:
                self.col += 1
        self.i += n
        return chunk

    def run(self) -> TokenStream:
        pending_line_start = True
        while not self.at_end():
            if pending_line_start and self.paren_depth == 0:
                pending_line_start = False
                if self._handle_line_start():
                    pending_line_start = True
                    continue
            if self.at_end():
                break
            ch = self.peek()
            if ch == "\n":
                if self.paren_depth == 0:
                    self.emit(TokenKind.NEWLINE, "", self.line, self.col)
                    pending_line_start = True
                self.advance()
                continue
            if ch in " \t\f":
                self.advance()
                continue
            if ch == "\r":
                self.advance()
                continue
            if ch == "#":
                self._skip_comment()
                continue
            if ch == "\\" and self.peek(1) in ("\n", "\r"):
                # Explicit line joining: no NEWLINE, no indent handling.
                self.advance()
                if self.peek() == "\r":
                    self.advance()
                if self.peek() == "\n":
                    self.advance()
                continue
            self._scan_token()
        # Terminate a trailing logical line, then close open indent levels.
        if self.tokens and not pending_line_start and self.tokens[-1].kind != TokenKind.NEWLINE:
            self.emit(TokenKind.NEWLINE, "", self.line, self.col)
            self.line += 1
            self.col = 0
        while len(self.indents) > 1:
            self.indents.pop()
            self.emit(TokenKind.DEDENT, "", self.line, 0)
        return TokenStream(tuple(self.tokens), self.had_errors)

    def _handle_line_start(self) -> bool:
        """Measure indentation; returns True if the line held no code."""
        width = 0
        j = self.i
        while j < len(self.src):
            ch = self.src[j]
            if ch == " ":
                width += 1
            elif ch == "\t":
                width = (width // TAB_WIDTH + 1) * TAB_WIDTH
            elif ch == "\f":
                width = 0
            else:
                break
            j += 1
        if j >= len(self.src):
            self.advance(j - self.i)
            return False
        ch = self.src[j]
        if ch in ("\n", "\r", "#"):
            # Blank or comment-only line: contributes nothing, not even NEWLINE.
            self.advance(j - self.i)
            if ch == "#":
                self._skip_comment()
            if self.peek() == "\r":
                self.advance()
            if self.peek() == "\n":
                self.advance()
            return True
        self.advance(j - self.i)
        if width > self.indents[-1]:
            self.indents.append(width)
            self.emit(TokenKind.INDENT, "", self.line, 0)
        else:
            while width < self.indents[-1]:
                self.indents.pop()
                self.emit(TokenKind.DEDENT, "", self.line, 0)
            if width != self.indents[-1]:
                # Dedent to a level never seen: tolerate by adopting it as a
                # fresh level so the stream stays INDENT/DEDENT balanced.
                self.error()
                self.indents.append(width)
                self.emit(TokenKind.INDENT, "", self.line, 0)
        return False

    def _skip_comment(self) -> None:
        while not self.at_end() and self.peek() != "\n":
            self.advance()

    def _scan_token(self) -> None:
        line, col = self.line, self.col
        ch = self.peek()

        if ch in ("'", '"'):
            self._scan_string("", line, col)
            return

        m = _NAME_RE.match(self.src, self.i)
        if m:
            word = m.group()
            end = m.end()
            if (
                end < len(self.src)
                and self.src[end] in ("'", '"')
                and _is_string_prefix(word)
            ):
                self.advance(len(word))
                self._scan_string(word, line, col)
                return
            self.advance(len(word))
            self.emit(TokenKind.NAME, word, line, col)
            return

        m = _NUMBER_RE.match(self.src, self.i)
        if m and (ch.isdigit() or (ch == "." and self.peek(1).isdigit())):
            text = m.group()
            self.advance(len(text))
            self.emit(TokenKind.NUMBER, text, line, col)
            return

        for op in _OPERATORS:
            if self.src.startswith(op, self.i):
                self.advance(len(op))
                self.emit(TokenKind.OP, op, line, col)
                if op in _OPEN_BRACKETS:
                    self.paren_depth += 1
                elif op in _CLOSE_BRACKETS and self.paren_depth > 0:
                    self.paren_depth -= 1
                return

        self.advance()
        self.error()
        self.emit(TokenKind.ERRORCHAR, ch, line, col)

    def _scan_string(self, prefix: str, line: int, col: int) -> None:
        quote = self.peek()
        start = self.i
        if self.peek(1) == quote and self.peek(2) == quote:
            self.advance(3)
            closer = quote * 3
            while not self.at_end():
                if self.peek() == "\\":
                    self.advance(2)
                    continue
                if self.src.startswith(closer, self.i):
                    self.advance(3)
                    self.emit(
                        TokenKind.STRING, prefix + self.src[start : self.i], line, col
                    )
                    return
                self.advance()
            self.error()
            self.emit(TokenKind.STRING, prefix + self.src[start :], line, col)
            return
        self.advance(1)
        while not self.at_end():
            ch = self.peek()
            if ch == "\\":
                self.advance(2)
                continue
            if ch == "\n":
                break
            self.advance()
            if ch == quote:
                self.emit(
                    TokenKind.STRING, prefix + self.src[start : self.i], line, col
                )
                return
        # Unterminated single-quoted string: keep what we saw, flag it.
        self.error()
        self.emit(TokenKind.STRING, prefix + self.src[start : self.i], line, col)


def tokenize(source: str) -> TokenStream:
    """Lex ``source`` into a TokenStream. Total: never raises on str input."""
    return _Lexer(source).run()


def token_edit_distance(a: TokenStream, b: TokenStream) -> int:
    """Levenshtein distance over (kind, text) pairs with unit edit costs."""
    sa = a.pairs()
    sb = b.pairs()
    if len(sa) < len(sb):
        sa, sb = sb, sa
    if not sb:
        return len(sa)
    prev = list(range(len(sb) + 1))
    for i, x in enumerate(sa, start=1):
        cur = [i] + [0] * len(sb)
        for j, y in enumerate(sb, start=1):
            cost = 0 if x == y else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[-1]


def source_edit_distance(a: str, b: str) -> int:
    """Convenience wrapper: tokenize both sources and compare."""
    return token_edit_distance(tokenize(a), tokenize(b))


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}


def format_token_line(token: Token) -> str:
    """One-token debug line: ``kind<TAB>text<TAB>line:col`` with escaped text."""
    text = "".join(_ESCAPES.get(ch, ch) for ch in token.text)
    return f"{token.kind.value}\t{text}\t{token.line}:{token.col}"


def dump_tokens(source: str) -> str:
    """Golden-file rendering of a full token stream, one token per line."""
    stream = tokenize(source)
    return "".join(format_token_line(t) + "\n" for t in stream.tokens)
