"""Tokenizer and s-expression reader for SMT-LIB / Alethe text."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LexError, ParseError

# token kinds
LPAREN, RPAREN, SYMBOL, KEYWORD, NUMERAL, DECIMAL, STRING = (
    "(", ")", "symbol", "keyword", "numeral", "decimal", "string",
)

_SYMBOL_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789~!@$%^&*_-+=<>.?/")


@dataclass(frozen=True)
class Atom:
    kind: str
    text: str
    line: int
    col: int

    def is_symbol(self, *names: str) -> bool:
        return self.kind == SYMBOL and (not names or self.text in names)


@dataclass
class SList:
    items: list
    line: int
    col: int

    def head(self) -> str | None:
        if self.items and isinstance(self.items[0], Atom) and self.items[0].kind == SYMBOL:
            return self.items[0].text
        return None

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]


SExpr = Atom | SList


def tokenize(text: str):
    """Yield ``Atom`` tokens (parentheses included) with 1-based positions."""
    i, n = 0, len(text)
    line, line_start = 1, 0
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            line_start = i + 1
            i += 1
        elif c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield Atom(c, c, line, i - line_start + 1)
            i += 1
        elif c == "|":
            start, sline, scol = i, line, i - line_start + 1
            i += 1
            while i < n and text[i] != "|":
                if text[i] == "\\":
                    raise LexError("backslash in quoted symbol", line, i - line_start + 1)
                if text[i] == "\n":
                    line += 1
                    line_start = i + 1
                i += 1
            if i >= n:
                raise LexError("unterminated quoted symbol", sline, scol)
            i += 1
            yield Atom(SYMBOL, text[start + 1 : i - 1], sline, scol)
        elif c == '"':
            sline, scol = line, i - line_start + 1
            i += 1
            chunks = []
            while True:
                if i >= n:
                    raise LexError("unterminated string literal", sline, scol)
                if text[i] == '"':
                    if i + 1 < n and text[i + 1] == '"':
                        chunks.append('"')
                        i += 2
                        continue
                    i += 1
                    break
                if text[i] == "\n":
                    line += 1
                    line_start = i + 1
                chunks.append(text[i])
                i += 1
            yield Atom(STRING, "".join(chunks), sline, scol)
        else:
            start, col = i, i - line_start + 1
            if c == ":":
                i += 1
            while i < n and text[i] in _SYMBOL_CHARS:
                i += 1
            word = text[start:i]
            if word == ":" or (i == start):
                raise LexError(f"unexpected character {c!r}", line, col)
            yield Atom(_classify(word, line, col), word, line, col)


def _classify(word: str, line: int, col: int) -> str:
    if word == ":=":
        return SYMBOL
    if word[0] == ":":
        return KEYWORD
    if word[0].isdigit():
        if word.isdigit():
            if len(word) > 1 and word[0] == "0":
                raise LexError(f"numeral with leading zero: {word}", line, col)
            return NUMERAL
        whole, dot, frac = word.partition(".")
        if dot and whole.isdigit() and frac.isdigit():
            return DECIMAL
        raise LexError(f"malformed number {word}", line, col)
    return SYMBOL


def read_all(text: str) -> list[SExpr]:
    """Read every top-level s-expression in ``text``."""
    stack: list[SList] = []
    out: list[SExpr] = []
    for tok in tokenize(text):
        if tok.kind == LPAREN:
            stack.append(SList([], tok.line, tok.col))
        elif tok.kind == RPAREN:
            if not stack:
                raise ParseError("unbalanced ')'", tok.line, tok.col)
            done = stack.pop()
            (stack[-1].items if stack else out).append(done)
        else:
            (stack[-1].items if stack else out).append(tok)
    if stack:
        raise ParseError("unbalanced '(': missing ')'", stack[-1].line, stack[-1].col)
    return out


def error_at(node: SExpr, message: str, cls=ParseError):
    return cls(message, node.line, node.col)
