"""Lexer and recursive-descent parser for formulas and terms.

Grammar (quantifier bodies bind tight; parenthesize to widen scope):

    formula := imp
    imp     := dis ("->" imp)?
    dis     := con ("\\/" con)*
    con     := un ("/\\" un)*
    un      := "~" un | "@" ident "." un | "#" ident "." un | "$" un
             | "(" formula ")" | atom | dirref
    dirref  := "!"? "/" ident ("(" terms ")")?
    atom    := ident ("(" terms ")")?
    term    := sum ; sum := prod ("+" prod)* ; prod := factor ("*" factor)*
    factor  := numeral | ident ("(" terms ")")? | UpperIdent

Lowercase identifiers are constants unless bound by an enclosing quantifier;
uppercase identifiers must be declared directory parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError
from .formulas import All, And, Atom, DirRef, Exists, Formula, Implies, Neg, Or, Recur
from .terms import App, Const, Num, Term, Var

_TWO_CHAR = ("/\\", "\\/", "->", "<=", ">=")
_ONE_CHAR = "()[],.~@#$!/=:;{}<>+*"


@dataclass(frozen=True)
class Token:
    kind: str  # INT | IDENT | UIDENT | OP | EOF
    value: str
    line: int
    col: int


def tokenize(text: str, comment: str | None = None) -> list[Token]:
    """Split text into tokens; `comment` (e.g. "%") skips to end of line."""
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if comment and ch == comment:
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text[i:i + 2] in _TWO_CHAR:
            toks.append(Token("OP", text[i:i + 2], line, col))
            i += 2
            col += 2
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha():  # leading underscores are reserved for eigenvariables
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "UIDENT" if word[0].isupper() else "IDENT"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if ch in _ONE_CHAR:
            toks.append(Token("OP", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, value: str) -> Token:
        tok = self.peek()
        if tok.kind == "EOF" or tok.value != value:
            raise ParseError(f"expected {value!r}, found {tok.value or 'end of input'!r}",
                             tok.line, tok.col)
        return self.next()

    def at(self, value: str) -> bool:
        return self.peek().kind != "EOF" and self.peek().value == value

    def error(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)


class FormulaParser:
    """Parses one formula; tracks quantifier scope and directory parameters."""

    def __init__(self, stream: TokenStream, params=()):
        self.ts = stream
        self.params = set(params)
        self.bound: list[str] = []

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.ts.at("->"):
            self.ts.next()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.ts.at("\\/"):
            self.ts.next()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.ts.at("/\\"):
            self.ts.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.ts.peek()
        if tok.value == "~":
            self.ts.next()
            return Neg(self.unary())
        if tok.value in ("@", "#"):
            self.ts.next()
            name = self._ident("quantifier variable")
            self.ts.expect(".")
            self.bound.append(name)
            body = self.unary()
            self.bound.pop()
            return All(name, body) if tok.value == "@" else Exists(name, body)
        if tok.value == "$":
            self.ts.next()
            return Recur(self.unary())
        if tok.value == "(":
            self.ts.next()
            f = self.formula()
            self.ts.expect(")")
            return f
        if tok.value in ("!", "/"):
            return self.dirref()
        if tok.kind == "IDENT":
            return self.atom()
        self.ts.error(f"expected a formula, found {tok.value or 'end of input'!r}")

    def dirref(self) -> DirRef:
        copy = False
        if self.ts.at("!"):
            self.ts.next()
            copy = True
        self.ts.expect("/")
        name = self._ident("directory name")
        args = self._arglist()
        return DirRef(name, args, copy)

    def atom(self) -> Atom:
        name = self._ident("atom")
        return Atom(name, self._arglist())

    def _arglist(self) -> tuple:
        if not self.ts.at("("):
            return ()
        self.ts.next()
        args = [self.term()]
        while self.ts.at(","):
            self.ts.next()
            args.append(self.term())
        self.ts.expect(")")
        return tuple(args)

    # terms ----------------------------------------------------------

    def term(self) -> Term:
        t = self._prod()
        while self.ts.at("+"):
            self.ts.next()
            t = App("+", (t, self._prod()))
        return t

    def _prod(self) -> Term:
        t = self._factor()
        while self.ts.at("*"):
            self.ts.next()
            t = App("*", (t, self._factor()))
        return t

    def _factor(self) -> Term:
        tok = self.ts.peek()
        if tok.kind == "INT":
            self.ts.next()
            return Num(int(tok.value))
        if tok.kind == "UIDENT":
            if tok.value not in self.params:
                raise ParseError(f"unbound variable {tok.value!r}", tok.line, tok.col)
            self.ts.next()
            return Var(tok.value)
        if tok.kind == "IDENT":
            self.ts.next()
            if self.ts.at("("):
                return App(tok.value, self._term_args())
            if tok.value in self.bound:
                return Var(tok.value)
            return Const(tok.value)
        raise ParseError(f"expected a term, found {tok.value or 'end of input'!r}",
                         tok.line, tok.col)

    def _term_args(self) -> tuple:
        self.ts.expect("(")
        args = [self.term()]
        while self.ts.at(","):
            self.ts.next()
            args.append(self.term())
        self.ts.expect(")")
        return tuple(args)

    def _ident(self, what: str) -> str:
        tok = self.ts.peek()
        if tok.kind != "IDENT":
            raise ParseError(f"expected {what}, found {tok.value or 'end of input'!r}",
                             tok.line, tok.col)
        self.ts.next()
        return tok.value


def parse_formula(text: str, params=()) -> Formula:
    """Parse a complete formula; `params` names permitted UpperIdent parameters."""
    ts = TokenStream(tokenize(text))
    f = FormulaParser(ts, params).formula()
    tok = ts.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.value!r}", tok.line, tok.col)
    return f


def parse_term(text: str, params=()) -> Term:
    ts = TokenStream(tokenize(text))
    t = FormulaParser(ts, params).term()
    tok = ts.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.value!r}", tok.line, tok.col)
    return t


def parse_dirref(text: str) -> DirRef:
    """Parse a directory reference such as ``/m(s(0))`` or ``!/n``."""
    ts = TokenStream(tokenize(text))
    f = FormulaParser(ts).unary()
    tok = ts.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.value!r}", tok.line, tok.col)
    if not isinstance(f, DirRef):
        raise ParseError("not a directory reference")
    return f


def parse_pattern(text: str) -> tuple[Term, tuple[str, ...]]:
    """Parse a clause pattern; UpperIdents bind and are returned as parameters."""
    ts = TokenStream(tokenize(text))
    names: list[str] = []

    class _PatternParser(FormulaParser):
        def _factor(self):
            tok = self.ts.peek()
            if tok.kind == "UIDENT":
                self.ts.next()
                if tok.value not in names:
                    names.append(tok.value)
                return Var(tok.value)
            return super()._factor()

    t = _PatternParser(ts).term()
    tok = ts.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.value!r}", tok.line, tok.col)
    return t, tuple(names)
