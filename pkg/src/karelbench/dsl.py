"""Tokenizer, parser, and canonical pretty-printer for the Karel DSL.

A program is a single ``DEF run m( ... m)`` wrapper around a statement
sequence.  Statements are primitive actions, WHILE/REPEAT loops, and
IF/IFELSE branches; conditions are one of five perceptions, optionally
negated once.  The printed form is single-space separated and uses
composite bracket tokens (``m(``, ``c)``, ...) so that the token count of
a program equals the number of whitespace-separated symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field


ACTIONS = ("move", "turnLeft", "turnRight", "putMarker", "pickMarker")

PERCEPTIONS = (
    "frontIsClear",
    "leftIsClear",
    "rightIsClear",
    "markersPresent",
    "noMarkersPresent",
)

# The singular spellings appear in some program listings; accept them on
# input, always print the canonical plural form.
PERCEPTION_ALIASES = {
    "markerPresent": "markersPresent",
    "noMarkerPresent": "noMarkersPresent",
}

BRACKETS = ("m(", "m)", "c(", "c)", "w(", "w)", "r(", "r)", "i(", "i)", "e(", "e)")
KEYWORDS = ("DEF", "run", "WHILE", "REPEAT", "IF", "IFELSE", "ELSE", "not")

MIN_REPEAT = 1
MAX_REPEAT = 19


class UnknownToken(ValueError):
    """A symbol outside the DSL vocabulary was encountered."""

    def __init__(self, lexeme, position):
        super().__init__(f"unknown token {lexeme!r} at index {position}")
        self.lexeme = lexeme
        self.position = position


class ProgramSyntaxError(ValueError):
    """Token stream does not match the grammar."""

    def __init__(self, position, expected, found=None):
        super().__init__(
            f"syntax error at token {position}: expected {expected}, found {found!r}"
        )
        self.position = position
        self.expected = expected
        self.found = found


class UnbalancedBracket(ProgramSyntaxError):
    """A block delimiter is missing or mismatched."""


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    value: int | None = None  # repeat count for R=n tokens


@dataclass(frozen=True)
class Condition:
    perception: str
    negated: bool = False


@dataclass(frozen=True)
class Action:
    name: str


@dataclass(frozen=True)
class While:
    cond: Condition
    body: tuple


@dataclass(frozen=True)
class Repeat:
    times: int
    body: tuple


@dataclass(frozen=True)
class If:
    cond: Condition
    body: tuple


@dataclass(frozen=True)
class IfElse:
    cond: Condition
    then_body: tuple
    else_body: tuple


Statement = Action | While | Repeat | If | IfElse


@dataclass(frozen=True)
class Program:
    body: tuple = field(default_factory=tuple)


def tokenize(text):
    """Split ``text`` on whitespace and classify every symbol.

    Raises UnknownToken (with the symbol index) on anything outside the
    vocabulary.
    """
    tokens = []
    for i, lexeme in enumerate(text.split()):
        if lexeme in KEYWORDS or lexeme in BRACKETS:
            tokens.append(Token(lexeme, lexeme))
        elif lexeme in ACTIONS:
            tokens.append(Token("action", lexeme))
        elif lexeme in PERCEPTIONS:
            tokens.append(Token("perception", lexeme))
        elif lexeme in PERCEPTION_ALIASES:
            tokens.append(Token("perception", PERCEPTION_ALIASES[lexeme]))
        elif lexeme.startswith("R=") and lexeme[2:].isdigit():
            n = int(lexeme[2:])
            if not MIN_REPEAT <= n <= MAX_REPEAT:
                raise UnknownToken(lexeme, i)
            tokens.append(Token("repeat_count", lexeme, value=n))
        else:
            raise UnknownToken(lexeme, i)
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def expect(self, kind):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            found = tok.lexeme if tok else "<end>"
            if kind in BRACKETS:
                raise UnbalancedBracket(self.pos, {kind}, found)
            raise ProgramSyntaxError(self.pos, {kind}, found)
        self.pos += 1
        return tok

    def parse_program(self):
        self.expect("DEF")
        self.expect("run")
        self.expect("m(")
        body = self.parse_seq(stop="m)")
        self.expect("m)")
        if self.peek() is not None:
            raise ProgramSyntaxError(self.pos, {"<end>"}, self.peek().lexeme)
        return Program(body=body)

    def parse_seq(self, stop):
        stmts = []
        while True:
            tok = self.peek()
            if tok is None:
                raise UnbalancedBracket(self.pos, {stop}, "<end>")
            if tok.kind == stop:
                return tuple(stmts)
            stmts.append(self.parse_statement())

    def parse_statement(self):
        tok = self.peek()
        if tok.kind == "action":
            self.pos += 1
            return Action(tok.lexeme)
        if tok.kind == "WHILE":
            self.pos += 1
            cond = self.parse_condition()
            self.expect("w(")
            body = self.parse_nonempty_seq("w)")
            self.expect("w)")
            return While(cond, body)
        if tok.kind == "REPEAT":
            self.pos += 1
            count = self.expect("repeat_count")
            self.expect("r(")
            body = self.parse_nonempty_seq("r)")
            self.expect("r)")
            return Repeat(count.value, body)
        if tok.kind == "IF":
            self.pos += 1
            cond = self.parse_condition()
            self.expect("i(")
            body = self.parse_nonempty_seq("i)")
            self.expect("i)")
            return If(cond, body)
        if tok.kind == "IFELSE":
            self.pos += 1
            cond = self.parse_condition()
            self.expect("i(")
            then_body = self.parse_nonempty_seq("i)")
            self.expect("i)")
            self.expect("ELSE")
            self.expect("e(")
            else_body = self.parse_nonempty_seq("e)")
            self.expect("e)")
            return IfElse(cond, then_body, else_body)
        raise ProgramSyntaxError(
            self.pos, {"action", "WHILE", "REPEAT", "IF", "IFELSE"}, tok.lexeme
        )

    def parse_nonempty_seq(self, stop):
        body = self.parse_seq(stop)
        if not body:
            raise ProgramSyntaxError(self.pos, {"statement"}, self.peek().lexeme)
        return body

    def parse_condition(self):
        self.expect("c(")
        tok = self.peek()
        if tok is not None and tok.kind == "not":
            self.pos += 1
            self.expect("c(")
            perception = self.expect("perception")
            self.expect("c)")
            self.expect("c)")
            return Condition(perception.lexeme, negated=True)
        perception = self.expect("perception")
        self.expect("c)")
        return Condition(perception.lexeme, negated=False)


def parse(tokens):
    """Parse a token list (from :func:`tokenize`) into a Program."""
    return _Parser(list(tokens)).parse_program()


def parse_text(text):
    return parse(tokenize(text))


def _print_condition(cond, out):
    if cond.negated:
        out.extend(["c(", "not", "c(", cond.perception, "c)", "c)"])
    else:
        out.extend(["c(", cond.perception, "c)"])


def _print_statement(stmt, out):
    if isinstance(stmt, Action):
        out.append(stmt.name)
    elif isinstance(stmt, While):
        out.append("WHILE")
        _print_condition(stmt.cond, out)
        out.append("w(")
        for s in stmt.body:
            _print_statement(s, out)
        out.append("w)")
    elif isinstance(stmt, Repeat):
        out.extend(["REPEAT", f"R={stmt.times}", "r("])
        for s in stmt.body:
            _print_statement(s, out)
        out.append("r)")
    elif isinstance(stmt, If):
        out.append("IF")
        _print_condition(stmt.cond, out)
        out.append("i(")
        for s in stmt.body:
            _print_statement(s, out)
        out.append("i)")
    elif isinstance(stmt, IfElse):
        out.append("IFELSE")
        _print_condition(stmt.cond, out)
        out.append("i(")
        for s in stmt.then_body:
            _print_statement(s, out)
        out.extend(["i)", "ELSE", "e("])
        for s in stmt.else_body:
            _print_statement(s, out)
        out.append("e)")
    else:  # pragma: no cover
        raise TypeError(f"not a statement: {stmt!r}")


def program_tokens(program):
    """The canonical token sequence of a program."""
    out = ["DEF", "run", "m("]
    for stmt in program.body:
        _print_statement(stmt, out)
    out.append("m)")
    return out


def pretty(program):
    """Canonical single-space-separated text; parse(pretty(p)) == p."""
    return " ".join(program_tokens(program))


def token_length(program):
    """Number of tokens in the canonical printed form."""
    return len(program_tokens(program))
