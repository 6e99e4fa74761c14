"""Token-level validity automaton for masked program decoding.

Tracks a partial canonical token sequence with an LL(1) expectation stack
and answers two questions: which lexemes may come next, and which of
those still allow the program to close within a remaining token budget.
Decoding restricted to these sets always yields a parseable program of
bounded length.
"""

from __future__ import annotations

from karelbench import dsl

STATEMENT_STARTERS = dsl.ACTIONS + ("WHILE", "REPEAT", "IF", "IFELSE")
REPEAT_COUNTS = tuple(f"R={n}" for n in range(dsl.MIN_REPEAT, dsl.MAX_REPEAT + 1))

# Expectation items, top of stack = end of list:
#   ("lit", tok)            exact token
#   ("action",)             any primitive action
#   ("perception",)         any perception
#   ("repeat_count",)       any R=n
#   ("stmts", close, need)  statement list; `need` while still empty
#   ("cond",)               full condition starting at c(
#   ("cond_inner",)         after c(: `not` or a perception

_CLOSERS = {"m)", "w)", "r)", "i)", "e)"}


def _min_tokens(item):
    """Fewest further tokens that can discharge one expectation item."""
    kind = item[0]
    if kind in ("lit", "action", "perception", "repeat_count"):
        return 1
    if kind == "stmts":
        # the closing bracket is counted by the ("lit", close) item below
        return 1 if item[2] else 0  # shortest statement is one action
    if kind == "cond":
        return 3  # c( perception c)
    if kind == "cond_inner":
        return 2  # perception c)
    raise ValueError(item)


class GrammarState:
    """Mutable automaton state over canonical lexemes."""

    def __init__(self):
        # consumption order: DEF run m( <stmts> m)
        self.stack = [
            ("lit", "m)"),
            ("stmts", "m)", False),
            ("lit", "m("),
            ("lit", "run"),
            ("lit", "DEF"),
        ]
        self.n_tokens = 0

    def copy(self):
        other = GrammarState.__new__(GrammarState)
        other.stack = list(self.stack)
        other.n_tokens = self.n_tokens
        return other

    @property
    def complete(self):
        return not self.stack

    def min_tokens_to_close(self):
        return sum(_min_tokens(item) for item in self.stack)

    def valid_next(self):
        """All grammatically allowed next lexemes."""
        if not self.stack:
            return frozenset()
        item = self.stack[-1]
        kind = item[0]
        if kind == "lit":
            return frozenset((item[1],))
        if kind == "action":
            return frozenset(dsl.ACTIONS)
        if kind == "perception":
            return frozenset(dsl.PERCEPTIONS)
        if kind == "repeat_count":
            return frozenset(REPEAT_COUNTS)
        if kind == "stmts":
            allowed = set(STATEMENT_STARTERS)
            if not item[2]:
                allowed.add(item[1])
            return frozenset(allowed)
        if kind == "cond":
            return frozenset(("c(",))
        if kind == "cond_inner":
            return frozenset(("not",)) | frozenset(dsl.PERCEPTIONS)
        raise ValueError(item)

    def valid_next_within(self, budget):
        """Valid next lexemes that keep the program closable in ``budget``
        further tokens (including the candidate itself)."""
        allowed = set()
        for tok in self.valid_next():
            trial = self.copy()
            trial.advance(tok)
            if trial.min_tokens_to_close() <= budget - 1:
                allowed.add(tok)
        return frozenset(allowed)

    def advance(self, tok):
        if tok not in self.valid_next():
            raise dsl.ProgramSyntaxError(self.n_tokens, self.valid_next(), tok)
        item = self.stack[-1]
        kind = item[0]
        if kind == "stmts":
            if tok == item[1]:
                # the pending ("lit", close) underneath consumes the token
                self.stack.pop()
                return self.advance(tok)
            self.stack[-1] = ("stmts", item[1], False)
            self._push_statement(tok)
        elif kind == "cond":
            self.stack.pop()
            self.stack.append(("cond_inner",))
        elif kind == "cond_inner":
            self.stack.pop()
            if tok == "not":
                # remaining: c( perception c) c)
                self.stack += [
                    ("lit", "c)"),
                    ("lit", "c)"),
                    ("perception",),
                    ("lit", "c("),
                ]
            else:
                self.stack.append(("lit", "c)"))
        else:
            self.stack.pop()
        self.n_tokens += 1

    def _push_statement(self, tok):
        if tok in dsl.ACTIONS:
            pass
        elif tok == "WHILE":
            self.stack += [
                ("lit", "w)"),
                ("stmts", "w)", True),
                ("lit", "w("),
                ("cond",),
            ]
        elif tok == "REPEAT":
            self.stack += [
                ("lit", "r)"),
                ("stmts", "r)", True),
                ("lit", "r("),
                ("repeat_count",),
            ]
        elif tok == "IF":
            self.stack += [
                ("lit", "i)"),
                ("stmts", "i)", True),
                ("lit", "i("),
                ("cond",),
            ]
        elif tok == "IFELSE":
            self.stack += [
                ("lit", "e)"),
                ("stmts", "e)", True),
                ("lit", "e("),
                ("lit", "ELSE"),
                ("lit", "i)"),
                ("stmts", "i)", True),
                ("lit", "i("),
                ("cond",),
            ]
        else:
            raise ValueError(tok)
