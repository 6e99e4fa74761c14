import numpy as np
import pytest

from karelbench import dsl, golden

from karellearn import grammar


def replay(text):
    state = grammar.GrammarState()
    for tok in text.split():
        state.advance(tok)
    return state


def test_corpus_accepted():
    for task, variant, i, text in golden.iter_listings():
        assert replay(text).complete


def test_empty_program_accepted():
    assert replay("DEF run m( m)").complete


def test_invalid_token_rejected():
    state = grammar.GrammarState()
    state.advance("DEF")
    with pytest.raises(dsl.ProgramSyntaxError):
        state.advance("move")


def test_control_bodies_require_statement():
    state = replay("DEF run m( WHILE c( frontIsClear c) w(")
    assert "w)" not in state.valid_next()
    state.advance("move")
    assert "w)" in state.valid_next()


def test_negated_condition_path():
    text = "DEF run m( IF c( not c( markersPresent c) c) i( move i) m)"
    assert replay(text).complete
    assert dsl.parse_text(text)


def test_min_tokens_matches_shortest_completion():
    state = replay("DEF run m(")
    assert state.min_tokens_to_close() == 1  # just m)
    state = replay("DEF run m( WHILE")
    # c( perception c) w( action w) m)
    assert state.min_tokens_to_close() == 7


def test_budget_forces_closure():
    state = replay("DEF run m( move")
    # 2 tokens left: nothing that opens a structure may be chosen
    allowed = state.valid_next_within(2)
    assert allowed <= set(dsl.ACTIONS) | {"m)"}
    assert "WHILE" not in allowed
    assert state.valid_next_within(1) == {"m)"}


def test_random_walks_parse_within_budget():
    rng = np.random.default_rng(7)
    for _ in range(500):
        state = grammar.GrammarState()
        lexemes = []
        while not state.complete:
            allowed = sorted(state.valid_next_within(40 - state.n_tokens))
            assert allowed
            tok = allowed[int(rng.integers(len(allowed)))]
            lexemes.append(tok)
            state.advance(tok)
        assert len(lexemes) <= 40
        program = dsl.parse_text(" ".join(lexemes))
        assert dsl.pretty(program) == " ".join(lexemes)
