"""Macro-episode engine: composes sub-programs against a live task episode,
one action budget per sub-program, with dense or episodic reward
attribution.  Also provides the state-sequence behavior match used for the
program reconstruction experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dsl, interpreter, tasks, world as W

DENSE = "dense"
EPISODIC = "episodic"


class ProviderFailure(RuntimeError):
    def __init__(self, macro_index, cause):
        super().__init__(f"program provider failed at macro step {macro_index}: {cause}")
        self.macro_index = macro_index
        self.cause = cause


@dataclass
class MetaEpisodeConfig:
    horizon: int = 5
    limits: interpreter.ExecLimits = field(default_factory=interpreter.ExecLimits)
    reward_mode: str = DENSE
    gamma: float = 0.99

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.reward_mode not in (DENSE, EPISODIC):
            raise ValueError(f"unknown reward mode {self.reward_mode!r}")


@dataclass
class MacroTransition:
    s_i: np.ndarray  # observation tensor before the sub-program ran
    z_i: object  # latent the provider decoded from, if any
    program_i: dsl.Program
    r_next: float  # summed per-action reward of this sub-program
    s_next: np.ndarray
    done: bool


def run_macro_episode(task_id, provider, cfg=None, rng=0):
    """Roll one macro episode: query ``provider(obs) -> (z, program)`` up to
    ``cfg.horizon`` times, executing each program against the live episode.

    In episodic mode all transitions carry zero reward except the last,
    which carries the episode total.  Stops early when the task terminates.
    """
    cfg = cfg or MetaEpisodeConfig()
    episode = tasks.sample_init(task_id, rng)
    transitions = []
    for i in range(1, cfg.horizon + 1):
        obs = W.encode_tensor(episode.world)
        try:
            z, program = provider(obs)
        except Exception as exc:
            raise ProviderFailure(i, exc) from exc
        _, rewards, done = interpreter.exec_in_task(program, episode, cfg.limits)
        transitions.append(
            MacroTransition(
                s_i=obs,
                z_i=z,
                program_i=program,
                r_next=float(sum(rewards)),
                s_next=W.encode_tensor(episode.world),
                done=done,
            )
        )
        if done:
            break
    if cfg.reward_mode == EPISODIC:
        total = sum(t.r_next for t in transitions)
        for t in transitions:
            t.r_next = 0.0
        transitions[-1].r_next = total
    return transitions


def discounted_return(transitions, gamma=0.99):
    return float(sum(t.r_next * gamma**i for i, t in enumerate(transitions)))


def compose(programs):
    """Concatenate sub-program bodies into one program.

    Note the single-DEF form is for readability; returns were earned under
    sequential execution with one action budget per sub-program.
    """
    body = []
    for p in programs:
        body.extend(p.body)
    return dsl.Program(body=tuple(body))


def multi_def_listing(programs):
    """The multi-DEF textual form of a composed program sequence."""
    return "\n".join(dsl.pretty(p) for p in programs)


def levenshtein(a, b):
    """Edit distance over two sequences of hashable items."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


@dataclass
class BehaviorTarget:
    states: list  # target state sequence s_1 .. s_T

    def __post_init__(self):
        if not self.states:
            raise ValueError("empty behavior target")


def behavior_target(program, init_state, limits=None):
    """Execute ``program`` from ``init_state`` and capture its state
    sequence as the matching target."""
    trace = interpreter.exec_program(program, init_state, limits, record_states=True)
    return BehaviorTarget(states=trace.states)


def _keys(states):
    dims = {(s.rows, s.cols) for s in states}
    if len(dims) > 1:
        raise W.DimensionMismatch(f"mixed state dims {sorted(dims)}")
    return [W.state_key(s) for s in states], dims.pop()


def behavior_score(target, states):
    """1 - normalized Levenshtein distance between state sequences.

    Accepts a BehaviorTarget or plain state list on either side; 1.0 iff
    the sequences are equal, 0.0 for fully disjoint equal-length ones.
    """
    a = target.states if isinstance(target, BehaviorTarget) else target
    b = states.states if isinstance(states, BehaviorTarget) else states
    ka, da = _keys(a)
    kb, db = _keys(b)
    if da != db:
        raise W.DimensionMismatch(f"{da} vs {db}")
    return 1.0 - levenshtein(ka, kb) / max(len(ka), len(kb))


_UNDO = {
    "turnLeft": "turnRight",
    "turnRight": "turnLeft",
    "putMarker": "pickMarker",
    "pickMarker": "putMarker",
}


def straightline_program(rng, length):
    """Random primitive-action program of exactly ``length`` actions, used
    as a reconstruction target.

    Adjacent self-cancelling pairs are excluded, same as the dataset
    filter; they alias distinct action prefixes onto identical state
    sequences, which makes behavior matching ill-posed.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    names = []
    while len(names) < length:
        name = dsl.ACTIONS[int(rng.integers(len(dsl.ACTIONS)))]
        if names and _UNDO.get(names[-1]) == name:
            continue
        names.append(name)
    return dsl.Program(body=tuple(dsl.Action(n) for n in names))


def identity_decoder(z):
    """Oracle decoder for harness validation: one latent coordinate per
    primitive action, nearest integer modulo the action count."""
    names = [dsl.ACTIONS[int(round(float(v))) % len(dsl.ACTIONS)] for v in z]
    return dsl.Program(body=tuple(dsl.Action(n) for n in names))


def _concat_states(init_state, programs, limits):
    state = init_state.copy()
    states = [state.copy()]
    for p in programs:
        trace = interpreter.exec_program(p, state, limits, record_states=True)
        states.extend(trace.states[1:])
        state = trace.final_state
    return states


def composed_reconstruction_search(
    target_program,
    init_state,
    decoder=identity_decoder,
    chunk_dim=5,
    horizon=5,
    rng=0,
    restarts=2,
    population=64,
    iterations=60,
    limits=None,
):
    """Search latent chunks macro step by macro step so the composed program
    reproduces the target's state sequence.

    Each step's CEM is guided by the match against the target prefix of the
    corresponding length: the full-sequence distance treats any in-order
    subsequence match the same as a prefix match, so a mis-aligned early
    chunk would leave an unfillable hole.  The returned score is against
    the full target.
    """
    from . import cem

    limits = limits or interpreter.ExecLimits()
    target_states = behavior_target(target_program, init_state, limits).states
    kept = []
    step_scores = []
    for n in range(1, horizon + 1):
        prefix = target_states[: 1 + chunk_dim * n]

        def objective(z):
            programs = kept + [decoder(z)]
            return behavior_score(prefix, _concat_states(init_state, programs, limits))

        best_value, best_z = -np.inf, None
        for r in range(restarts):
            cfg = cem.CemConfig(
                population=population,
                sigma=1.5,
                elite_fraction=0.1,
                exp_decay=True,
                decay_rate=0.97,
                sigma_floor=0.1,
                init_distribution=cem.INIT_NORMAL,
                max_iterations=iterations,
            )
            result = cem.cem_search(objective, chunk_dim, cfg, rng=[rng, n, r])
            if result.best_value > best_value:
                best_value, best_z = result.best_value, result.best_vector
            if best_value >= 1.0:
                break
        kept.append(decoder(best_z))
        step_scores.append(
            behavior_score(target_states, _concat_states(init_state, kept, limits))
        )
    return kept, step_scores


def reconstruction_scores(target_program, init_state, programs, limits=None):
    """Per-macro-step behavior match of composed prefixes against the
    target program's state sequence.

    Step n executes <p_1 .. p_n> from a fresh reset (each sub-program under
    its own budget) and scores the concatenated state sequence.  Returns
    the list of per-step scores; the last entry is the final objective.
    """
    limits = limits or interpreter.ExecLimits()
    target = behavior_target(target_program, init_state, limits)
    scores = []
    for n in range(1, len(programs) + 1):
        state = init_state.copy()
        states = [state.copy()]
        for p in programs[:n]:
            trace = interpreter.exec_program(p, state, limits, record_states=True)
            states.extend(trace.states[1:])
            state = trace.final_state
        scores.append(behavior_score(target, states))
    return scores
