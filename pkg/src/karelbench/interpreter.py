"""Program execution against a world or a task episode.

Execution is bounded by an action budget (default 100 primitive actions
per call).  Perception evaluations are free; only the five primitive
actions count.  Hitting the budget abandons the rest of the program.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import dsl, world as W

PROGRAM_END = "program_end"
ACTION_BUDGET = "action_budget"
TASK_DONE = "task_done"


class EpisodeAlreadyDone(RuntimeError):
    pass


@dataclass
class ExecLimits:
    max_actions: int = 100

    def __post_init__(self):
        if self.max_actions < 1:
            raise ValueError("max_actions must be >= 1")


@dataclass
class ExecTrace:
    states: list = field(default_factory=list)  # s_1 .. s_T (copies), if recorded
    actions: list = field(default_factory=list)
    events: list = field(default_factory=list)
    terminated_by: str = PROGRAM_END

    @property
    def n_actions(self):
        return len(self.actions)


class _Halt(Exception):
    def __init__(self, reason):
        self.reason = reason


class _Runner:
    """Walks a program AST, routing each primitive action through a step
    callable ``step(action) -> event-or-None`` that returns a truthy halt
    reason to stop execution."""

    def __init__(self, state, step, limits):
        self.state = state
        self.step = step
        self.remaining = limits.max_actions
        self.n_actions = 0

    def do(self, action):
        halt = self.step(action)
        self.remaining -= 1
        self.n_actions += 1
        if halt:
            raise _Halt(halt)
        if self.remaining <= 0:
            raise _Halt(ACTION_BUDGET)

    def run_body(self, body):
        for stmt in body:
            self.run_statement(stmt)

    def run_statement(self, stmt):
        if isinstance(stmt, dsl.Action):
            self.do(stmt.name)
        elif isinstance(stmt, dsl.While):
            while W.eval_perception(self.state, stmt.cond):
                before = self.n_actions
                self.run_body(stmt.body)
                if self.n_actions == before:
                    # A full pass without actions cannot have changed the
                    # state, so the condition would hold forever; the only
                    # sound continuation is to leave the loop.
                    break
        elif isinstance(stmt, dsl.Repeat):
            for _ in range(stmt.times):
                self.run_body(stmt.body)
        elif isinstance(stmt, dsl.If):
            if W.eval_perception(self.state, stmt.cond):
                self.run_body(stmt.body)
        elif isinstance(stmt, dsl.IfElse):
            if W.eval_perception(self.state, stmt.cond):
                self.run_body(stmt.then_body)
            else:
                self.run_body(stmt.else_body)
        else:  # pragma: no cover
            raise TypeError(f"not a statement: {stmt!r}")


def exec_program(program, state, limits=None, record_states=True):
    """Execute ``program`` against a copy of ``state``; return an ExecTrace.

    The trace includes the initial state, so len(states) == len(actions)+1
    when states are recorded.
    """
    limits = limits or ExecLimits()
    state = state.copy()
    trace = ExecTrace()
    if record_states:
        trace.states.append(state.copy())

    def step(action):
        event = W.apply_action(state, action)
        trace.actions.append(action)
        trace.events.append(event)
        if record_states:
            trace.states.append(state.copy())
        return None

    runner = _Runner(state, step, limits)
    try:
        runner.run_body(program.body)
    except _Halt as halt:
        trace.terminated_by = halt.reason
    trace.final_state = state
    return trace


def exec_in_task(program, episode, limits=None, record_states=False):
    """Execute one program against a live task episode.

    Each primitive action routes through the episode's transition hook;
    per-action rewards are collected.  Halts on budget exhaustion, program
    end, or task termination.  Returns (trace, rewards, done).
    """
    limits = limits or ExecLimits()
    if episode.done:
        raise EpisodeAlreadyDone(f"{episode.task_id} episode is already done")
    trace = ExecTrace()
    rewards = []
    if record_states:
        trace.states.append(episode.world.copy())

    def step(action):
        reward, done, event = episode.step(action)
        trace.actions.append(action)
        trace.events.append(event)
        rewards.append(reward)
        if record_states:
            trace.states.append(episode.world.copy())
        return TASK_DONE if done else None

    runner = _Runner(episode.world, step, limits)
    try:
        runner.run_body(program.body)
    except _Halt as halt:
        trace.terminated_by = halt.reason
    trace.final_state = episode.world
    return trace, rewards, episode.done
