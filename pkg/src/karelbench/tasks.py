"""The ten benchmark tasks: initial-configuration samplers, per-transition
reward hooks, and termination predicates.

Each task produces Episode objects.  An episode owns a WorldState plus the
task bookkeeping and exposes ``step(action) -> (reward, done, event)``;
rewards are incremental so the accumulated return always lies in [0, 1]
and equals the task's published return definition at episode end.

All tasks use an 8x8 grid whose boundary ring is walls (6x6 playable
interior), except CleanHouse which uses a fixed 14x22 apartment layout.
"""

from __future__ import annotations

import numpy as np

from . import interpreter, world as W
from .world import BLOCKED, EAST, NORTH, SOUTH, WEST

TASK_IDS = (
    "StairClimber",
    "FourCorner",
    "TopOff",
    "Maze",
    "CleanHouse",
    "Harvester",
    "DoorKey",
    "OneStroke",
    "Seeder",
    "Snake",
)

GRID = 8  # default grid edge, wall ring included
CLEANHOUSE_DIMS = (14, 22)


def _ringed_world(rows=GRID, cols=GRID):
    s = W.WorldState.empty(rows, cols, agent_row=1, agent_col=1, facing=EAST)
    for c in range(cols):
        s.set_wall(0, c)
        s.set_wall(rows - 1, c)
    for r in range(rows):
        s.set_wall(r, 0)
        s.set_wall(r, cols - 1)
    return s


class Episode:
    """One live task instance.  ``done`` is absorbing."""

    task_id = None

    def __init__(self, world, rng):
        self.world = world
        self.rng = rng
        self.done = False
        self.ret = 0.0

    def step(self, action):
        if self.done:
            raise interpreter.EpisodeAlreadyDone(self.task_id)
        reward, done, event = self._transition(action)
        self.ret += reward
        self.done = done
        return reward, done, event

    def _transition(self, action):
        raise NotImplementedError


class StairClimberEpisode(Episode):
    """Reach the marked cell on the upper part of the staircase (+1, done)."""

    task_id = "StairClimber"

    # Width-1 zigzag from the bottom-left to the top-right of the interior.
    STAIR_CELLS = [
        (6, 1), (5, 1), (5, 2), (4, 2), (4, 3), (3, 3),
        (3, 4), (2, 4), (2, 5), (1, 5), (1, 6),
    ]

    @classmethod
    def sample(cls, rng):
        s = W.WorldState.empty(GRID, GRID, 0, 0, EAST)
        for r in range(GRID):
            for c in range(GRID):
                s.set_wall(r, c)
        for r, c in cls.STAIR_CELLS:
            s.set_wall(r, c, False)
        # agent on the lower portion, marker strictly higher up the stair
        agent_i = int(rng.integers(0, 7))
        marker_i = int(rng.integers(agent_i + 1, len(cls.STAIR_CELLS)))
        s.agent_row, s.agent_col = cls.STAIR_CELLS[agent_i]
        s.facing = int(rng.integers(0, 4))
        mr, mc = cls.STAIR_CELLS[marker_i]
        s.set_markers(mr, mc, 1)
        ep = cls(s, rng)
        ep.goal = (mr, mc)
        return ep

    def _transition(self, action):
        event = W.apply_action(self.world, action)
        if (self.world.agent_row, self.world.agent_col) == self.goal:
            return 1.0, True, event
        return 0.0, False, event


class FourCornerEpisode(Episode):
    """Terminal return is 0.25 per correctly marked interior corner; any
    marker elsewhere voids the score.  Realized as a potential difference so
    the cumulative return equals the terminal score."""

    task_id = "FourCorner"

    CORNERS = ((1, 1), (1, GRID - 2), (GRID - 2, 1), (GRID - 2, GRID - 2))

    @classmethod
    def sample(cls, rng):
        s = _ringed_world()
        s.agent_row = GRID - 2
        s.agent_col = int(rng.integers(2, GRID - 2))  # bottom row, not a corner
        s.facing = EAST
        return cls(s, rng)

    def _score(self):
        corner_set = set(self.CORNERS)
        score = 0
        for r in range(1, GRID - 1):
            for c in range(1, GRID - 1):
                if self.world.marker_count(r, c) > 0 and (r, c) not in corner_set:
                    return 0.0
        for r, c in self.CORNERS:
            if self.world.marker_count(r, c) > 0:
                score += 1
        return 0.25 * score

    def _transition(self, action):
        before = self._score() if action in ("putMarker", "pickMarker") else None
        event = W.apply_action(self.world, action)
        if before is None:
            return 0.0, False, event
        return self._score() - before, False, event


class TopOffEpisode(Episode):
    """Top off every marked cell of the bottom interior row, left to right,
    and visit the rightmost cell for the bonus share."""

    task_id = "TopOff"

    ROW = GRID - 2

    @classmethod
    def sample(cls, rng):
        s = _ringed_world()
        s.agent_row, s.agent_col = cls.ROW, 1
        s.facing = EAST
        n_markers = int(rng.integers(2, 5))
        cols = rng.choice(np.arange(2, GRID - 1), size=n_markers, replace=False)
        for c in cols:
            s.set_markers(cls.ROW, int(c), 1)
        ep = cls(s, rng)
        ep.marked_cols = sorted(int(c) for c in cols)
        ep.visited_rightmost = False
        return ep

    def _potential(self):
        share = 1.0 / (len(self.marked_cols) + 1)
        prefix = 0
        for c in range(1, GRID - 1):
            count = self.world.marker_count(self.ROW, c)
            if c in self.marked_cols:
                if count < 2:
                    break
                prefix += 1
            elif count > 0:
                break
        return share * prefix + (share if self.visited_rightmost else 0.0)

    def _transition(self, action):
        before = self._potential()
        event = W.apply_action(self.world, action)
        if (self.world.agent_row, self.world.agent_col) == (self.ROW, GRID - 2):
            self.visited_rightmost = True
        return self._potential() - before, False, event


class MazeEpisode(Episode):
    """Reach the marker in a perfect maze (+1, done).

    The maze is carved with a recursive backtracker on the 3x3 lattice of
    odd interior cells; configurations are resampled until the canonical
    wall-follower solves them within 90 actions so that the task is
    achievable under the per-program action budget.
    """

    task_id = "Maze"

    NODES = (1, 3, 5)

    @classmethod
    def _carve(cls, rng):
        s = W.WorldState.empty(GRID, GRID, 0, 0, EAST)
        for r in range(GRID):
            for c in range(GRID):
                s.set_wall(r, c)
        nodes = [(r, c) for r in cls.NODES for c in cls.NODES]
        for r, c in nodes:
            s.set_wall(r, c, False)
        # iterative backtracker over the node lattice
        start = nodes[int(rng.integers(len(nodes)))]
        stack = [start]
        seen = {start}
        while stack:
            r, c = stack[-1]
            neighbors = [
                (r + dr, c + dc)
                for dr, dc in ((-2, 0), (2, 0), (0, -2), (0, 2))
                if (r + dr, c + dc) in set(nodes) and (r + dr, c + dc) not in seen
            ]
            if not neighbors:
                stack.pop()
                continue
            nr, nc = neighbors[int(rng.integers(len(neighbors)))]
            s.set_wall((r + nr) // 2, (c + nc) // 2, False)
            seen.add((nr, nc))
            stack.append((nr, nc))
        return s

    @staticmethod
    def _follower_cost(state, goal, budget=90):
        """Actions the turnRight/move wall follower needs to reach ``goal``."""
        s = state.copy()
        for n in range(1, budget + 1, 2):
            W.apply_action(s, "turnRight")
            W.apply_action(s, "move")
            if (s.agent_row, s.agent_col) == goal:
                return n + 1
        return None

    @classmethod
    def sample(cls, rng):
        while True:
            s = cls._carve(rng)
            free = [
                (r, c)
                for r in range(GRID)
                for c in range(GRID)
                if not s.is_wall(r, c)
            ]
            picks = rng.choice(len(free), size=2, replace=False)
            (ar, ac), (mr, mc) = free[int(picks[0])], free[int(picks[1])]
            s.agent_row, s.agent_col = ar, ac
            s.facing = int(rng.integers(0, 4))
            if cls._follower_cost(s, (mr, mc)) is None:
                continue
            s.set_markers(mr, mc, 1)
            ep = cls(s, rng)
            ep.goal = (mr, mc)
            return ep

    def _transition(self, action):
        event = W.apply_action(self.world, action)
        if (self.world.agent_row, self.world.agent_col) == self.goal:
            return 1.0, True, event
        return 0.0, False, event


CLEANHOUSE_LAYOUT = (
    "######################",
    "#......#.............#",
    "#......#.............#",
    "#......#......####...#",
    "#...####......#......#",
    "#.............#......#",
    "#......####...#......#",
    "####...#..#####....###",
    "#......#.............#",
    "#......#.............#",
    "#......#.....####....#",
    "#...####.....#.......#",
    "#............#.......#",
    "######################",
)


class CleanHouseEpisode(Episode):
    """Pick up all scattered markers in the apartment; return is the picked
    fraction.  The layout is fixed, the agent start is fixed, marker spots
    are randomized among wall-adjacent free cells."""

    task_id = "CleanHouse"

    N_MARKERS = 10
    AGENT_START = (1, 13)

    @classmethod
    def sample(cls, rng):
        rows, cols = CLEANHOUSE_DIMS
        s = W.WorldState.empty(rows, cols, *cls.AGENT_START, facing=SOUTH)
        for r, line in enumerate(CLEANHOUSE_LAYOUT):
            for c, ch in enumerate(line):
                if ch == "#":
                    s.set_wall(r, c)
        candidates = [
            (r, c)
            for r in range(1, rows - 1)
            for c in range(1, cols - 1)
            if not s.is_wall(r, c)
            and (r, c) != cls.AGENT_START
            and any(
                s.is_wall(r + dr, c + dc)
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1))
            )
        ]
        picks = rng.choice(len(candidates), size=cls.N_MARKERS, replace=False)
        targets = set()
        for i in picks:
            r, c = candidates[int(i)]
            s.set_markers(r, c, 1)
            targets.add((r, c))
        ep = cls(s, rng)
        ep.remaining = targets
        ep.total = len(targets)
        return ep

    def _transition(self, action):
        event = W.apply_action(self.world, action)
        pos = (self.world.agent_row, self.world.agent_col)
        if action == "pickMarker" and event == W.OK and pos in self.remaining:
            self.remaining.discard(pos)
            return 1.0 / self.total, not self.remaining, event
        return 0.0, False, event


class HarvesterEpisode(Episode):
    """Every interior cell starts with one marker; return is the fraction
    picked.  The spawn is fixed (see module tests for how it was chosen)."""

    task_id = "Harvester"

    AGENT_START = (6, 1)
    AGENT_FACING = EAST

    @classmethod
    def sample(cls, rng):
        s = _ringed_world()
        for r in range(1, GRID - 1):
            for c in range(1, GRID - 1):
                s.set_markers(r, c, 1)
        s.agent_row, s.agent_col = cls.AGENT_START
        s.facing = cls.AGENT_FACING
        ep = cls(s, rng)
        ep.remaining = {(r, c) for r in range(1, GRID - 1) for c in range(1, GRID - 1)}
        ep.total = len(ep.remaining)
        return ep

    def _transition(self, action):
        event = W.apply_action(self.world, action)
        pos = (self.world.agent_row, self.world.agent_col)
        if action == "pickMarker" and event == W.OK and pos in self.remaining:
            self.remaining.discard(pos)
            return 1.0 / self.total, not self.remaining, event
        return 0.0, False, event


class DoorKeyEpisode(Episode):
    """Pick up the key in the left chamber (opens the door, +0.5), then top
    off the target marker in the right chamber (+0.5, done)."""

    task_id = "DoorKey"

    WALL_COL = 4

    @classmethod
    def sample(cls, rng):
        s = _ringed_world()
        for r in range(1, GRID - 1):
            s.set_wall(r, cls.WALL_COL)
        left = [(r, c) for r in range(1, GRID - 1) for c in range(1, cls.WALL_COL)]
        right = [(r, c) for r in range(1, GRID - 1) for c in range(cls.WALL_COL + 1, GRID - 1)]
        agent = left[int(rng.integers(len(left)))]
        key = left[int(rng.integers(len(left)))]
        while key == agent:
            key = left[int(rng.integers(len(left)))]
        target = right[int(rng.integers(len(right)))]
        s.agent_row, s.agent_col = agent
        s.facing = int(rng.integers(0, 4))
        s.set_markers(*key, 1)
        s.set_markers(*target, 1)
        ep = cls(s, rng)
        ep.key = key
        ep.target = target
        ep.door = (int(rng.integers(1, GRID - 1)), cls.WALL_COL)
        ep.key_picked = False
        return ep

    def _transition(self, action):
        event = W.apply_action(self.world, action)
        pos = (self.world.agent_row, self.world.agent_col)
        if (
            action == "pickMarker"
            and event == W.OK
            and pos == self.key
            and not self.key_picked
        ):
            self.key_picked = True
            self.world.set_wall(*self.door, False)
            return 0.5, False, event
        if action == "putMarker" and event == W.OK and pos == self.target:
            return 0.5, True, event
        return 0.0, False, event


class OneStrokeEpisode(Episode):
    """Traverse as many cells as possible; left cells turn into walls and
    hitting any wall ends the episode.  Return is visited/36 (the start
    cell counts and is credited on the first action)."""

    task_id = "OneStroke"

    @classmethod
    def sample(cls, rng):
        s = _ringed_world()
        s.agent_row = int(rng.integers(1, GRID - 1))
        s.agent_col = int(rng.integers(1, GRID - 1))
        s.facing = int(rng.integers(0, 4))
        ep = cls(s, rng)
        ep.total = (GRID - 2) ** 2
        ep.visited = 1
        ep.start_credited = False
        return ep

    def _transition(self, action):
        reward = 0.0
        if not self.start_credited:
            self.start_credited = True
            reward += 1.0 / self.total
        if action == "move":
            prev = (self.world.agent_row, self.world.agent_col)
            event = W.apply_action(self.world, action)
            if event == BLOCKED:
                return reward, True, event
            self.world.set_wall(*prev)
            self.visited += 1
            reward += 1.0 / self.total
            return reward, self.visited >= self.total, event
        event = W.apply_action(self.world, action)
        return reward, False, event


class SeederEpisode(Episode):
    """Place one marker on every interior cell; placing where a marker
    already sits ends the episode.  Return is placed/36."""

    task_id = "Seeder"

    @classmethod
    def sample(cls, rng):
        s = _ringed_world()
        s.agent_row = int(rng.integers(1, GRID - 1))
        s.agent_col = int(rng.integers(1, GRID - 1))
        s.facing = int(rng.integers(0, 4))
        ep = cls(s, rng)
        ep.total = (GRID - 2) ** 2
        ep.placed = 0
        return ep

    def _transition(self, action):
        if action == "putMarker":
            pos = (self.world.agent_row, self.world.agent_col)
            repeat = self.world.marker_count(*pos) > 0
            event = W.apply_action(self.world, action)
            if repeat:
                return 0.0, True, event
            self.placed += 1
            return 1.0 / self.total, self.placed >= self.total, event
        event = W.apply_action(self.world, action)
        return 0.0, False, event


class SnakeEpisode(Episode):
    """Eat 20 markers; the body (rendered as walls) grows by one per marker
    and self-collision ends the episode.  Return is eaten/20."""

    task_id = "Snake"

    TARGET = 20
    INIT_BODY = ((3, 2), (3, 1))
    HEAD = (3, 3)

    @classmethod
    def sample(cls, rng):
        s = _ringed_world()
        s.agent_row, s.agent_col = cls.HEAD
        s.facing = EAST
        ep = cls(s, rng)
        ep.body = list(cls.INIT_BODY)  # nearest-to-head first
        for cell in ep.body:
            s.set_wall(*cell)
        ep.eaten = 0
        ep._spawn_food()
        return ep

    def _spawn_food(self):
        free = [
            (r, c)
            for r in range(1, GRID - 1)
            for c in range(1, GRID - 1)
            if not self.world.is_wall(r, c)
            and (r, c) != (self.world.agent_row, self.world.agent_col)
        ]
        r, c = free[int(self.rng.integers(len(free)))]
        self.world.set_markers(r, c, 1)
        self.food = (r, c)

    def _transition(self, action):
        if action != "move":
            event = W.apply_action(self.world, action)
            return 0.0, False, event
        head = (self.world.agent_row, self.world.agent_col)
        dr, dc = W.DELTAS[self.world.facing]
        front = (head[0] + dr, head[1] + dc)
        if self.world.is_wall(*front):
            if front in self.body:
                return 0.0, True, BLOCKED  # self-collision
            event = W.apply_action(self.world, action)  # bounce off the wall
            return 0.0, False, event
        event = W.apply_action(self.world, action)
        ate = front == self.food
        self.body.insert(0, head)
        self.world.set_wall(*head)
        if ate:
            self.world.set_markers(*front, 0)
            self.eaten += 1
            done = self.eaten >= self.TARGET
            if not done:
                self._spawn_food()
            return 1.0 / self.TARGET, done, event
        tail = self.body.pop()
        self.world.set_wall(*tail, False)
        return 0.0, False, event


EPISODE_TYPES = {
    "StairClimber": StairClimberEpisode,
    "FourCorner": FourCornerEpisode,
    "TopOff": TopOffEpisode,
    "Maze": MazeEpisode,
    "CleanHouse": CleanHouseEpisode,
    "Harvester": HarvesterEpisode,
    "DoorKey": DoorKeyEpisode,
    "OneStroke": OneStrokeEpisode,
    "Seeder": SeederEpisode,
    "Snake": SnakeEpisode,
}


def sample_init(task_id, rng):
    """Sample a fresh episode for ``task_id`` from a seeded generator."""
    if task_id not in EPISODE_TYPES:
        raise KeyError(f"unknown task {task_id!r}; expected one of {TASK_IDS}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return EPISODE_TYPES[task_id].sample(rng)


def config_rng(seed, index):
    """Per-configuration generator: independent streams per (seed, index)."""
    return np.random.default_rng([seed, index])


def evaluate_program(task_id, programs, n_configs=10, seed=0, limits=None):
    """Mean return of a program (or ordered program sequence) over seeded
    initial configurations.  Each sub-program gets its own action budget,
    matching the macro-composition semantics."""
    from . import dsl

    if isinstance(programs, dsl.Program):
        programs = [programs]
    limits = limits or interpreter.ExecLimits()
    returns = []
    for i in range(n_configs):
        episode = sample_init(task_id, config_rng(seed, i))
        for program in programs:
            if episode.done:
                break
            interpreter.exec_in_task(program, episode, limits)
        returns.append(episode.ret)
    return float(np.mean(returns)), returns
