"""Karel grid world: state, perceptions, and primitive-action semantics.

Coordinate convention: row 0 is the top row, column 0 the leftmost column.
North decreases the row index, East increases the column index.  Cells
outside the grid behave as walls for both perception and movement.

A blocked ``move`` leaves the agent's position unchanged but reverses its
facing (the classic Karel "bounce").  This is what makes the published
wall-follower programs (``WHILE ... w( turnRight move w)``) traverse
corridors instead of oscillating between two cells, and every golden
program in the reference corpus depends on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3
FACING_NAMES = ("North", "East", "South", "West")

# (drow, dcol) per facing
DELTAS = ((-1, 0), (0, 1), (1, 0), (0, -1))

MAX_MARKERS = 10
N_CHANNELS = 16  # 4 facing + 1 wall + 11 marker counts

ACTION_IDS = {"move": 0, "turnLeft": 1, "turnRight": 2, "putMarker": 3, "pickMarker": 4}
ACTION_NAMES = ("move", "turnLeft", "turnRight", "putMarker", "pickMarker")

# Events emitted by apply_action; OK means the action had its normal effect.
OK = "ok"
BLOCKED = "blocked"
SATURATED = "saturated"
INVALID_PICK = "invalid_pick"


class DimensionMismatch(ValueError):
    pass


@dataclass
class WorldState:
    rows: int
    cols: int
    walls: bytearray
    markers: bytearray
    agent_row: int
    agent_col: int
    facing: int

    @classmethod
    def empty(cls, rows, cols, agent_row=0, agent_col=0, facing=EAST):
        n = rows * cols
        return cls(rows, cols, bytearray(n), bytearray(n), agent_row, agent_col, facing)

    def copy(self):
        return WorldState(
            self.rows,
            self.cols,
            bytearray(self.walls),
            bytearray(self.markers),
            self.agent_row,
            self.agent_col,
            self.facing,
        )

    def idx(self, row, col):
        return row * self.cols + col

    def in_grid(self, row, col):
        return 0 <= row < self.rows and 0 <= col < self.cols

    def is_wall(self, row, col):
        if not self.in_grid(row, col):
            return True
        return bool(self.walls[row * self.cols + col])

    def set_wall(self, row, col, value=True):
        self.walls[row * self.cols + col] = 1 if value else 0

    def marker_count(self, row, col):
        return self.markers[row * self.cols + col]

    def set_markers(self, row, col, count):
        if not 0 <= count <= MAX_MARKERS:
            raise ValueError(f"marker count {count} out of range")
        self.markers[row * self.cols + col] = count

    def front_cell(self):
        dr, dc = DELTAS[self.facing]
        return self.agent_row + dr, self.agent_col + dc


def state_eq(a, b):
    """True iff walls, markers, position, and facing all match."""
    if a.rows != b.rows or a.cols != b.cols:
        raise DimensionMismatch(f"{a.rows}x{a.cols} vs {b.rows}x{b.cols}")
    return (
        a.agent_row == b.agent_row
        and a.agent_col == b.agent_col
        and a.facing == b.facing
        and a.walls == b.walls
        and a.markers == b.markers
    )


def state_key(state):
    """Hashable fingerprint of a state (same dims assumed by the caller)."""
    return (
        bytes(state.walls),
        bytes(state.markers),
        state.agent_row,
        state.agent_col,
        state.facing,
    )


def eval_perception(state, cond):
    """Evaluate a parsed Condition against the world."""
    p = cond.perception
    if p == "frontIsClear":
        dr, dc = DELTAS[state.facing]
        result = not state.is_wall(state.agent_row + dr, state.agent_col + dc)
    elif p == "leftIsClear":
        dr, dc = DELTAS[(state.facing - 1) % 4]
        result = not state.is_wall(state.agent_row + dr, state.agent_col + dc)
    elif p == "rightIsClear":
        dr, dc = DELTAS[(state.facing + 1) % 4]
        result = not state.is_wall(state.agent_row + dr, state.agent_col + dc)
    elif p == "markersPresent":
        result = state.marker_count(state.agent_row, state.agent_col) >= 1
    elif p == "noMarkersPresent":
        result = state.marker_count(state.agent_row, state.agent_col) == 0
    else:  # pragma: no cover
        raise ValueError(f"unknown perception {p!r}")
    return not result if cond.negated else result


def apply_action(state, action):
    """Mutate ``state`` by one primitive action; return the resulting event.

    move:       advance one cell if the front is clear, otherwise stay put
                and reverse facing (BLOCKED).
    turnLeft:   rotate facing 90 degrees counterclockwise.
    turnRight:  rotate facing 90 degrees clockwise.
    putMarker:  increment the agent-cell count, saturating at 10 (SATURATED).
    pickMarker: decrement the agent-cell count if >= 1, else no-op
                (INVALID_PICK).
    """
    if action == "move":
        dr, dc = DELTAS[state.facing]
        nr, nc = state.agent_row + dr, state.agent_col + dc
        if state.is_wall(nr, nc):
            state.facing = (state.facing + 2) % 4
            return BLOCKED
        state.agent_row, state.agent_col = nr, nc
        return OK
    if action == "turnLeft":
        state.facing = (state.facing - 1) % 4
        return OK
    if action == "turnRight":
        state.facing = (state.facing + 1) % 4
        return OK
    if action == "putMarker":
        i = state.idx(state.agent_row, state.agent_col)
        if state.markers[i] >= MAX_MARKERS:
            return SATURATED
        state.markers[i] += 1
        return OK
    if action == "pickMarker":
        i = state.idx(state.agent_row, state.agent_col)
        if state.markers[i] == 0:
            return INVALID_PICK
        state.markers[i] -= 1
        return OK
    raise ValueError(f"unknown action {action!r}")


def encode_tensor(state):
    """Binary tensor rows x cols x 16.

    Channels 0-3: facing one-hot at the agent cell; channel 4: walls;
    channels 5-15: marker-count one-hot for counts 0..10.
    """
    t = np.zeros((state.rows, state.cols, N_CHANNELS), dtype=bool)
    t[state.agent_row, state.agent_col, state.facing] = True
    walls = np.frombuffer(bytes(state.walls), dtype=np.uint8).reshape(
        state.rows, state.cols
    )
    t[:, :, 4] = walls.astype(bool)
    counts = np.frombuffer(bytes(state.markers), dtype=np.uint8).reshape(
        state.rows, state.cols
    )
    rows_idx, cols_idx = np.indices((state.rows, state.cols))
    t[rows_idx, cols_idx, 5 + counts] = True
    return t


def decode_tensor(t):
    """Inverse of :func:`encode_tensor` (lossless for counts <= 10)."""
    rows, cols, channels = t.shape
    if channels != N_CHANNELS:
        raise DimensionMismatch(f"expected {N_CHANNELS} channels, got {channels}")
    agent = np.argwhere(t[:, :, :4])
    if len(agent) != 1:
        raise ValueError(f"expected exactly one facing bit, found {len(agent)}")
    ar, ac, facing = (int(x) for x in agent[0])
    walls = bytearray(t[:, :, 4].astype(np.uint8).reshape(-1).tobytes())
    counts = np.argmax(t[:, :, 5:], axis=2).astype(np.uint8)
    markers = bytearray(counts.reshape(-1).tobytes())
    return WorldState(rows, cols, walls, markers, ar, ac, facing)


AGENT_GLYPHS = {NORTH: "^", EAST: ">", SOUTH: "v", WEST: "<"}


def render_ascii(state):
    """Debug rendering: '#' walls, digits marker counts, '^>v<' the agent."""
    lines = []
    for r in range(state.rows):
        chars = []
        for c in range(state.cols):
            if r == state.agent_row and c == state.agent_col:
                chars.append(AGENT_GLYPHS[state.facing])
            elif state.is_wall(r, c):
                chars.append("#")
            else:
                m = state.marker_count(r, c)
                chars.append(str(m) if m else ".")
        lines.append("".join(chars))
    return "\n".join(lines)


TRACE_MAGIC = b"KTRC"


def write_trace_blob(fh, states):
    """Packed-bitplane trace format: header (dims, channels) + one packed
    tensor per step."""
    import struct

    if not states:
        raise ValueError("empty trace")
    rows, cols = states[0].rows, states[0].cols
    fh.write(TRACE_MAGIC)
    fh.write(struct.pack("<IIII", rows, cols, N_CHANNELS, len(states)))
    for s in states:
        fh.write(np.packbits(encode_tensor(s).reshape(-1)).tobytes())


def read_trace_blob(fh):
    import struct

    magic = fh.read(4)
    if magic != TRACE_MAGIC:
        raise ValueError("not a trace blob")
    rows, cols, channels, n_steps = struct.unpack("<IIII", fh.read(16))
    n_bits = rows * cols * channels
    n_bytes = (n_bits + 7) // 8
    states = []
    for _ in range(n_steps):
        packed = np.frombuffer(fh.read(n_bytes), dtype=np.uint8)
        bits = np.unpackbits(packed)[:n_bits].astype(bool)
        states.append(decode_tensor(bits.reshape(rows, cols, channels)))
    return states
