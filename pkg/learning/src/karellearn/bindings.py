"""Environment handles and the frozen token vocabulary.

The learning stack touches the core only through this module: seeded
episode handles with a macro-step interface, state tensors exported as
contiguous row-major byte buffers with a shape header, and a versioned
bijection between canonical token text and integer ids.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from karelbench import dsl, interpreter, tasks, world as W


class ClosedHandle(RuntimeError):
    """Operation on a handle after close()."""


_HEADER = struct.Struct("<3I")


class TensorBuffer:
    """A state tensor as a contiguous row-major float32 byte buffer.

    Layout: 12-byte header (rows, cols, channels as little-endian uint32)
    followed by the raw float32 data.  ``array`` views the payload without
    copying.
    """

    def __init__(self, data):
        self._bytes = bytes(data)
        self.rows, self.cols, self.channels = _HEADER.unpack_from(self._bytes)

    @classmethod
    def from_array(cls, arr):
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        header = _HEADER.pack(*arr.shape)
        return cls(header + arr.tobytes())

    @property
    def array(self):
        payload = memoryview(self._bytes)[_HEADER.size :]
        return np.frombuffer(payload, dtype=np.float32).reshape(
            self.rows, self.cols, self.channels
        )

    def to_bytes(self):
        return self._bytes


class EnvHandle:
    """Single-owner handle over one task episode.

    Not shareable across concurrent contexts; create one handle per
    parallel actor.
    """

    def __init__(self, task_id, seed=0):
        if task_id not in tasks.TASK_IDS:
            raise KeyError(f"unknown task {task_id!r}")
        self.task_id = task_id
        self._episode = None
        self._closed = False
        self.reset(seed)

    def _check_open(self):
        if self._closed:
            raise ClosedHandle(f"handle for {self.task_id} is closed")

    def reset(self, seed=0):
        """Start a fresh episode; returns the initial state tensor."""
        self._check_open()
        self._episode = tasks.sample_init(self.task_id, np.random.default_rng(seed))
        return self._observe()

    def _observe(self):
        return TensorBuffer.from_array(W.encode_tensor(self._episode.world))

    def step_program(self, program_text, limits=None):
        """Execute one sub-program as a macro step.

        Returns ``(state, reward, done, info)`` where reward is the summed
        per-action reward of this sub-program.  Parse errors propagate
        with their token position.
        """
        self._check_open()
        if self._episode.done:
            raise interpreter.EpisodeAlreadyDone(self.task_id)
        program = dsl.parse_text(program_text)
        trace, rewards, done = interpreter.exec_in_task(
            program, self._episode, limits or interpreter.ExecLimits()
        )
        info = {
            "n_actions": trace.n_actions,
            "events": list(trace.events),
            "terminated_by": trace.terminated_by,
        }
        return self._observe(), float(sum(rewards)), done, info

    @property
    def done(self):
        self._check_open()
        return self._episode.done

    def close(self):
        self._closed = True
        self._episode = None


VOCAB_VERSION = 1

PAD, BOS, EOS = "<pad>", "<bos>", "<eos>"
SPECIALS = (PAD, BOS, EOS)

STRUCTURE = (
    "DEF",
    "run",
    "m(",
    "m)",
    "WHILE",
    "REPEAT",
    "IF",
    "IFELSE",
    "ELSE",
    "not",
    "c(",
    "c)",
    "w(",
    "w)",
    "r(",
    "r)",
    "i(",
    "i)",
    "e(",
    "e)",
)

REPEAT_COUNTS = tuple(
    f"R={n}" for n in range(dsl.MIN_REPEAT, dsl.MAX_REPEAT + 1)
)

VOCAB = SPECIALS + STRUCTURE + dsl.ACTIONS + dsl.PERCEPTIONS + REPEAT_COUNTS

TOKEN_TO_ID = {tok: i for i, tok in enumerate(VOCAB)}
PAD_ID, BOS_ID, EOS_ID = (TOKEN_TO_ID[t] for t in SPECIALS)


def encode_tokens(text, add_specials=False):
    """Canonical token text (or a parsed Program) to integer ids.

    Aliased spellings are normalized through the core tokenizer first, so
    encoding is over canonical lexemes only.
    """
    if isinstance(text, dsl.Program):
        lexemes = dsl.program_tokens(text)
    else:
        lexemes = [tok.lexeme for tok in dsl.tokenize(text)]
    ids = [TOKEN_TO_ID[lex] for lex in lexemes]
    if add_specials:
        ids = [BOS_ID] + ids + [EOS_ID]
    return ids


def decode_tokens(ids):
    """Integer ids back to canonical token text; specials are stripped."""
    lexemes = []
    for i in ids:
        if not 0 <= int(i) < len(VOCAB):
            raise dsl.UnknownToken(f"<id {int(i)}>", len(lexemes))
        tok = VOCAB[int(i)]
        if tok in SPECIALS:
            continue
        lexemes.append(tok)
    return " ".join(lexemes)


def vocabulary_manifest():
    """Published vocabulary contract: version, size, and content hash."""
    blob = json.dumps(list(VOCAB)).encode()
    return {
        "version": VOCAB_VERSION,
        "size": len(VOCAB),
        "sha256": hashlib.sha256(blob).hexdigest(),
    }


def write_vocabulary(path):
    with open(path, "w") as fh:
        json.dump({"manifest": vocabulary_manifest(), "tokens": list(VOCAB)}, fh)


def read_vocabulary(path):
    with open(path) as fh:
        data = json.load(fh)
    if data["manifest"] != vocabulary_manifest():
        raise ValueError("vocabulary version mismatch")
    return tuple(data["tokens"])
