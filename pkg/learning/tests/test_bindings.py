import numpy as np
import pytest

from karelbench import datagen, dsl, golden, interpreter, tasks, world as W

from karellearn import bindings


def test_reset_matches_core_encoding():
    handle = bindings.EnvHandle("Maze", seed=3)
    tensor = handle.reset(3)
    episode = tasks.sample_init("Maze", np.random.default_rng(3))
    assert np.array_equal(tensor.array, W.encode_tensor(episode.world))


def test_reset_twice_identical():
    handle = bindings.EnvHandle("TopOff", seed=0)
    a = handle.reset(5)
    b = handle.reset(5)
    assert a.to_bytes() == b.to_bytes()


def test_cleanhouse_tensor_dims():
    tensor = bindings.EnvHandle("CleanHouse", seed=0).reset(0)
    assert tensor.array.shape == (14, 22, 16)


def test_tensor_buffer_round_trip():
    arr = np.random.default_rng(0).random((4, 5, 16)).astype(np.float32)
    buf = bindings.TensorBuffer.from_array(arr)
    again = bindings.TensorBuffer(buf.to_bytes())
    assert np.array_equal(again.array, arr)
    assert (again.rows, again.cols, again.channels) == (4, 5, 16)


def test_empty_program_step():
    handle = bindings.EnvHandle("TopOff", seed=0)
    before = handle.reset(0)
    after, reward, done, info = handle.step_program("DEF run m( m)")
    assert reward == 0.0 and not done
    assert np.array_equal(before.array, after.array)
    assert info["n_actions"] == 0


def test_fourcorner_single_corner_reward():
    handle = bindings.EnvHandle("FourCorner", seed=0)
    handle.reset(0)
    program = (
        "DEF run m( WHILE c( frontIsClear c) w( move w) putMarker m)"
    )
    _, reward, done, _ = handle.step_program(program)
    assert reward == pytest.approx(0.25)
    assert not done


def test_parse_error_carries_position():
    handle = bindings.EnvHandle("Maze", seed=0)
    with pytest.raises(dsl.UnknownToken) as info:
        handle.step_program("DEF run m( fly m)")
    assert info.value.position == 3


def test_closed_handle_fails_cleanly():
    handle = bindings.EnvHandle("Maze", seed=0)
    handle.close()
    with pytest.raises(bindings.ClosedHandle):
        handle.reset(0)
    with pytest.raises(bindings.ClosedHandle):
        handle.step_program("DEF run m( move m)")


def test_unknown_task_rejected():
    with pytest.raises(KeyError):
        bindings.EnvHandle("NotATask")


def test_boundary_equivalence_with_core():
    # random (seed, program) pairs: rewards and states across the boundary
    # must equal core-side exec_in_task exactly
    rng = np.random.default_rng(42)
    for trial in range(300):
        task = tasks.TASK_IDS[trial % len(tasks.TASK_IDS)]
        seed = int(rng.integers(1000))
        program = datagen.sample_program(rng)
        handle = bindings.EnvHandle(task, seed=seed)
        handle.reset(seed)
        tensor, reward, done, info = handle.step_program(dsl.pretty(program))
        episode = tasks.sample_init(task, np.random.default_rng(seed))
        trace, rewards, core_done = interpreter.exec_in_task(program, episode)
        assert reward == sum(rewards)
        assert done == core_done
        assert info["n_actions"] == trace.n_actions
        assert np.array_equal(tensor.array, W.encode_tensor(episode.world))
        handle.close()


def test_vocab_round_trip_on_corpus():
    for task, variant, i, text in golden.iter_listings():
        ids = bindings.encode_tokens(text)
        assert bindings.decode_tokens(ids) == text
        assert len(ids) == dsl.token_length(dsl.parse_text(text))


def test_vocab_bijection():
    assert len(set(bindings.VOCAB)) == len(bindings.VOCAB)
    for tok, i in bindings.TOKEN_TO_ID.items():
        assert bindings.VOCAB[i] == tok


def test_encode_specials_and_program_objects():
    program = dsl.parse_text("DEF run m( move m)")
    ids = bindings.encode_tokens(program, add_specials=True)
    assert ids[0] == bindings.BOS_ID and ids[-1] == bindings.EOS_ID
    assert bindings.decode_tokens(ids) == "DEF run m( move m)"


def test_decode_unknown_id_rejected():
    with pytest.raises(dsl.UnknownToken):
        bindings.decode_tokens([999])


def test_vocabulary_manifest_fixed():
    manifest = bindings.vocabulary_manifest()
    assert manifest["size"] == len(bindings.VOCAB) == 52
    assert manifest["version"] == bindings.VOCAB_VERSION


def test_vocabulary_file_round_trip(tmp_path):
    path = tmp_path / "vocab.json"
    bindings.write_vocabulary(path)
    assert bindings.read_vocabulary(path) == bindings.VOCAB
