import math

import numpy as np
import pytest
import torch

from karelbench import datagen, dsl

from karellearn import bindings, losses, models, train


def tiny_cfg():
    return models.VaeConfig(hidden_size=8, latent_dim=4, batch_size=10)


def tiny_batch(tiny_dataset, n=10):
    records = datagen.read_dataset(tiny_dataset)[:n]
    return train.make_batch(records)


def test_config_validation():
    with pytest.raises(ValueError):
        models.VaeConfig(latent_dim=0)
    with pytest.raises(ValueError):
        models.VaeConfig(beta=-1)
    with pytest.raises(ValueError):
        models.ExecutorConfig(hidden_size=0)


def test_compression_bypassed_at_full_width():
    cfg = models.VaeConfig(hidden_size=16, latent_dim=16)
    assert not cfg.compressed
    vae = models.ProgramVae(cfg)
    assert isinstance(vae.compress, torch.nn.Identity)
    assert isinstance(vae.expand, torch.nn.Identity)
    assert models.ProgramVae(tiny_cfg()).cfg.compressed


def test_kl_nonnegative_random_batches():
    rng = torch.Generator().manual_seed(0)
    for _ in range(50):
        mu = torch.randn(16, 4, generator=rng) * 3
        logvar = torch.randn(16, 4, generator=rng) * 2
        assert float(losses.kl_divergence(mu, logvar)) >= 0.0
    assert float(losses.kl_divergence(torch.zeros(8, 4), torch.zeros(8, 4))) == 0.0


def test_behavior_loss_perfect_and_uniform():
    targets = torch.tensor([[0, 3, 1]])
    perfect = torch.nn.functional.one_hot(targets, 5).float() * 1e4
    assert float(losses.latent_behavior_loss(perfect, targets)) == pytest.approx(
        0.0, abs=1e-6
    )
    uniform = torch.zeros(1, 3, 5)
    assert float(losses.latent_behavior_loss(uniform, targets)) == pytest.approx(
        math.log(5)
    )


def test_behavior_loss_masking():
    targets = torch.tensor([[2, 0]])
    logits = torch.zeros(1, 2, 5)
    logits[0, 0, 2] = 1e4  # correct on the only real step
    mask = torch.tensor([[True, False]])
    assert float(losses.latent_behavior_loss(logits, targets, mask)) == pytest.approx(
        0.0, abs=1e-6
    )


def test_executor_targets_one_hot(tiny_dataset):
    batch = tiny_batch(tiny_dataset)
    # exactly one action index per real step, all within the action set
    assert batch.actions[batch.action_mask].max() < models.N_ACTIONS
    assert batch.actions[batch.action_mask].min() >= 0
    one_hot = torch.nn.functional.one_hot(batch.actions, models.N_ACTIONS)
    assert (one_hot.sum(-1) == 1).all()


def test_loss_decomposition_identity(tiny_dataset):
    torch.manual_seed(0)
    cfg = tiny_cfg()
    vae = models.ProgramVae(cfg)
    batch = tiny_batch(tiny_dataset)
    executor = models.Executor(
        models.ExecutorConfig(hidden_size=8, latent_dim=4, state_dim=batch.states.shape[-1])
    )
    with torch.no_grad():
        l_p, recon, kl, l_l = train.batch_losses(vae, executor, batch)
        total = losses.total_loss(l_p, l_l, cfg.lam)
    assert float(total) == pytest.approx(float(l_p) + cfg.lam * float(l_l), rel=1e-6)
    assert float(l_p) == pytest.approx(float(recon) + cfg.beta * float(kl), rel=1e-6)


def test_gradient_check_tiny_model(tiny_dataset):
    # analytic gradients of L_P vs central finite differences on a tiny
    # model (hidden 8, latent 4, 10 programs), double precision
    torch.manual_seed(1)
    cfg = tiny_cfg()
    vae = models.ProgramVae(cfg).double()
    batch = tiny_batch(tiny_dataset)
    eps = torch.randn(10, cfg.latent_dim, dtype=torch.float64)

    def loss_value():
        mu, logvar = vae.encode(batch.dec_input, batch.lengths)
        z = vae.reparameterize(mu, logvar, eps)
        logits = vae.decode_teacher_forced(z, batch.dec_input)
        l_p, _, _ = losses.program_loss(logits, batch.target, mu, logvar, cfg.beta)
        return l_p

    loss = loss_value()
    loss.backward()
    params = [p for p in vae.parameters() if p.grad is not None]
    rng = np.random.default_rng(0)
    h = 1e-5
    checked = 0
    for _ in range(30):
        p = params[int(rng.integers(len(params)))]
        idx = tuple(int(rng.integers(s)) for s in p.shape)
        analytic = float(p.grad[idx])
        if abs(analytic) < 1e-8:
            continue
        with torch.no_grad():
            orig = float(p[idx])
            p[idx] = orig + h
            up = float(loss_value())
            p[idx] = orig - h
            down = float(loss_value())
            p[idx] = orig
        fd = (up - down) / (2 * h)
        rel = abs(fd - analytic) / max(abs(fd), abs(analytic))
        assert rel <= 1e-4, (idx, analytic, fd, rel)
        checked += 1
    assert checked >= 10


def test_decode_always_parses_and_is_deterministic():
    torch.manual_seed(2)
    vae = models.ProgramVae(tiny_cfg())
    rng = torch.Generator().manual_seed(3)
    for _ in range(200):
        z = torch.randn(4, generator=rng) * 2
        program = vae.decode_program(z)
        text = dsl.pretty(program)
        assert dsl.parse_text(text) == program
        assert dsl.token_length(program) <= vae.cfg.max_tokens
        assert dsl.pretty(vae.decode_program(z)) == text


def test_executor_output_shape(tiny_dataset):
    batch = tiny_batch(tiny_dataset, n=4)
    executor = models.Executor(
        models.ExecutorConfig(hidden_size=8, latent_dim=4, state_dim=batch.states.shape[-1])
    )
    z = torch.zeros(4, 4)
    logits = executor(z, batch.states)
    assert logits.shape == (*batch.actions.shape, models.N_ACTIONS)


def test_make_batch_targets_shifted(tiny_dataset):
    records = datagen.read_dataset(tiny_dataset)[:3]
    batch = train.make_batch(records)
    row = bindings.encode_tokens(records[0]["program"], add_specials=True)
    n = len(row)
    assert batch.dec_input[0, : n - 1].tolist() == row[:-1]
    assert batch.target[0, : n - 1].tolist() == row[1:]
    assert int(batch.lengths[0]) == n - 1
