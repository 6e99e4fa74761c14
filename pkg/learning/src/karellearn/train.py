"""Training loop for the program VAE and executor.

Consumes datasets produced by the core generator (JSON-Lines records with
demonstration initial states and action traces), optimizes
L_total = L_P + lam * L_L jointly over the autoencoder and the executor,
and tracks curves plus reproducibility metadata in a TrainState.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import torch

from karelbench import datagen, dsl, world as W

from . import bindings, losses, models


@dataclass
class TrainState:
    seed: int
    dataset_sha256: str
    config: dict
    epoch: int = 0
    step: int = 0
    curves: dict = field(default_factory=lambda: {"L_P": [], "L_L": [], "total": []})
    eval_snapshots: list = field(default_factory=list)


def _decode_demo_state(encoded):
    return datagen._decode_state(encoded)


@dataclass
class Batch:
    dec_input: torch.Tensor  # (B, T) token ids, starts with <bos>
    target: torch.Tensor  # (B, T) next-token ids, pad-masked
    lengths: torch.Tensor  # (B,) real token counts incl. specials
    states: torch.Tensor  # (B, S, state_dim) executor inputs
    actions: torch.Tensor  # (B, S) action indices
    action_mask: torch.Tensor  # (B, S) real executor steps


def _demo_tensors(record, demo_index=0):
    """States s_0..s_{T-1} and action indices a_0..a_{T-1} of one demo."""
    demo = record["demos"][demo_index]
    state = _decode_demo_state(demo["init"])
    feats, acts = [], []
    for name in demo["actions"]:
        feats.append(W.encode_tensor(state).reshape(-1))
        acts.append(dsl.ACTIONS.index(name))
        W.apply_action(state, name)
    return feats, acts


def make_batch(records, device="cpu", demo_index=0):
    """Pad a list of dataset records into one training batch."""
    token_rows = [
        bindings.encode_tokens(r["program"], add_specials=True) for r in records
    ]
    max_t = max(len(row) for row in token_rows)
    dec_input = torch.full((len(records), max_t - 1), bindings.PAD_ID, dtype=torch.long)
    target = torch.full_like(dec_input, bindings.PAD_ID)
    lengths = torch.zeros(len(records), dtype=torch.long)
    demos = [_demo_tensors(r, demo_index) for r in records]
    max_s = max(1, max(len(acts) for _, acts in demos))
    state_dim = len(demos[0][0][0]) if demos[0][0] else None
    if state_dim is None:
        state_dim = next(
            (len(f[0]) for f, _ in demos if f), 8 * 8 * 16
        )
    states = torch.zeros(len(records), max_s, state_dim)
    actions = torch.zeros(len(records), max_s, dtype=torch.long)
    action_mask = torch.zeros(len(records), max_s, dtype=torch.bool)
    for b, (row, (feats, acts)) in enumerate(zip(token_rows, demos)):
        n = len(row)
        dec_input[b, : n - 1] = torch.tensor(row[:-1])
        target[b, : n - 1] = torch.tensor(row[1:])
        lengths[b] = n - 1
        for s, (f, a) in enumerate(zip(feats, acts)):
            states[b, s] = torch.from_numpy(np.asarray(f))
            actions[b, s] = a
            action_mask[b, s] = True
    return Batch(
        dec_input=dec_input.to(device),
        target=target.to(device),
        lengths=lengths,
        states=states.to(device),
        actions=actions.to(device),
        action_mask=action_mask.to(device),
    )


def batch_losses(vae, executor, batch, eps=None):
    """(L_P, recon, kl, L_L) for one batch; eps fixes the reparam noise."""
    mu, logvar = vae.encode(batch.dec_input, batch.lengths)
    z = vae.reparameterize(mu, logvar, eps)
    logits = vae.decode_teacher_forced(z, batch.dec_input)
    l_p, recon, kl = losses.program_loss(
        logits, batch.target, mu, logvar, vae.cfg.beta
    )
    action_logits = executor(z, batch.states)
    l_l = losses.latent_behavior_loss(
        action_logits, batch.actions, batch.action_mask
    )
    return l_p, recon, kl, l_l


def exact_reconstruction_rate(vae, records, device="cpu", limit=None):
    """Fraction of records decoded token-for-token from the posterior mean."""
    records = records[:limit] if limit else records
    hits = 0
    for rec in records:
        batch = make_batch([rec], device=device)
        with torch.no_grad():
            mu, _ = vae.encode(batch.dec_input, batch.lengths)
            decoded = vae.decode_program(mu[0])
        hits += dsl.pretty(decoded) == rec["program"]
    return hits / max(1, len(records))


def train_vae(
    dataset_path,
    cfg=None,
    seed=0,
    epochs=20,
    device="cpu",
    eval_every=0,
    eval_limit=200,
    log=None,
):
    """Jointly fit the VAE and executor on a generated dataset.

    Returns (vae, executor, TrainState).  Heldout records (split field)
    are used only for evaluation snapshots.
    """
    cfg = cfg or models.VaeConfig()
    torch.manual_seed(seed)
    records = datagen.read_dataset(dataset_path)
    train = [r for r in records if r.get("split", "train") == "train"]
    heldout = [r for r in records if r.get("split") == "heldout"]
    with open(dataset_path, "rb") as fh:
        sha = hashlib.sha256(fh.read()).hexdigest()
    vae = models.ProgramVae(cfg).to(device)
    probe = make_batch(train[:1], device=device)
    executor = models.Executor(
        models.ExecutorConfig(
            hidden_size=cfg.hidden_size,
            latent_dim=cfg.latent_dim,
            state_dim=probe.states.shape[-1],
        )
    ).to(device)
    params = list(vae.parameters()) + list(executor.parameters())
    opt = torch.optim.Adam(params, lr=cfg.learning_rate)
    state = TrainState(seed=seed, dataset_sha256=sha, config=vars(cfg).copy())
    order_rng = np.random.default_rng(seed)
    for epoch in range(1, epochs + 1):
        perm = order_rng.permutation(len(train))
        for start in range(0, len(train), cfg.batch_size):
            chunk = [train[i] for i in perm[start : start + cfg.batch_size]]
            batch = make_batch(chunk, device=device)
            l_p, recon, kl, l_l = batch_losses(vae, executor, batch)
            total = losses.total_loss(l_p, l_l, cfg.lam)
            opt.zero_grad()
            total.backward()
            opt.step()
            state.step += 1
            state.curves["L_P"].append(l_p.detach().item())
            state.curves["L_L"].append(l_l.detach().item())
            state.curves["total"].append(total.detach().item())
        state.epoch = epoch
        if eval_every and epoch % eval_every == 0:
            rate = exact_reconstruction_rate(
                vae, heldout or train, device=device, limit=eval_limit
            )
            state.eval_snapshots.append({"epoch": epoch, "exact_reconstruction": rate})
            if log:
                log(f"epoch {epoch}: heldout exact reconstruction {rate:.3f}")
    return vae, executor, state


def save_checkpoint(path, vae, executor, state):
    torch.save(
        {
            "vae": vae.state_dict(),
            "executor": executor.state_dict(),
            "state": {
                "seed": state.seed,
                "dataset_sha256": state.dataset_sha256,
                "config": state.config,
                "epoch": state.epoch,
                "step": state.step,
            },
            "vocabulary": bindings.vocabulary_manifest(),
        },
        path,
    )


def load_checkpoint(path, device="cpu"):
    blob = torch.load(path, map_location=device, weights_only=False)
    if blob["vocabulary"] != bindings.vocabulary_manifest():
        raise ValueError("checkpoint vocabulary mismatch")
    cfg = models.VaeConfig(**{
        k: v for k, v in blob["state"]["config"].items()
    })
    vae = models.ProgramVae(cfg).to(device)
    vae.load_state_dict(blob["vae"])
    return vae, blob
