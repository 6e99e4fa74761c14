"""Program-embedding VAE and the neural program executor.

The encoder GRU reads token ids into a 256-dim summary v; fully-connected
compression layers (tanh) map v down to the latent z and back.  When the
latent dim equals the hidden size the compression pair is bypassed
entirely.  The executor is a recurrent conditional policy over (z, s_t)
predicting one of the 5 primitive actions per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from karelbench import dsl

from . import bindings, grammar

N_ACTIONS = len(dsl.ACTIONS)
LATENT_DIMS = (16, 32, 64, 128, 256)


@dataclass
class VaeConfig:
    hidden_size: int = 256
    latent_dim: int = 64
    batch_size: int = 256
    learning_rate: float = 1e-3
    beta: float = 0.1
    lam: float = 1.0  # latent-behavior loss weight
    max_tokens: int = 40

    def __post_init__(self):
        if self.latent_dim < 1 or self.hidden_size < 1:
            raise ValueError("sizes must be positive")
        if self.beta < 0 or self.lam < 0:
            raise ValueError("loss weights must be nonnegative")

    @property
    def compressed(self):
        return self.latent_dim != self.hidden_size


class ProgramVae(nn.Module):
    def __init__(self, cfg: VaeConfig):
        super().__init__()
        self.cfg = cfg
        vocab = len(bindings.VOCAB)
        h = cfg.hidden_size
        self.embedding = nn.Embedding(vocab, h, padding_idx=bindings.PAD_ID)
        self.encoder = nn.GRU(h, h, batch_first=True)
        if cfg.compressed:
            self.compress = nn.Sequential(nn.Linear(h, h), nn.Tanh())
            self.expand = nn.Sequential(nn.Linear(cfg.latent_dim, h), nn.Tanh())
        else:
            self.compress = nn.Identity()
            self.expand = nn.Identity()
        self.mu_head = nn.Linear(h, cfg.latent_dim)
        self.logvar_head = nn.Linear(h, cfg.latent_dim)
        self.decoder = nn.GRU(h, h, batch_first=True)
        self.token_head = nn.Linear(h, vocab)

    def encode(self, ids, lengths):
        """Token ids (B, T) -> (mu, logvar) of the latent posterior."""
        emb = self.embedding(ids)
        packed = nn.utils.rnn.pack_padded_sequence(
            emb, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        _, h_n = self.encoder(packed)
        v = h_n[-1]
        u = self.compress(v)
        return self.mu_head(u), self.logvar_head(u)

    def reparameterize(self, mu, logvar, eps=None):
        if eps is None:
            eps = torch.randn_like(mu)
        return mu + torch.exp(0.5 * logvar) * eps

    def decode_teacher_forced(self, z, ids):
        """Logits for each next token given the ground-truth prefix."""
        h0 = self.expand(z).unsqueeze(0).contiguous()
        emb = self.embedding(ids)
        out, _ = self.decoder(emb, h0)
        return self.token_head(out)

    @torch.no_grad()
    def decode_program(self, z):
        """Greedy grammar-masked decoding: always yields a parseable
        program of at most ``cfg.max_tokens`` tokens."""
        if z.dim() == 1:
            z = z.unsqueeze(0)
        device = z.device
        state = grammar.GrammarState()
        h = self.expand(z).unsqueeze(0).contiguous()
        prev = torch.full((1, 1), bindings.BOS_ID, dtype=torch.long, device=device)
        lexemes = []
        while not state.complete:
            out, h = self.decoder(self.embedding(prev), h)
            logits = self.token_head(out[0, -1])
            budget = self.cfg.max_tokens - state.n_tokens
            allowed = state.valid_next_within(budget)
            mask = torch.full_like(logits, float("-inf"))
            for tok in allowed:
                mask[bindings.TOKEN_TO_ID[tok]] = 0.0
            tok_id = int(torch.argmax(logits + mask))
            lexemes.append(bindings.VOCAB[tok_id])
            state.advance(lexemes[-1])
            prev = torch.tensor([[tok_id]], dtype=torch.long, device=device)
        return dsl.parse_text(" ".join(lexemes))


@dataclass
class ExecutorConfig:
    hidden_size: int = 256
    latent_dim: int = 64
    state_dim: int = 8 * 8 * 16

    def __post_init__(self):
        if min(self.hidden_size, self.latent_dim, self.state_dim) < 1:
            raise ValueError("sizes must be positive")


class Executor(nn.Module):
    """pi(a | z, s_t): recurrent policy over flattened state tensors,
    conditioned on the program latent at every step."""

    def __init__(self, cfg: ExecutorConfig):
        super().__init__()
        self.cfg = cfg
        self.state_fc = nn.Linear(cfg.state_dim, cfg.hidden_size)
        self.core = nn.GRU(
            cfg.hidden_size + cfg.latent_dim, cfg.hidden_size, batch_first=True
        )
        self.head = nn.Linear(cfg.hidden_size, N_ACTIONS)

    def forward(self, z, states):
        """z (B, L), states (B, T, state_dim) -> action logits (B, T, 5)."""
        feats = torch.tanh(self.state_fc(states))
        zs = z.unsqueeze(1).expand(-1, states.shape[1], -1)
        out, _ = self.core(torch.cat([feats, zs], dim=-1))
        return self.head(out)
