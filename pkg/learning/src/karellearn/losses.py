"""Loss terms for the program VAE and the neural executor.

The total objective is L_total = L_P + lam * L_L where L_P is the
beta-weighted variational program loss (token reconstruction plus KL) and
L_L is the latent behavior reconstruction loss: cross-entropy of executor
predictions against the interpreter's action trace.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

from . import bindings


def kl_divergence(mu, logvar):
    """KL(q || N(0, I)) per batch element, averaged; always >= 0."""
    per_dim = 0.5 * (torch.exp(logvar) + mu**2 - 1.0 - logvar)
    return per_dim.sum(dim=-1).mean()


def token_reconstruction_loss(logits, targets):
    """Mean cross-entropy over non-pad target tokens.

    logits (B, T, V) predict targets (B, T); pad ids are masked out.
    """
    flat = logits.reshape(-1, logits.shape[-1])
    tgt = targets.reshape(-1)
    return F.cross_entropy(flat, tgt, ignore_index=bindings.PAD_ID)


def program_loss(logits, targets, mu, logvar, beta):
    """L_P: reconstruction plus beta-weighted KL."""
    recon = token_reconstruction_loss(logits, targets)
    kl = kl_divergence(mu, logvar)
    return recon + beta * kl, recon, kl


def latent_behavior_loss(action_logits, action_targets, mask=None):
    """L_L: mean cross-entropy of executor predictions against the
    ground-truth action indices, masked to real (non-padding) steps.

    action_logits (B, T, 5), action_targets (B, T) long, mask (B, T) bool.
    """
    flat = action_logits.reshape(-1, action_logits.shape[-1])
    tgt = action_targets.reshape(-1)
    per_step = F.cross_entropy(flat, tgt, reduction="none")
    if mask is None:
        return per_step.mean()
    m = mask.reshape(-1).to(per_step.dtype)
    return (per_step * m).sum() / m.sum().clamp_min(1.0)


def total_loss(l_p, l_l, lam):
    """L_total = L_P + lam * L_L; kept as its own function so every logged
    step can assert the decomposition."""
    return l_p + lam * l_l
