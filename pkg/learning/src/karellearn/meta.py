"""Latent-action meta-policy trained with PPO (optionally SAC).

The meta-policy observes the task state tensor and emits a continuous
action: a program latent z.  A frozen decoder turns z into a sub-program,
which runs for one macro step through the core engine.  Episodes last at
most |H| = 5 macro steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn
from torch.distributions import Normal

from . import bindings

ACTION_CLIP = 3.0


@dataclass
class PpoConfig:
    learning_rate: float = 5e-5
    entropy_coef: float = 0.1
    rollout_size: int = 12800
    gae_lambda: float = 0.95
    clip_range: float = 0.2
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    n_minibatches: int = 10
    n_epochs: int = 3
    gamma: float = 0.99
    n_actors: int = 16


@dataclass
class SacConfig:
    learning_rate: float = 3e-4
    init_temperature: float = 2e-4
    replay_size: int = 5_000_000
    seed_steps: int = 20_000
    batch_size: int = 256
    tau: float = 0.005
    gamma: float = 0.99


@dataclass
class MetaPolicyConfig:
    latent_dim: int = 64
    hidden_size: int = 256
    horizon: int = 5
    ppo: PpoConfig = field(default_factory=PpoConfig)
    sac: SacConfig = field(default_factory=SacConfig)

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be positive")


class MetaPolicy(nn.Module):
    """Conv feature extractor (32 filters of size 4, then 32 of size 2),
    recurrent core, diagonal-Gaussian action head over z, value head."""

    def __init__(self, cfg: MetaPolicyConfig, obs_shape):
        super().__init__()
        self.cfg = cfg
        rows, cols, channels = obs_shape
        self.conv = nn.Sequential(
            nn.Conv2d(channels, 32, kernel_size=4, padding=1),
            nn.ReLU(),
            nn.Conv2d(32, 32, kernel_size=2),
            nn.ReLU(),
            nn.Flatten(),
        )
        with torch.no_grad():
            feat_dim = self.conv(torch.zeros(1, channels, rows, cols)).shape[-1]
        self.fc = nn.Linear(feat_dim, cfg.hidden_size)
        self.core = nn.GRUCell(cfg.hidden_size, cfg.hidden_size)
        self.mu_head = nn.Linear(cfg.hidden_size, cfg.latent_dim)
        self.log_std = nn.Parameter(torch.zeros(cfg.latent_dim))
        self.value_head = nn.Linear(cfg.hidden_size, 1)

    def features(self, obs, h):
        x = obs.permute(0, 3, 1, 2)
        x = torch.relu(self.fc(self.conv(x)))
        return self.core(x, h)

    def initial_hidden(self, batch):
        return torch.zeros(batch, self.cfg.hidden_size)

    def distribution(self, h):
        return Normal(self.mu_head(h), torch.exp(self.log_std))

    def value(self, h):
        return self.value_head(h).squeeze(-1)


def _decoded_text(decoder, z):
    program = decoder(np.clip(np.asarray(z, dtype=np.float64), -ACTION_CLIP, ACTION_CLIP))
    if isinstance(program, str):
        return program
    from karelbench import dsl

    return dsl.pretty(program)


@dataclass
class RolloutBuffer:
    obs: list = field(default_factory=list)
    hidden: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    log_probs: list = field(default_factory=list)
    values: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    dones: list = field(default_factory=list)

    def __len__(self):
        return len(self.rewards)


def collect_rollout(policy, handles, decoder, cfg, n_steps, rng, episodic=False):
    """Gather ``n_steps`` macro transitions across the actor handles.

    In episodic mode the per-step rewards inside an episode are deferred
    to its final transition.
    """
    buf = RolloutBuffer()
    states = {}
    for k, handle in enumerate(handles):
        obs = handle.reset(int(rng.integers(2**31))).array
        states[k] = [obs, policy.initial_hidden(1), 0, []]  # obs, h, step, pending
    k = 0
    while len(buf) < n_steps:
        handle = handles[k % len(handles)]
        obs, h, step, pending = states[k % len(handles)]
        obs_t = torch.tensor(np.asarray(obs), dtype=torch.float32).unsqueeze(0)
        with torch.no_grad():
            h_next = policy.features(obs_t, h)
            dist = policy.distribution(h_next)
            action = dist.sample()
            log_prob = dist.log_prob(action).sum(-1)
            value = policy.value(h_next)
        next_obs, reward, done, _ = handle.step_program(
            _decoded_text(decoder, action[0].numpy())
        )
        step += 1
        ended = done or step >= cfg.horizon
        buf.obs.append(obs_t[0])
        buf.hidden.append(h[0])
        buf.actions.append(action[0])
        buf.log_probs.append(float(log_prob))
        buf.values.append(float(value))
        buf.dones.append(ended)
        if episodic:
            pending.append(reward)
            buf.rewards.append(sum(pending) if ended else 0.0)
            if ended:
                pending.clear()
        else:
            buf.rewards.append(reward)
        if ended:
            obs = handle.reset(int(rng.integers(2**31))).array
            states[k % len(handles)] = [obs, policy.initial_hidden(1), 0, []]
        else:
            states[k % len(handles)] = [next_obs.array, h_next, step, pending]
        k += 1
    return buf


def compute_gae(buf, gamma, lam):
    advantages = np.zeros(len(buf))
    gae = 0.0
    for t in reversed(range(len(buf))):
        next_value = 0.0 if (t == len(buf) - 1 or buf.dones[t]) else buf.values[t + 1]
        nonterminal = 0.0 if buf.dones[t] else 1.0
        delta = buf.rewards[t] + gamma * next_value * nonterminal - buf.values[t]
        gae = delta + gamma * lam * nonterminal * gae
        advantages[t] = gae
    returns = advantages + np.asarray(buf.values)
    return advantages, returns


def ppo_update(policy, optimizer, buf, cfg: PpoConfig, rng):
    """One PPO update over a collected rollout; returns loss diagnostics."""
    obs = torch.stack(buf.obs)
    hidden = torch.stack(buf.hidden)
    actions = torch.stack(buf.actions)
    old_log_probs = torch.tensor(buf.log_probs, dtype=torch.float32)
    advantages, returns = compute_gae(buf, cfg.gamma, cfg.gae_lambda)
    advantages = torch.tensor(advantages, dtype=torch.float32)
    returns = torch.tensor(returns, dtype=torch.float32)
    advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)
    n = len(buf)
    batch = max(1, n // cfg.n_minibatches)
    stats = {"policy_loss": [], "value_loss": [], "entropy": []}
    for _ in range(cfg.n_epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch):
            idx = torch.from_numpy(perm[start : start + batch].copy())
            h = policy.features(obs[idx], hidden[idx])
            dist = policy.distribution(h)
            log_probs = dist.log_prob(actions[idx]).sum(-1)
            entropy = dist.entropy().sum(-1).mean()
            ratio = torch.exp(log_probs - old_log_probs[idx])
            adv = advantages[idx]
            unclipped = ratio * adv
            clipped = torch.clamp(ratio, 1 - cfg.clip_range, 1 + cfg.clip_range) * adv
            policy_loss = -torch.min(unclipped, clipped).mean()
            value_loss = ((policy.value(h) - returns[idx]) ** 2).mean()
            loss = (
                policy_loss
                + cfg.value_coef * value_loss
                - cfg.entropy_coef * entropy
            )
            optimizer.zero_grad()
            loss.backward()
            nn.utils.clip_grad_norm_(policy.parameters(), cfg.max_grad_norm)
            optimizer.step()
            stats["policy_loss"].append(policy_loss.detach().item())
            stats["value_loss"].append(value_loss.detach().item())
            stats["entropy"].append(entropy.detach().item())
    return {k: float(np.mean(v)) for k, v in stats.items()}


def evaluate_policy(policy, task_id, decoder, cfg, n_configs=10, seed=0):
    """Mean return of the deterministic (mean-action) policy."""
    returns = []
    for i in range(n_configs):
        handle = bindings.EnvHandle(task_id, seed=[seed, i])
        obs = handle.reset([seed, i]).array
        h = policy.initial_hidden(1)
        total = 0.0
        for _ in range(cfg.horizon):
            obs_t = torch.tensor(np.asarray(obs), dtype=torch.float32).unsqueeze(0)
            with torch.no_grad():
                h = policy.features(obs_t, h)
                action = policy.mu_head(h)[0].numpy()
            nxt, reward, done, _ = handle.step_program(_decoded_text(decoder, action))
            total += reward
            obs = nxt.array
            if done:
                break
        handle.close()
        returns.append(total)
    return float(np.mean(returns)), returns


def train_meta_ppo(
    task_id,
    decoder,
    cfg=None,
    seed=0,
    total_steps=12800,
    rollout_size=None,
    n_actors=None,
    episodic=False,
    eval_every=1,
    eval_configs=10,
    log=None,
):
    """PPO over the macro-MDP with a frozen decoder.

    ``total_steps`` counts macro transitions.  Returns the policy and an
    evaluation curve of (steps, mean_return).  Aborts on NaN returns.
    """
    cfg = cfg or MetaPolicyConfig()
    rollout_size = rollout_size or cfg.ppo.rollout_size
    n_actors = n_actors or cfg.ppo.n_actors
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    handles = [bindings.EnvHandle(task_id, seed=[seed, k]) for k in range(n_actors)]
    obs_shape = handles[0].reset([seed, 0]).array.shape
    policy = MetaPolicy(cfg, obs_shape)
    optimizer = torch.optim.Adam(policy.parameters(), lr=cfg.ppo.learning_rate)
    curve = []
    steps = 0
    update = 0
    while steps < total_steps:
        buf = collect_rollout(
            policy, handles, decoder, cfg, rollout_size, rng, episodic=episodic
        )
        steps += len(buf)
        ppo_update(policy, optimizer, buf, cfg.ppo, rng)
        update += 1
        if eval_every and update % eval_every == 0:
            mean, _ = evaluate_policy(
                policy, task_id, decoder, cfg, n_configs=eval_configs, seed=10_000 + seed
            )
            if np.isnan(mean):
                raise RuntimeError("meta-policy diverged: NaN return")
            curve.append((steps, mean))
            if log:
                log(f"steps {steps}: mean return {mean:.3f}")
    for handle in handles:
        handle.close()
    return policy, curve


class _QNet(nn.Module):
    def __init__(self, feat_dim, action_dim, hidden):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(feat_dim + action_dim, hidden),
            nn.ReLU(),
            nn.Linear(hidden, 1),
        )

    def forward(self, feats, actions):
        return self.net(torch.cat([feats, actions], dim=-1)).squeeze(-1)


def train_meta_sac(
    task_id,
    decoder,
    cfg=None,
    seed=0,
    total_steps=1000,
    batch_size=None,
    seed_steps=None,
    log=None,
):
    """SAC over the macro-MDP with a frozen decoder.

    Flat (non-recurrent) critic over conv features of the observation;
    per-macro-step transitions go to a replay buffer.  Returns the policy
    and an evaluation curve.
    """
    cfg = cfg or MetaPolicyConfig()
    sac = cfg.sac
    batch_size = batch_size or sac.batch_size
    seed_steps = seed_steps if seed_steps is not None else sac.seed_steps
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    handle = bindings.EnvHandle(task_id, seed=[seed, 0])
    obs_shape = handle.reset([seed, 0]).array.shape
    policy = MetaPolicy(cfg, obs_shape)
    q1 = _QNet(cfg.hidden_size, cfg.latent_dim, cfg.hidden_size)
    q2 = _QNet(cfg.hidden_size, cfg.latent_dim, cfg.hidden_size)
    opt_pi = torch.optim.Adam(policy.parameters(), lr=sac.learning_rate)
    opt_q = torch.optim.Adam(
        list(q1.parameters()) + list(q2.parameters()), lr=sac.learning_rate
    )
    alpha = sac.init_temperature
    replay = []
    obs = handle.reset(int(rng.integers(2**31))).array
    step_in_ep = 0
    curve = []
    for step in range(1, total_steps + 1):
        obs_t = torch.tensor(np.asarray(obs), dtype=torch.float32).unsqueeze(0)
        if step <= seed_steps:
            action = rng.standard_normal(cfg.latent_dim).astype(np.float32)
        else:
            with torch.no_grad():
                h = policy.features(obs_t, policy.initial_hidden(1))
                action = policy.distribution(h).sample()[0].numpy()
        next_obs, reward, done, _ = handle.step_program(_decoded_text(decoder, action))
        step_in_ep += 1
        ended = done or step_in_ep >= cfg.horizon
        replay.append((obs, action, reward, next_obs.array, ended))
        if len(replay) > sac.replay_size:
            replay.pop(0)
        if ended:
            obs = handle.reset(int(rng.integers(2**31))).array
            step_in_ep = 0
        else:
            obs = next_obs.array
        if step > seed_steps and len(replay) >= batch_size:
            idx = rng.integers(len(replay), size=batch_size)
            o, a, r, o2, d = zip(*(replay[i] for i in idx))
            o = torch.from_numpy(np.stack(o))
            a = torch.from_numpy(np.stack(a).astype(np.float32))
            r = torch.tensor(r, dtype=torch.float32)
            o2 = torch.from_numpy(np.stack(o2))
            d = torch.tensor(d, dtype=torch.float32)
            h0 = policy.initial_hidden(batch_size)
            with torch.no_grad():
                f2 = policy.features(o2, h0)
                dist2 = policy.distribution(f2)
                a2 = dist2.sample()
                logp2 = dist2.log_prob(a2).sum(-1)
                target_q = torch.min(q1(f2, a2), q2(f2, a2)) - alpha * logp2
                target = r + sac.gamma * (1 - d) * target_q
            f = policy.features(o, h0).detach()
            q_loss = ((q1(f, a) - target) ** 2).mean() + (
                (q2(f, a) - target) ** 2
            ).mean()
            opt_q.zero_grad()
            q_loss.backward()
            opt_q.step()
            f_pi = policy.features(o, h0)
            dist = policy.distribution(f_pi)
            a_pi = dist.rsample()
            logp = dist.log_prob(a_pi).sum(-1)
            pi_loss = (alpha * logp - torch.min(q1(f_pi, a_pi), q2(f_pi, a_pi))).mean()
            opt_pi.zero_grad()
            pi_loss.backward()
            opt_pi.step()
    mean, _ = evaluate_policy(policy, task_id, decoder, cfg, n_configs=5, seed=seed)
    if np.isnan(mean):
        raise RuntimeError("meta-policy diverged: NaN return")
    curve.append((total_steps, mean))
    if log:
        log(f"sac steps {total_steps}: mean return {mean:.3f}")
    handle.close()
    return policy, curve


def best_sampled_baseline(task_id, decoder, latent_dim=64, n=1000, seed=0, cfg=None):
    """Best mean return over ``n`` random latent draws, each repeated for
    the full macro horizon."""
    cfg = cfg or MetaPolicyConfig(latent_dim=latent_dim)
    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(n):
        z = rng.standard_normal(latent_dim)
        text = _decoded_text(decoder, z)
        returns = []
        for i in range(10):
            handle = bindings.EnvHandle(task_id, seed=[seed, i])
            total = 0.0
            for _ in range(cfg.horizon):
                _, reward, done, _ = handle.step_program(text)
                total += reward
                if done:
                    break
            handle.close()
            returns.append(total)
        best = max(best, float(np.mean(returns)))
    return best
