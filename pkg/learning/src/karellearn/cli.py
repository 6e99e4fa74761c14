"""Command-line entry point for the learning stack.

Subcommands: vocab (print the vocabulary manifest), train-vae, meta-ppo,
meta-sac, experiments.  Heavy runs are opt-in via explicit budgets.
"""

from __future__ import annotations

import argparse
import json
import sys

import torch

from karelbench import rollout

from . import bindings, experiments, meta, models, train


def cmd_vocab(args):
    print(json.dumps(bindings.vocabulary_manifest(), indent=2))
    return 0


def cmd_train_vae(args):
    cfg = models.VaeConfig(latent_dim=args.latent_dim, lam=args.lam)
    vae, executor, state = train.train_vae(
        args.data,
        cfg,
        seed=args.seed,
        epochs=args.epochs,
        eval_every=args.eval_every,
        log=print,
    )
    if args.checkpoint:
        train.save_checkpoint(args.checkpoint, vae, executor, state)
    print(json.dumps({"epochs": state.epoch, "snapshots": state.eval_snapshots}))
    return 0


def _decoder(args):
    if args.checkpoint:
        vae, _ = train.load_checkpoint(args.checkpoint)
        return lambda z: vae.decode_program(torch.as_tensor(z, dtype=torch.float32))
    return rollout.identity_decoder


def cmd_meta_ppo(args):
    cfg = meta.MetaPolicyConfig(latent_dim=args.latent_dim)
    _, curve = meta.train_meta_ppo(
        args.task,
        _decoder(args),
        cfg,
        seed=args.seed,
        total_steps=args.steps,
        rollout_size=args.rollout,
        n_actors=args.actors,
        episodic=args.episodic,
        log=print,
    )
    print(json.dumps({"task": args.task, "curve": curve}))
    return 0


def cmd_meta_sac(args):
    cfg = meta.MetaPolicyConfig(latent_dim=args.latent_dim)
    _, curve = meta.train_meta_sac(
        args.task,
        _decoder(args),
        cfg,
        seed=args.seed,
        total_steps=args.steps,
        seed_steps=args.seed_steps,
        log=print,
    )
    print(json.dumps({"task": args.task, "curve": curve}))
    return 0


def cmd_experiments(args):
    kwargs = {}
    if args.suite == "dim-ablation":
        kwargs["epochs"] = args.epochs
    rows = experiments.run_experiments(
        args.suite, args.out_prefix, dataset_path=args.data, seed=args.seed, **kwargs
    )
    print(json.dumps(rows, default=str))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="karellearn")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("vocab", help="print the token vocabulary manifest")
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("train-vae", help="fit the program VAE + executor")
    p.add_argument("--data", required=True)
    p.add_argument("--latent-dim", type=int, default=64)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--eval-every", type=int, default=5)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_vae)

    for name, fn in (("meta-ppo", cmd_meta_ppo), ("meta-sac", cmd_meta_sac)):
        p = sub.add_parser(name, help=f"train the latent meta-policy ({name[5:]})")
        p.add_argument("--task", required=True)
        p.add_argument("--checkpoint", default=None)
        p.add_argument("--latent-dim", type=int, default=64)
        p.add_argument("--steps", type=int, default=12800)
        p.add_argument("--rollout", type=int, default=12800)
        p.add_argument("--actors", type=int, default=16)
        p.add_argument("--seed-steps", type=int, default=20000)
        p.add_argument("--episodic", action="store_true")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=fn)

    p = sub.add_parser("experiments", help="run a named experiment suite")
    p.add_argument("--suite", required=True, choices=("dim-ablation", "ood", "reward-modes"))
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--data", default=None)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_experiments)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
