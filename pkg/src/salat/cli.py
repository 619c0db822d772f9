"""Command-line pipeline: train, generate, bench, serve."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .attention import SALAT, SALIT, load_bundle, save_bundle
from .bench import BenchConfig, METHOD_NAMES, TASK_KINDS, emit_svg, run_benchmark
from .bench.scenario import Scenario
from .geometry import load_dataset, query_from_dict
from .tpgmm import TPGMM

EXIT_SCHEMA = 2
EXIT_DIVERGED = 3


def _fail(code: int, message: str):
    print(f"error: {message}", file=sys.stderr)
    raise SystemExit(code)


def _build_model(args):
    if args.method == "salat":
        return SALAT(
            flow_blocks=args.flow_blocks,
            flow_hidden=args.flow_hidden,
            flow_epochs=args.flow_epochs,
            flow_lr=args.flow_lr,
            attn_hidden=args.attn_hidden,
            attn_epochs=args.attn_epochs,
            attn_lr=args.attn_lr,
            seed=args.seed,
        )
    if args.method == "salit":
        return SALIT(
            attn_hidden=args.attn_hidden,
            attn_epochs=args.attn_epochs,
            attn_lr=args.attn_lr,
            seed=args.seed,
        )
    variant = "alpha" if args.method == "alpha-tpgmm" else "plain"
    return TPGMM(n_components=args.gmm_components, variant=variant, seed=args.seed)


def cmd_train(args):
    try:
        dataset = load_dataset(args.data)
    except (OSError, ValueError, KeyError) as exc:
        _fail(EXIT_SCHEMA, f"cannot load dataset: {exc}")
    model = _build_model(args)
    try:
        model.fit(dataset)
    except FloatingPointError as exc:
        _fail(EXIT_DIVERGED, f"training diverged: {exc}")
    if isinstance(model, TPGMM):
        model.save(args.out)
        print(f"trained {args.method} (gamma={model.gamma_}) -> {args.out}")
    else:
        save_bundle(model, args.out)
        losses = []
        if hasattr(model, "flows_"):
            losses = [f"flow[{k}]={f.best_loss_:.4f}" for k, f in enumerate(model.flows_)]
        losses.append(f"attention={model.attn_best_loss_:.4f}")
        print(f"trained {args.method} -> {args.out}  " + "  ".join(losses))
    return 0


def _load_query(path):
    with open(path) as fh:
        data = json.load(fh)
    return query_from_dict(data)


def cmd_generate(args):
    try:
        with open(args.model) as fh:
            bundle = json.load(fh)
        if bundle.get("kind") == "tpgmm":
            model = TPGMM.from_dict(bundle)
        else:
            model = load_bundle(args.model)
        query = _load_query(args.query)
    except (OSError, ValueError, KeyError) as exc:
        _fail(EXIT_SCHEMA, f"cannot load model/query: {exc}")
    try:
        if isinstance(model, TPGMM):
            traj = model.predict(query)
            attention = model.last_alpha_track_
        else:
            traj, attention = model.predict(query, policy=args.policy, seed=args.seed)
    except ValueError as exc:
        _fail(EXIT_SCHEMA, str(exc))
    payload = {
        "trajectory": traj.points.tolist(),
        "attention": np.asarray(attention).tolist(),
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh)
    if args.svg:
        if args.scenario:
            with open(args.scenario) as fh:
                scenario = Scenario.from_dict(json.load(fh))
            emit_svg(scenario, [traj], attention=attention, path=args.svg)
        else:
            _fail(EXIT_SCHEMA, "--svg requires --scenario")
    print(f"generated trajectory -> {args.out}")
    return 0


def cmd_bench(args):
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHOD_NAMES:
            _fail(EXIT_SCHEMA, f"unknown method {m!r}")
    config = BenchConfig(
        flow_blocks=args.flow_blocks,
        flow_hidden=args.flow_hidden,
        flow_epochs=args.flow_epochs,
        flow_lr=args.flow_lr,
        attn_hidden=args.attn_hidden,
        attn_epochs=args.attn_epochs,
        attn_lr=args.attn_lr,
        gmm_components=args.gmm_components,
    )
    try:
        report, _ = run_benchmark(
            args.task, methods, trials=args.trials, seed=args.seed, config=config
        )
    except FloatingPointError as exc:
        _fail(EXIT_DIVERGED, f"training diverged: {exc}")
    report.save(args.report)
    print(report.text_table())
    return 0


def cmd_serve(args):
    import uvicorn

    from .server import create_app

    app = create_app(store_dir=args.store, static_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _add_train_hyper_flags(p):
    p.add_argument("--flow-blocks", type=int, default=3)
    p.add_argument("--flow-hidden", type=int, default=16)
    p.add_argument("--flow-epochs", type=int, default=400)
    p.add_argument("--flow-lr", type=float, default=5e-3)
    p.add_argument("--attn-hidden", type=int, default=24)
    p.add_argument("--attn-epochs", type=int, default=5000)
    p.add_argument("--attn-lr", type=float, default=5e-3)
    p.add_argument("--gmm-components", type=int, default=6)


def build_parser():
    parser = argparse.ArgumentParser(prog="salat")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on a dataset file")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=METHOD_NAMES, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_train_hyper_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="generate a trajectory for a query")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--policy", choices=("mean", "sample"), default="mean")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svg", default=None)
    p.add_argument("--scenario", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="run a benchmark task")
    p.add_argument("--task", choices=TASK_KINDS, required=True)
    p.add_argument("--methods", default=",".join(METHOD_NAMES))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True)
    _add_train_hyper_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8431)
    p.add_argument("--store", default=None)
    p.add_argument("--ui", default=None, help="directory with the built browser UI")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
