"""Benchmark runner: synthesize training data, fit methods, score trials."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from ..attention import SALAT, SALIT
from ..geometry import Dataset, Demonstration, resample
from ..tpgmm import TPGMM
from .demos import synth_demo
from .scenario import ScenarioSampler
from .scoring import FAILURE_KINDS, check_success

METHOD_NAMES = ("tpgmm", "alpha-tpgmm", "salit", "salat")

DEMO_COUNTS = {"docker": 20, "docker-obstacle": 30, "docker-obstacle-tunnel": 30}


@dataclass
class BenchConfig:
    horizon: int = 50
    trials: int = 100
    flow_blocks: int = 3
    flow_hidden: int = 16
    flow_epochs: int = 400
    flow_lr: float = 5e-3
    attn_hidden: int = 24
    attn_epochs: int = 5000
    attn_lr: float = 5e-3
    gmm_components: int = 6


@dataclass
class MethodResult:
    successes: int = 0
    failures: dict = field(default_factory=lambda: {k: 0 for k in FAILURE_KINDS})

    @property
    def trials(self) -> int:
        return self.successes + sum(self.failures.values())

    @property
    def rate(self) -> float:
        total = self.trials
        return self.successes / total if total else 0.0


@dataclass
class SuccessReport:
    task: str
    trials: int
    seed: int
    results: dict  # method name -> MethodResult

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "trials": self.trials,
            "seed": self.seed,
            "results": {
                name: {
                    "successes": res.successes,
                    "failures": dict(res.failures),
                    "rate": res.rate,
                }
                for name, res in self.results.items()
            },
        }

    def text_table(self) -> str:
        lines = [f"task: {self.task}  trials: {self.trials}  seed: {self.seed}"]
        width = max((len(n) for n in self.results), default=6)
        for name, res in self.results.items():
            fails = ", ".join(
                f"{k}={v}" for k, v in res.failures.items() if v
            )
            lines.append(
                f"  {name.ljust(width)}  rate={res.rate:.2f}"
                + (f"  ({fails})" if fails else "")
            )
        return "\n".join(lines)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def build_training_set(task: str, seed: int, config: BenchConfig, n_demos=None) -> Dataset:
    sampler = ScenarioSampler(task, regime="train", seed=seed)
    n = n_demos if n_demos is not None else DEMO_COUNTS[task]
    demos = []
    for i in range(n):
        # a small fraction of sampled layouts leaves no room for a clean
        # scripted stroke; redraw the scenario in that case
        for _ in range(20):
            scenario = sampler.sample()
            try:
                demo = synth_demo(
                    scenario, mode="auto", noise_seed=seed + 7919 * (i + 1)
                )
                break
            except RuntimeError:
                continue
        else:
            raise RuntimeError("could not synthesize a training demonstration")
        demos.append(
            Demonstration(
                query=demo.query,
                trajectory=resample(demo.trajectory, config.horizon),
            )
        )
    return Dataset(tuple(demos))


def make_method(name: str, config: BenchConfig, seed: int):
    if name == "salat":
        return SALAT(
            flow_blocks=config.flow_blocks,
            flow_hidden=config.flow_hidden,
            flow_epochs=config.flow_epochs,
            flow_lr=config.flow_lr,
            attn_hidden=config.attn_hidden,
            attn_epochs=config.attn_epochs,
            attn_lr=config.attn_lr,
            seed=seed,
        )
    if name == "salit":
        return SALIT(
            attn_hidden=config.attn_hidden,
            attn_epochs=config.attn_epochs,
            attn_lr=config.attn_lr,
            seed=seed,
        )
    if name == "tpgmm":
        return TPGMM(n_components=config.gmm_components, variant="plain", seed=seed)
    if name == "alpha-tpgmm":
        return TPGMM(n_components=config.gmm_components, variant="alpha", seed=seed)
    raise ValueError(f"unknown method {name!r}")


def _predict(model, query):
    out = model.predict(query)
    return out[0] if isinstance(out, tuple) else out


def run_benchmark(
    task: str,
    methods=METHOD_NAMES,
    trials: int = 100,
    seed: int = 0,
    config: BenchConfig | None = None,
    fitted=None,
):
    """Evaluate methods on fresh test scenarios; returns a SuccessReport.

    `fitted` may carry pre-trained models keyed by method name; anything
    missing is trained here on a synthesized training set.
    """
    config = config or BenchConfig()
    fitted = dict(fitted or {})
    missing = [m for m in methods if m not in fitted]
    if missing:
        train_set = build_training_set(task, seed, config)
        for name in missing:
            model = make_method(name, config, seed)
            model.fit(train_set)
            fitted[name] = model

    results = {name: MethodResult() for name in methods}
    if trials > 0:
        sampler = ScenarioSampler(task, regime="test", seed=seed + 99991)
        for _ in range(trials):
            scenario = sampler.sample()
            query = scenario.query()
            for name in methods:
                traj = _predict(fitted[name], query)
                ok, failure = check_success(traj, scenario)
                if ok:
                    results[name].successes += 1
                else:
                    results[name].failures[failure] += 1
    return SuccessReport(task=task, trials=trials, seed=seed, results=results), fitted
