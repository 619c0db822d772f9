"""HTTP service for the companion UI: scenarios, demos, jobs, generation.

State lives in a flat-file store (one JSON file per entity, keyed by
content hash). Training jobs run on a single worker thread in submission
order; reads never wait on jobs.
"""

from __future__ import annotations

import hashlib
import json
import os
import queue
import threading
import traceback
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .attention import SALAT, SALIT
from .bench import BenchConfig, run_benchmark
from .bench.scenario import Scenario, ScenarioSampler, TASK_KINDS
from .geometry import (
    Dataset,
    Demonstration,
    Trajectory,
    dataset_from_dict,
    query_from_dict,
    resample,
)
from .tpgmm import TPGMM

DEFAULT_HORIZON = 50


def _content_id(payload) -> str:
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


class FileStore:
    """One JSON file per entity under <root>/<kind>/<id>.json."""

    def __init__(self, root):
        self.root = Path(root)
        self._lock = threading.Lock()

    def _path(self, kind, entity_id) -> Path:
        return self.root / kind / f"{entity_id}.json"

    def put(self, kind, entity_id, data) -> None:
        with self._lock:
            path = self._path(kind, entity_id)
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w") as fh:
                json.dump(data, fh)
            os.replace(tmp, path)

    def get(self, kind, entity_id):
        path = self._path(kind, entity_id)
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"unknown {kind} id")
        with open(path) as fh:
            return json.load(fh)

    def exists(self, kind, entity_id) -> bool:
        return self._path(kind, entity_id).exists()


class ScenarioCreate(BaseModel):
    kind: str | None = None
    regime: str = "train"
    seed: int = 0
    scenario: dict | None = None
    horizon: int = DEFAULT_HORIZON


class DemoSubmit(BaseModel):
    trajectory: list


class JobSubmit(BaseModel):
    kind: str
    scenario_id: str | None = None
    method: str = "salat"
    seed: int = 0
    task: str | None = None
    trials: int = 20
    hyper: dict = {}


class GenerateRequest(BaseModel):
    query: dict
    policy: str = "mean"
    seed: int = 0


def _scaled_config(hyper: dict) -> BenchConfig:
    config = BenchConfig()
    for key, value in hyper.items():
        if not hasattr(config, key):
            raise HTTPException(status_code=400, detail=f"unknown hyperparameter {key!r}")
        setattr(config, key, value)
    return config


def _make_model(method: str, hyper: dict, seed: int):
    config = _scaled_config(hyper)
    from .bench.runner import make_method

    try:
        return make_method(method, config, seed)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def create_app(store_dir=None, static_dir=None) -> FastAPI:
    store_dir = store_dir or os.environ.get("SALAT_STORE") or ".salat-store"
    store = FileStore(store_dir)
    app = FastAPI(title="shift-attention trajectory service")
    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # Same-origin hosting for the browser UI; API routes take precedence
        # because they are registered before the mount is resolved.
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    jobs: "queue.Queue[str]" = queue.Queue()
    active = set()
    active_lock = threading.Lock()

    def _run_job(job_id: str) -> None:
        record = store.get("jobs", job_id)
        record["status"] = "running"
        record["progress"] = 0.0
        store.put("jobs", job_id, record)
        try:
            if record["kind"] in ("train-flow", "train-attention", "train-baseline"):
                scenario_rec = store.get("scenarios", record["scenario_id"])
                demos = scenario_rec.get("demos", [])
                if len(demos) < 2:
                    raise ValueError("scenario needs at least 2 demonstrations")
                scenario = Scenario.from_dict(scenario_rec["scenario"])
                dataset = Dataset(
                    tuple(
                        Demonstration(
                            query=scenario.query(),
                            trajectory=Trajectory(np.array(d)),
                        )
                        for d in demos
                    )
                )
                model = _make_model(
                    record["method"], record.get("hyper", {}), record["seed"]
                )
                model.fit(dataset)
                bundle = model.to_dict()
                summary = {
                    "kind": bundle["kind"],
                    "num_frames": dataset.num_frames,
                    "horizon": dataset.horizon,
                }
                if hasattr(model, "attn_history_"):
                    summary["attention_loss"] = model.attn_history_[-1]
                    summary["profile"] = bundle["profile"]
                    latents = model._mean_latents()
                    from .attention import attention_weights

                    summary["attention"] = attention_weights(
                        model.attn_params_, latents, dataset.horizon
                    ).tolist()
                if hasattr(model, "flows_"):
                    summary["flow_losses"] = [f.best_loss_ for f in model.flows_]
                if isinstance(model, TPGMM):
                    probe = dataset.demos[0].query
                    model.predict(probe)
                    summary["alpha"] = model.last_alpha_track_.tolist()
                    summary["gamma"] = model.gamma_
                model_id = _content_id(bundle)
                store.put("models", model_id, {"bundle": bundle, "summary": summary})
                record["result"] = model_id
            elif record["kind"] == "benchmark":
                config = _scaled_config(record.get("hyper", {}))
                report, _ = run_benchmark(
                    record["task"],
                    methods=[record["method"]],
                    trials=record["trials"],
                    seed=record["seed"],
                    config=config,
                )
                record["result"] = report.to_dict()
            else:
                raise ValueError(f"unknown job kind {record['kind']!r}")
            record["status"] = "done"
            record["progress"] = 1.0
        except Exception as exc:  # job isolation: service stays healthy
            record["status"] = "failed"
            record["error"] = f"{type(exc).__name__}: {exc}"
            record["trace"] = traceback.format_exc(limit=3)
        store.put("jobs", job_id, record)
        with active_lock:
            active.discard(job_id)

    def _worker() -> None:
        while True:
            job_id = jobs.get()
            if job_id is None:
                return
            _run_job(job_id)

    worker = threading.Thread(target=_worker, daemon=True)
    worker.start()
    app.state.store = store
    app.state.job_queue = jobs

    # -- scenarios ----------------------------------------------------------

    @app.post("/scenarios")
    def create_scenario(req: ScenarioCreate):
        if req.scenario is not None:
            try:
                scenario = Scenario.from_dict(req.scenario)
            except (KeyError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=f"bad scenario: {exc}")
        else:
            if req.kind not in TASK_KINDS:
                raise HTTPException(status_code=400, detail=f"unknown kind {req.kind!r}")
            scenario = ScenarioSampler(req.kind, req.regime, req.seed).sample()
        record = {
            "scenario": scenario.to_dict(),
            "horizon": req.horizon,
            "demos": [],
        }
        scenario_id = _content_id(record)
        store.put("scenarios", scenario_id, record)
        return {"id": scenario_id, **record}

    @app.get("/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str):
        return {"id": scenario_id, **store.get("scenarios", scenario_id)}

    @app.post("/scenarios/{scenario_id}/demos")
    def submit_demo(scenario_id: str, req: DemoSubmit):
        record = store.get("scenarios", scenario_id)
        try:
            raw = Trajectory(np.array(req.trajectory, dtype=float))
            if raw.dim != 2:
                raise ValueError("demonstrations must be 2-dimensional")
            demo = resample(raw, record["horizon"])
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"bad trajectory: {exc}")
        record["demos"].append(demo.points.tolist())
        store.put("scenarios", scenario_id, record)
        return {
            "index": len(record["demos"]) - 1,
            "trajectory": demo.points.tolist(),
        }

    @app.delete("/scenarios/{scenario_id}/demos/last")
    def remove_last_demo(scenario_id: str):
        record = store.get("scenarios", scenario_id)
        if not record["demos"]:
            raise HTTPException(status_code=404, detail="no demos to remove")
        record["demos"].pop()
        store.put("scenarios", scenario_id, record)
        return {"remaining": len(record["demos"])}

    # -- jobs ---------------------------------------------------------------

    @app.post("/jobs")
    def submit_job(req: JobSubmit):
        if req.kind not in ("train-flow", "train-attention", "train-baseline", "benchmark"):
            raise HTTPException(status_code=400, detail=f"unknown job kind {req.kind!r}")
        record = {
            "kind": req.kind,
            "scenario_id": req.scenario_id,
            "method": req.method,
            "seed": req.seed,
            "task": req.task,
            "trials": req.trials,
            "hyper": req.hyper,
            "status": "queued",
            "progress": 0.0,
            "result": None,
            "error": None,
        }
        if req.kind != "benchmark":
            if req.scenario_id is None:
                raise HTTPException(status_code=400, detail="scenario_id required")
            store.get("scenarios", req.scenario_id)  # 404 if unknown
        elif req.task not in TASK_KINDS:
            raise HTTPException(status_code=400, detail=f"unknown task {req.task!r}")
        job_id = _content_id(record)
        with active_lock:
            if job_id in active:
                raise HTTPException(status_code=409, detail="identical job already pending")
            active.add(job_id)
        store.put("jobs", job_id, record)
        jobs.put(job_id)
        return {"id": job_id, **record}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return {"id": job_id, **store.get("jobs", job_id)}

    # -- models -------------------------------------------------------------

    @app.post("/models/{model_id}/generate")
    def generate(model_id: str, req: GenerateRequest):
        bundle = store.get("models", model_id)["bundle"]
        try:
            query = query_from_dict(req.query)
        except (KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad query: {exc}")
        try:
            if bundle["kind"] == "salat":
                model = SALAT.from_dict(bundle)
                traj, attention = model.predict(query, policy=req.policy, seed=req.seed)
            elif bundle["kind"] == "salit":
                model = SALIT.from_dict(bundle)
                traj, attention = model.predict(query, policy=req.policy, seed=req.seed)
            else:
                model = TPGMM.from_dict(bundle)
                traj = model.predict(query)
                attention = model.last_alpha_track_
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "trajectory": traj.points.tolist(),
            "attention": np.asarray(attention).tolist(),
        }

    @app.get("/models/{model_id}/summary")
    def model_summary(model_id: str):
        return {"id": model_id, **store.get("models", model_id)["summary"]}

    return app
