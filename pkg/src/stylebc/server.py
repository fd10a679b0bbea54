"""HTTP/WebSocket service: teleoperated recording and policy rollouts.

REST manages sessions, saving, rollout requests and dataset/density
inspection; a WebSocket per session carries the step loop at the
client's cadence (the server never ticks on its own).  All trajectory
payloads use the dataset line format, so anything recorded here trains
unchanged.  Sessions are isolated: one env, one recording buffer and
one RNG stream each.
"""

from __future__ import annotations

import asyncio
import itertools
import json
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import dataset_io
from .env import Env, EnvConfig, EnvState, clamp_action
from .evaluation import (FixedStyle, Property, UniformCodebook,
                         conditioned_styles, density, generate, metric_names)
from .maze import MazeSpec, load_bundled
from .neural import Model
from .similarity import DissimilarityMatrix, dissimilarity_matrix
from .types import Dataset, RngStream, Trajectory, behavior_from_checkpoints


@dataclass
class Session:
    id: str
    env: Env
    state: EnvState
    gen: np.random.Generator
    states: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)

    def snapshot(self) -> dict:
        return {
            "s": [float(v) for v in self.state.position],
            "visited": list(self.state.visited),
            "steps": self.state.steps,
            "done": self.state.done,
            "recorded": len(self.actions),
        }

    def reset(self):
        self.state = self.env.reset(self.gen)
        self.states = [self.state.position.copy()]
        self.actions = []

    def step(self, action) -> dict:
        a = clamp_action(action)
        self.env.step(self.state, a, self.gen)
        self.actions.append(a)
        self.states.append(self.state.position.copy())
        return {
            "s": [float(v) for v in self.state.position],
            "visited": list(self.state.visited),
            "done": self.state.done,
            "clamped_a": [float(v) for v in a],
        }


def _maze_payload(maze: MazeSpec) -> dict:
    return {
        "text": maze.render(),
        "width": maze.width,
        "height": maze.height,
        "doors": {str(k): list(v) for k, v in sorted(maze.doors.items())},
        "goal": list(maze.goal),
        "start": list(maze.start),
    }


def create_app(maze: MazeSpec, env_cfg: EnvConfig | None = None,
               model: Model | None = None, dataset: Dataset | None = None,
               nu: DissimilarityMatrix | None = None,
               record_path=None, frontend_dir=None, seed: int = 0) -> FastAPI:
    app = FastAPI(title="stylebc")
    env_cfg = env_cfg if env_cfg is not None else EnvConfig()
    sessions: dict[str, Session] = {}
    rollout_seq = itertools.count()
    root = RngStream(seed, "server")

    def _session(sid: str) -> Session:
        if sid not in sessions:
            raise HTTPException(status_code=404, detail=f"no session {sid}")
        return sessions[sid]

    def _need_dataset() -> Dataset:
        if dataset is None:
            raise HTTPException(status_code=400, detail="no dataset loaded")
        return dataset

    def _need_model() -> Model:
        if model is None:
            raise HTTPException(status_code=400, detail="no checkpoint loaded")
        return model

    @app.get("/maze")
    def get_maze():
        return _maze_payload(maze)

    @app.get("/info")
    def info():
        # lets the UI decide what to enable before touching heavier routes
        return {
            "checkpoint": model is not None,
            "dataset": dataset is not None,
            "recording": record_path is not None,
            "n_styles": None if model is None else model.arch.n_styles,
            "metrics": metric_names(),
        }

    @app.post("/session")
    def create_session(body: dict | None = None):
        body = body or {}
        m = maze if "maze" not in body else load_bundled(body["maze"])
        try:
            cfg = (env_cfg if "env_config" not in body
                   else EnvConfig(**body["env_config"]))
        except (TypeError, ValueError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        sid = uuid.uuid4().hex[:12]
        gen = root.derive(f"session:{sid}").generator()
        sess = Session(id=sid, env=Env(m, cfg), state=None, gen=gen)
        sess.reset()
        sessions[sid] = sess
        return {"id": sid, "maze": _maze_payload(m), "state": sess.snapshot()}

    @app.post("/session/{sid}/reset")
    async def reset_session(sid: str):
        sess = _session(sid)
        async with sess.lock:
            sess.reset()
            return sess.snapshot()

    @app.get("/session/{sid}/state")
    def session_state(sid: str):
        return _session(sid).snapshot()

    @app.post("/session/{sid}/save")
    async def save_session(sid: str):
        sess = _session(sid)
        async with sess.lock:
            if not sess.actions:
                raise HTTPException(status_code=400, detail="nothing recorded")
            visited = tuple(sess.state.visited)
            success = bool(visited) and visited[-1] == 0
            traj = Trajectory(id=0, states=np.asarray(sess.states),
                              actions=np.asarray(sess.actions),
                              checkpoints=visited, success=success)
            behavior = behavior_from_checkpoints(visited)
            out = {"behavior": behavior, "success": success,
                   "length": traj.length}
            if record_path is not None:
                meta = {"source": "demo-studio", "maze": _maze_payload(maze)["text"]}
                out["dataset_index"] = dataset_io.append_trajectory(
                    record_path, traj, meta=meta)
                out["path"] = str(record_path)
            return out

    @app.post("/rollout")
    def rollout(body: dict | None = None):
        body = body or {}
        mdl = _need_model()
        if "style_index" in body and body["style_index"] is not None:
            source = FixedStyle(mdl, int(body["style_index"]))
            support = [source.index]
        elif "property" in body and body["property"] is not None:
            p = body["property"]
            try:
                prop = Property(metric=p["metric"], m_min=p["min"],
                                m_max=p["max"])
                source = conditioned_styles(_need_dataset(), mdl, prop)
            except (KeyError, ValueError) as e:
                raise HTTPException(status_code=422, detail=str(e))
            support = [int(i) for i in source.indices]
        else:
            source = UniformCodebook(mdl)
            support = [int(i) for i in source.indices]
        rseed = int(body.get("seed", next(rollout_seq)))
        traj = generate(mdl, maze, env_cfg, source, 1, rseed,
                        greedy=bool(body.get("greedy", True)))[0]
        used = _style_index_of(source, rseed)
        return {
            "trajectory": dataset_io.trajectory_to_obj(traj),
            "behavior": behavior_from_checkpoints(traj.checkpoints),
            "style_index": used,
            "style_support": support,
            "seed": rseed,
        }

    @app.get("/dataset/summary")
    def dataset_summary():
        ds = _need_dataset()
        lengths = ds.lengths()
        return {
            "n": len(ds),
            "histogram": ds.behavior_histogram(),
            "length_min": int(lengths.min()),
            "length_max": int(lengths.max()),
            "meta": ds.meta,
        }

    @app.get("/density")
    def density_grid(beta: float = 0.0, ref: int = 0, resolution: int = 64):
        ds = _need_dataset()
        nonlocal nu
        if nu is None:
            nu = dissimilarity_matrix(ds)
        try:
            grid = density(ds, nu, beta, ref, maze, resolution=resolution)
        except IndexError as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {
            "resolution": grid.resolution,
            "extent": list(grid.extent),
            "beta": beta,
            "ref": ref,
            "masses": grid.masses.tolist(),
        }

    @app.websocket("/session/{sid}/step")
    async def step_socket(ws: WebSocket, sid: str):
        await ws.accept()
        if sid not in sessions:
            await ws.send_text(json.dumps({"error": f"no session {sid}"}))
            await ws.close()
            return
        sess = sessions[sid]
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    frame = json.loads(raw)
                    action = frame["a"]
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    await ws.send_text(json.dumps(
                        {"error": f"malformed frame: {e}"}))
                    continue
                async with sess.lock:
                    if sess.state.done:
                        await ws.send_text(json.dumps(
                            {"error": "step after done",
                             **sess.snapshot()}))
                        continue
                    try:
                        reply = sess.step(action)
                    except (ValueError, RuntimeError) as e:
                        await ws.send_text(json.dumps({"error": str(e)}))
                        continue
                await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass

    if frontend_dir is not None:
        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="frontend")

    return app


def _style_index_of(source, seed: int) -> int:
    """The style index generate() drew for episode 0 of this seed."""
    ep = RngStream(seed, "eval").derive("ep:0")
    idx, _ = source.sample(ep.derive("style").generator())
    return int(idx)
