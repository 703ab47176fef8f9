"""HTTP service over loaded inverse models and the built-in simulator.

Read-only: the service never mutates models or datasets. Every extraction
or simulation response carries the content hash of the model file(s) it was
computed with.
"""
from __future__ import annotations

import os
import re

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import cascade, neural
from .cascade import CascadeError, ExtractionRequest
from .experiments import file_content_hash
from .sampling import (RangeConstraint, SamplingError, specs_for)
from .surrogate import (CggParams, IdParams, Simulator, SurrogateError,
                        scale_curve)

MODEL_FILES = {"cgg": "cgg_inverse.json", "id": "id_inverse.json"}


class ApiError(Exception):
    def __init__(self, status, message, parameter=None):
        self.status = status
        self.message = message
        self.parameter = parameter


def _parse_constraints(stage, doc):
    """{name: [min, max]} -> ordered RangeConstraint list; omitted names
    default to the global range."""
    specs = specs_for(stage)
    known = {s.name for s in specs}
    doc = doc or {}
    for name in doc:
        if name not in known:
            raise ApiError(400, f"unknown parameter {name}", parameter=name)
    out = []
    for s in specs:
        if s.name in doc:
            lo, hi = doc[s.name]
            try:
                c = RangeConstraint(float(lo), float(hi))
            except (TypeError, ValueError) as exc:
                raise ApiError(400, f"bad constraint for {s.name}: {exc}",
                               parameter=s.name)
            if c.local_min < s.global_min or c.local_max > s.global_max:
                raise ApiError(400,
                               f"constraint for {s.name} outside global range",
                               parameter=s.name)
            out.append(c)
        else:
            out.append(RangeConstraint(s.global_min, s.global_max))
    return out


def _stage_of(payload):
    stage = payload.get("stage")
    if stage not in ("cgg", "id"):
        raise ApiError(404, f"unknown stage {stage!r}")
    return stage


def create_app(models_dir, static_dir=None) -> FastAPI:
    models_dir = os.environ.get("FLOATNORM_MODELS", models_dir)
    app = FastAPI(title="floatnorm", docs_url=None, redoc_url=None)
    simulator = Simulator()
    models = {}
    hashes = {}
    for stage, fname in MODEL_FILES.items():
        path = os.path.join(models_dir, fname)
        if os.path.exists(path):
            models[stage] = neural.load_model(path)
            hashes[stage] = file_content_hash(path)[:16]

    def model_for(stage):
        if stage not in models:
            raise ApiError(503, f"no {stage} model loaded")
        return models[stage]

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        body = {"error": exc.message}
        if exc.parameter:
            body["parameter"] = exc.parameter
        return JSONResponse(status_code=exc.status, content=body)

    def _wrap(fn):
        # library errors -> 400 JSON, keeping any "for <NAME>" parameter hint
        try:
            return fn()
        except (CascadeError, SamplingError, SurrogateError) as exc:
            m = re.search(r"(?:for|parameter) (\w+)", str(exc))
            raise ApiError(400, str(exc),
                           parameter=m.group(1) if m else None)

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "model_versions": hashes}

    @app.get("/api/parameters")
    async def parameters():
        out = []
        for stage in ("cgg", "id"):
            for s in specs_for(stage):
                out.append({"name": s.name, "global_min": s.global_min,
                            "global_max": s.global_max, "units": s.units,
                            "stage": s.stage, "index": s.index})
        return out

    @app.post("/api/extract")
    async def api_extract(payload: dict):
        stage = _stage_of(payload)
        net = model_for(stage)
        constraints = _parse_constraints(stage, payload.get("constraints"))

        def run():
            req = ExtractionRequest(stage, payload.get("curve"), constraints,
                                    fixed_phig=payload.get("fixed_phig"))
            return cascade.extract(req, net, simulator)
        res = _wrap(run)
        doc = res.to_dict()
        doc["model_hash"] = hashes[stage]
        return doc

    @app.post("/api/simulate")
    async def api_simulate(payload: dict):
        stage = _stage_of(payload)

        def run():
            params = payload.get("params") or {}
            if stage == "cgg":
                curve = simulator.simulate_cgg(CggParams(**params))
            else:
                if "phig" in payload:
                    params = {**params, "PHIG": payload["phig"]}
                curve = simulator.simulate_id(IdParams(**params))
            return curve
        try:
            curve = _wrap(run)
        except TypeError as exc:
            raise ApiError(400, f"bad params: {exc}")
        doc = {"stage": stage, "curve": curve.values.tolist(),
               "scaled": scale_curve(curve).tolist()}
        if stage == "id":
            import numpy as np
            doc["log10"] = np.log10(np.maximum(curve.values, 1e-14)).tolist()
        return doc

    @app.post("/api/two-stage-extract")
    async def api_two_stage(payload: dict):
        cgg_net = model_for("cgg")
        id_net = model_for("id")
        cgg_c = _parse_constraints("cgg", payload.get("cgg_constraints"))
        id_c = _parse_constraints("id", payload.get("id_constraints"))

        def run():
            return cascade.two_stage_extract(
                payload.get("cgg_curve"), payload.get("id_curve"),
                cgg_c, id_c, cgg_net, id_net, simulator)
        cgg_res, id_res = _wrap(run)
        return {"cgg": {**cgg_res.to_dict(), "model_hash": hashes["cgg"]},
                "id": {**id_res.to_dict(), "model_hash": hashes["id"]}}

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="static")
    return app
