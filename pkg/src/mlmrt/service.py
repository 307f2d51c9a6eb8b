"""HTTP JSON API around the engine, plus static hosting for the browser UI.

All request bodies are run-config documents; every response embeds the
resolved config and the engine version so results are reproducible from the
report alone. Stateless handlers; CORS is open so the UI can be hosted
anywhere.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi import FastAPI, File, Form, Query, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import config as config_mod
from . import estimator
from .distributions import VARIANTS
from .errors import ConfigError, InsufficientN, MlmrtError, NoSolution, SchemaError
from .simulation import SimulationPlan, estimate

MAX_REPLICATES = 10_000


def _error_response(status: int, message: str, path: str | None = None) -> JSONResponse:
    body = {"error": message}
    if path is not None:
        body["path"] = path
    return JSONResponse(status_code=status, content=body)


async def _json_body(request: Request) -> dict:
    try:
        return await request.json()
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON body: {exc}") from None


def create_app(static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="mlmrt", version=config_mod.ENGINE_VERSION)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ConfigError)
    async def _config_error(_req, exc: ConfigError):
        return _error_response(400, exc.detail, exc.path)

    @app.exception_handler(SchemaError)
    async def _schema_error(_req, exc: SchemaError):
        return _error_response(400, str(exc))

    @app.exception_handler(NoSolution)
    async def _no_solution(_req, exc: NoSolution):
        return _error_response(422, str(exc))

    @app.exception_handler(InsufficientN)
    async def _insufficient(_req, exc: InsufficientN):
        return _error_response(422, str(exc))

    @app.exception_handler(MlmrtError)
    async def _domain_error(_req, exc: MlmrtError):
        return _error_response(400, str(exc))

    @app.get("/health")
    async def health():
        return {"status": "ok", "engine_version": config_mod.ENGINE_VERSION}

    def _query_endpoint(forced_result: str):
        async def endpoint(request: Request):
            doc = dict(await _json_body(request))
            doc["result"] = forced_result
            cfg = config_mod.parse_config(doc)
            return config_mod.run_query(cfg)

        return endpoint

    app.post("/api/samplesize")(_query_endpoint(config_mod.RESULT_SAMPLE_SIZE))
    app.post("/api/power")(_query_endpoint(config_mod.RESULT_POWER))
    app.post("/api/coverage")(_query_endpoint(config_mod.RESULT_COVERAGE))

    @app.post("/api/run")
    async def run(request: Request):
        cfg = config_mod.parse_config(await _json_body(request))
        return config_mod.run_query(cfg)

    @app.post("/api/simulate")
    async def simulate(request: Request):
        cfg = config_mod.parse_config(await _json_body(request))
        if cfg.replicates > MAX_REPLICATES:
            raise ConfigError("replicates", f"capped at {MAX_REPLICATES} per request")
        n = cfg.ss
        if n is None:
            n = config_mod.run_query(cfg)["result"]["N"]
        plan = SimulationPlan(
            design=cfg.design,
            trend=cfg.trend,
            n=n,
            variant=cfg.variant,
            mode="power" if cfg.method == config_mod.METHOD_POWER else "coverage",
            precision=None if cfg.method == config_mod.METHOD_POWER else cfg.trend,
            q=cfg.q,
            sigma=cfg.sigma,
            rho=cfg.rho,
            sig_level=cfg.sig_level,
            replicates=cfg.replicates,
            seed=cfg.seed,
        )
        est = estimate(plan)
        return {
            "config": config_mod.resolved(cfg),
            "plan": {"N": n, "mode": plan.mode, "replicates": plan.replicates, "seed": plan.seed},
            "empirical": est.value,
            "se": est.se,
            "formula": est.formula_value,
            "discrepancy": est.discrepancy,
            "failures": est.failures,
            "runtime_s": est.runtime_s,
            "engine_version": config_mod.ENGINE_VERSION,
        }

    @app.get("/api/power-curve")
    async def power_curve_get(
        nmin: int = Query(..., ge=1),
        nmax: int = Query(..., ge=1),
        config: str = Query(..., description="URL-encoded config JSON"),
    ):
        try:
            doc = json.loads(config)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        cfg = config_mod.parse_config(doc)
        return config_mod.run_curve(cfg, nmin, nmax)

    @app.post("/api/power-curve")
    async def power_curve_post(request: Request, nmin: int = Query(..., ge=1), nmax: int = Query(..., ge=1)):
        cfg = config_mod.parse_config(await _json_body(request))
        return config_mod.run_curve(cfg, nmin, nmax)

    @app.post("/api/analyze")
    async def analyze(
        file: UploadFile = File(...),
        config: str = Form(...),
        followup: str | None = Form(None),
    ):
        try:
            doc = json.loads(config)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        cfg = config_mod.parse_config(doc, require_targets=False)
        with tempfile.NamedTemporaryFile(suffix=".csv", delete=False) as tmp:
            tmp.write(await file.read())
            tmp_path = tmp.name
        try:
            dataset = estimator.read_dataset_csv(tmp_path, cfg.design)
        finally:
            Path(tmp_path).unlink(missing_ok=True)
        fit_result = estimator.fit(dataset, cfg.trend, cfg.q)
        tests = []
        for variant in VARIANTS:
            try:
                tests.append(estimator.test(fit_result, variant, cfg.sig_level))
            except InsufficientN:
                continue
        report = estimator.fit_report(fit_result, tests)
        report["config"] = config_mod.resolved(cfg)
        report["engine_version"] = config_mod.ENGINE_VERSION
        if followup:
            try:
                follow_doc = dict(json.loads(followup))
            except json.JSONDecodeError as exc:
                raise ConfigError("followup", f"invalid JSON: {exc}") from None
            follow_doc["beta_mean"] = list(fit_result.standardized_average)
            if follow_doc.get("beta_shape", "constant") != "constant":
                follow_doc["beta_initial"] = list(fit_result.standardized_initial)
            follow_doc["result"] = config_mod.RESULT_SAMPLE_SIZE
            follow_cfg = config_mod.parse_config(follow_doc)
            report["followup"] = config_mod.run_query(follow_cfg)
        return report

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
