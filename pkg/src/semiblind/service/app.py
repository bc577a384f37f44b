"""HTTP service over the simulation harness.

The handlers are plain functions so the CLI can call them in-process; the
FastAPI routes are one-line wrappers. Invalid configurations surface as 400s
(ConfigError) or 422s (schema validation).
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..harness import ConfigError, aggregate, csv_text, run_scenario, run_sweep, self_check
from .schemas import CheckResponse, MetricsRow, RunResponse, SimRequest


def handle_run(req: SimRequest) -> RunResponse:
    """Single-point scenario: one mode, one Eb/N0."""
    rows = aggregate(run_scenario(req.to_config()))
    return RunResponse(rows=[MetricsRow.from_row(r) for r in rows], csv=csv_text(rows))


def handle_sweep(req: SimRequest) -> RunResponse:
    """Cartesian sweep over the request's mode and Eb/N0 lists."""
    rows = run_sweep(req.to_config())
    return RunResponse(rows=[MetricsRow.from_row(r) for r in rows], csv=csv_text(rows))


def handle_check() -> CheckResponse:
    return CheckResponse.from_report(self_check())


def create_app() -> FastAPI:
    api = FastAPI(title="semiblind-ofdm", version="0.1.0")

    @api.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @api.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @api.post("/run", response_model=RunResponse)
    def run(req: SimRequest) -> RunResponse:
        return handle_run(req)

    @api.post("/sweep", response_model=RunResponse)
    def sweep(req: SimRequest) -> RunResponse:
        return handle_sweep(req)

    @api.get("/check", response_model=CheckResponse)
    def check() -> CheckResponse:
        return handle_check()

    return api


app = create_app()
