"""HTTP service for the learner loop: task browsing, program execution, hints.

Learner-facing responses never include the repaired program or the
explanation; every hint response is tagged with the backend class (local vs
external) so clients can show where learner code traveled. An operator
endpoint (bearer token) returns full feedback bundles.
"""

from __future__ import annotations

import json
import logging
import os
import time
from pathlib import Path
from typing import Literal, Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .corpus import (
    BuggyProgram,
    Corpus,
    NotBuggyError,
    Origin,
    Split,
    load_corpus,
    resolve_corpus_path,
)
from .gateway import (
    GatewayError,
    MockBackend,
    MockScript,
    OpenAIChatBackend,
    PricingTable,
)
from .pipeline import HintFormatError, PipelineConfig, PipelineError, run_feedback
from .sandbox import ExecutionRequest, Limits, SandboxExecutor

logger = logging.getLogger("hintgen.service")

MAX_PROGRAM_BYTES = 64 * 1024
EXECUTE_CASE_TIMEOUT_MS = 2000
DEFAULT_MOCK_SCRIPT = Path(__file__).parent / "data" / "mockscripts" / "demo.json"


class BackendConfig(BaseModel):
    kind: Literal["mock", "openai"]
    mock_script: Optional[str] = None
    base_url: Optional[str] = None
    model: Optional[str] = None
    api_key_env: str = "OPENAI_API_KEY"
    backend_id: Optional[str] = None


class ServiceConfig(BaseModel):
    host: str = "127.0.0.1"
    port: int = 8000
    corpus: str = "intro-basics"
    backend: BackendConfig = Field(default_factory=lambda: BackendConfig(kind="mock"))
    pipeline: dict = Field(default_factory=dict)
    pricing_path: Optional[str] = None
    cors_allow_origins: list[str] = Field(default_factory=list)
    operator_token_env: str = "HINTGEN_OPERATOR_TOKEN"
    audit_log_path: Optional[str] = None
    static_dir: Optional[str] = None
    sandbox_workers: int = 4

    @classmethod
    def from_json_file(cls, path) -> "ServiceConfig":
        return cls.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))


class TaskSummary(BaseModel):
    id: str
    title: str
    description: str
    difficulty: str


class TaskDetail(TaskSummary):
    entry_function: str
    prelude: Optional[str] = None
    test_count: int


class CaseResultModel(BaseModel):
    case_id: str
    status: str
    actual: object = None
    stderr_excerpt: str = ""
    duration_ms: int = 0
    expected: object = None


class ExecuteRequestModel(BaseModel):
    task_id: str
    program: str


class ExecuteResponse(BaseModel):
    all_passed: bool
    failing_ids: list[str]
    results: list[CaseResultModel]


class HintRequestModel(BaseModel):
    task_id: str
    program: str
    n_r: Optional[int] = Field(default=None, ge=1, le=64)


class HintTelemetry(BaseModel):
    latency_ms: int
    usd_cost: float
    backend_class: Literal["local", "external"]


class HintResponse(BaseModel):
    hint: str
    repair_found: bool
    telemetry: HintTelemetry


def build_backend(config: BackendConfig):
    if config.kind == "mock":
        script_path = config.mock_script or DEFAULT_MOCK_SCRIPT
        return MockBackend(
            MockScript.from_json_file(script_path),
            backend_id=config.backend_id or "mock",
        )
    if not config.base_url or not config.model:
        raise ValueError("openai backend requires base_url and model")
    return OpenAIChatBackend(
        base_url=config.base_url,
        model=config.model,
        api_key_env=config.api_key_env,
        backend_id=config.backend_id,
    )


def build_pricing(config: ServiceConfig, backend) -> PricingTable:
    if config.pricing_path:
        return PricingTable.from_json_file(config.pricing_path)
    return PricingTable.zero(backend.backend_id)


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="hintgen", version="0.1.0")

    if config.cors_allow_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_allow_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    corpus: Corpus = load_corpus(resolve_corpus_path(config.corpus))
    backend = build_backend(config.backend)
    pricing = build_pricing(config, backend)
    executor = SandboxExecutor(workers=config.sandbox_workers)
    base_pipeline_cfg = PipelineConfig(**config.pipeline)

    app.state.config = config
    app.state.corpus = corpus
    app.state.backend = backend
    app.state.pricing = pricing
    app.state.executor = executor
    app.state.pipeline_cfg = base_pipeline_cfg

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request body"})

    def get_task_or_404(task_id: str):
        try:
            return app.state.corpus.task_by_id(task_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown task: {task_id}")

    def check_program_size(program: str) -> None:
        if len(program.encode("utf-8")) > MAX_PROGRAM_BYTES:
            raise HTTPException(status_code=413, detail="program exceeds 64 KiB limit")

    def log_request(endpoint: str, task_id: str, status: str, latency_ms: int) -> None:
        # Structured log excludes the program text by design.
        logger.info(
            json.dumps(
                {
                    "endpoint": endpoint,
                    "task_id": task_id,
                    "status": status,
                    "latency_ms": latency_ms,
                }
            )
        )

    def audit(record: dict) -> None:
        if not config.audit_log_path:
            return
        with open(config.audit_log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "corpus": app.state.corpus.name,
            "backend_id": app.state.backend.backend_id,
            "backend_class": app.state.backend.backend_class,
        }

    @app.get("/tasks", response_model=list[TaskSummary])
    def list_tasks():
        return [
            TaskSummary(
                id=t.id, title=t.title, description=t.description,
                difficulty=t.difficulty.value,
            )
            for t in app.state.corpus.tasks
        ]

    @app.get("/tasks/{task_id}", response_model=TaskDetail)
    def task_detail(task_id: str):
        task = get_task_or_404(task_id)
        return TaskDetail(
            id=task.id,
            title=task.title,
            description=task.description,
            difficulty=task.difficulty.value,
            entry_function=task.entry_function,
            prelude=task.prelude,
            test_count=len(task.suite.cases),
        )

    @app.post("/execute", response_model=ExecuteResponse)
    def execute(body: ExecuteRequestModel):
        task = get_task_or_404(body.task_id)
        check_program_size(body.program)
        started = time.monotonic()
        limits = Limits(
            wall_timeout_ms=EXECUTE_CASE_TIMEOUT_MS,
            total_timeout_ms=max(
                EXECUTE_CASE_TIMEOUT_MS * len(task.suite.cases), EXECUTE_CASE_TIMEOUT_MS
            ),
            max_output_bytes=16 * 1024,
        )
        verdict = app.state.executor.run_suite(
            ExecutionRequest(
                program=body.program,
                entry_function=task.entry_function,
                cases=task.suite.cases,
                prelude=task.prelude,
                limits=limits,
            )
        )
        expected_by_id = {c.id: c.expected for c in task.suite.cases}
        log_request("/execute", task.id, "ok", int((time.monotonic() - started) * 1000))
        return ExecuteResponse(
            all_passed=verdict.all_passed,
            failing_ids=list(verdict.failing_ids),
            results=[
                CaseResultModel(
                    case_id=r.case_id,
                    status=r.status.value,
                    actual=r.actual,
                    stderr_excerpt=r.stderr_excerpt,
                    duration_ms=r.duration_ms,
                    expected=expected_by_id.get(r.case_id),
                )
                for r in verdict.results
            ],
        )

    def _run_bundle(body: HintRequestModel):
        task = get_task_or_404(body.task_id)
        check_program_size(body.program)
        cfg: PipelineConfig = app.state.pipeline_cfg
        if body.n_r is not None:
            cfg = PipelineConfig(**{**cfg.to_json_dict(), "n_r": body.n_r})
        adhoc = BuggyProgram(
            id="learner-program",
            task_id=task.id,
            source=body.program,
            origin=Origin.REAL_WORLD,
            split=Split.EVALUATION,
        )
        started = time.monotonic()
        try:
            bundle = run_feedback(
                task, adhoc, cfg, app.state.backend, app.state.executor,
                pricing=app.state.pricing,
            )
        except NotBuggyError:
            log_request("/hint", task.id, "not_buggy", int((time.monotonic() - started) * 1000))
            raise HTTPException(
                status_code=409, detail="not buggy: the program passes all tests; run your tests"
            )
        except (GatewayError, HintFormatError) as exc:
            log_request("/hint", task.id, "backend_error", int((time.monotonic() - started) * 1000))
            return JSONResponse(
                status_code=502, content={"detail": str(exc), "retriable": True}
            )
        except PipelineError as exc:
            if isinstance(exc.__cause__, GatewayError):
                log_request("/hint", task.id, "backend_error", int((time.monotonic() - started) * 1000))
                return JSONResponse(
                    status_code=502, content={"detail": str(exc), "retriable": True}
                )
            log_request("/hint", task.id, "pipeline_error", int((time.monotonic() - started) * 1000))
            raise HTTPException(status_code=500, detail=str(exc))
        log_request("/hint", task.id, "ok", bundle.telemetry.total_latency_ms)
        audit(
            {
                "endpoint": "/hint",
                "task_id": task.id,
                "program": body.program,
                "hint": bundle.hint,
                "repair_found": not bundle.repair.empty,
            }
        )
        return bundle

    @app.post("/hint", response_model=HintResponse)
    def hint(body: HintRequestModel):
        bundle = _run_bundle(body)
        if isinstance(bundle, JSONResponse):
            return bundle
        # Concealment: the learner response carries the hint only, never the
        # explanation or any repaired source.
        return HintResponse(
            hint=bundle.hint,
            repair_found=not bundle.repair.empty,
            telemetry=HintTelemetry(
                latency_ms=bundle.telemetry.total_latency_ms,
                usd_cost=bundle.telemetry.usd_cost,
                backend_class=bundle.telemetry.backend_class,
            ),
        )

    def require_operator(authorization: str = Header(default="")) -> None:
        expected = os.environ.get(config.operator_token_env, "")
        if not expected:
            raise HTTPException(status_code=401, detail="operator token not configured")
        if authorization != f"Bearer {expected}":
            raise HTTPException(status_code=403, detail="invalid operator token")

    @app.post("/operator/feedback")
    def operator_feedback(body: HintRequestModel, _: None = Depends(require_operator)):
        bundle = _run_bundle(body)
        if isinstance(bundle, JSONResponse):
            return bundle
        return JSONResponse(content=json.loads(bundle.to_json()))

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="webui")

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
