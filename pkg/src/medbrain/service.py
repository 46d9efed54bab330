"""HTTP service: question answering, chat sessions, health.

Sessions persist as append-only JSON Lines event logs, one file per
session, so a restarted service replays its history from disk. The
service adds no answer content of its own — every payload is exactly
what the pipeline produced, plus the fixed research disclaimer.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import kb, pipeline
from .errors import ConfigError, NotFoundError, PipelineError
from .gateway import LLMBackend, RemoteBackend, ScriptedBackend
from .kb import Document, KnowledgeSourceConfig
from .pipeline import Answer, Evidence, Session, Turn
from .retrieval import RetrievalConfig

DISCLAIMER = (
    "For academic research only; not medical advice. Answers may be "
    "inaccurate and must not be used for diagnosis or treatment."
)


@dataclass(frozen=True)
class ServiceConfig:
    listen: str = "127.0.0.1:8080"
    db_paths: tuple[str, ...] = ()
    article_paths: tuple[str, ...] = ()
    scripted_rules: str | None = None
    remote_base_url: str | None = None
    remote_model: str | None = None
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    session_dir: str = "sessions"
    external: KnowledgeSourceConfig = field(default_factory=KnowledgeSourceConfig)

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        """Load JSON config; relative paths resolve against the config file's
        directory. Raises ConfigError with a diagnostic on any problem."""
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        base = path.parent

        def resolve(p: str) -> str:
            return str((base / p).resolve()) if not Path(p).is_absolute() else p

        retrieval_cfg = data.get("retrieval", {})
        external_cfg = data.get("external", {})
        remote = data.get("remote") or {}
        try:
            config = cls(
                listen=data.get("listen", "127.0.0.1:8080"),
                db_paths=tuple(resolve(p) for p in data.get("db_paths", [])),
                article_paths=tuple(resolve(p) for p in data.get("article_paths", [])),
                scripted_rules=(
                    resolve(data["scripted_rules"]) if data.get("scripted_rules") else None
                ),
                remote_base_url=remote.get("base_url"),
                remote_model=remote.get("model"),
                retrieval=RetrievalConfig(
                    section_size=retrieval_cfg.get("section_size", 256),
                    top_n=retrieval_cfg.get("top_n", 5),
                    drop_zero_scores=retrieval_cfg.get("drop_zero_scores", True),
                ),
                session_dir=resolve(data.get("session_dir", "sessions")),
                external=KnowledgeSourceConfig(
                    external_endpoint=external_cfg.get("endpoint"),
                    external_enabled=external_cfg.get("enabled", False),
                ),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid config {path}: {exc}") from exc
        config.validate()
        return config

    def validate(self) -> None:
        if not self.db_paths and not self.article_paths:
            raise ConfigError("config needs at least one db or article path")
        for p in (*self.db_paths, *self.article_paths):
            if not Path(p).is_file():
                raise ConfigError(f"knowledge file not found: {p}")
        has_scripted = self.scripted_rules is not None
        has_remote = self.remote_base_url is not None
        if has_scripted == has_remote:
            raise ConfigError("configure exactly one backend: scripted_rules or remote")
        if has_scripted and not Path(self.scripted_rules).is_file():
            raise ConfigError(f"scripted rules file not found: {self.scripted_rules}")
        if has_remote and not self.remote_model:
            raise ConfigError("remote backend needs a model name")

    def build_gateway(self) -> LLMBackend:
        if self.scripted_rules is not None:
            return ScriptedBackend.from_file(self.scripted_rules)
        return RemoteBackend(self.remote_base_url, self.remote_model)

    def build_corpus(self) -> list[Document]:
        corpus = kb.load_corpus(self.db_paths)
        corpus.extend(kb.load_article(p) for p in self.article_paths)
        return corpus


def answer_payload(answer: Answer) -> dict:
    return {
        "answer": answer.text,
        "keywords": list(answer.keywords),
        "evidence": [
            {
                "doc_id": e.doc_id,
                "section_index": e.section_index,
                "score": e.score,
                "selected_text": e.selected_text,
            }
            for e in answer.evidence
        ],
        "used_brain": answer.used_brain,
        "disclaimer": DISCLAIMER,
    }


def _answer_from_payload(payload: dict) -> Answer:
    return Answer(
        text=payload["answer"],
        keywords=tuple(payload["keywords"]),
        evidence=tuple(Evidence(**e) for e in payload["evidence"]),
        used_brain=payload["used_brain"],
    )


class SessionStore:
    """Directory of per-session JSON Lines event logs.

    Every event is appended and flushed immediately, so any snapshot of a
    log file is a byte prefix of every later snapshot, and a restarted
    store reloads all sessions by replaying the logs.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        for log in sorted(self.directory.glob("*.jsonl")):
            session = self._replay(log)
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()

    def _replay(self, log: Path) -> Session:
        session = Session(session_id=log.stem)
        for line in log.read_text(encoding="utf-8").splitlines():
            event = json.loads(line)
            if event["event"] == "turn":
                session.turns.append(
                    Turn(
                        question=event["question"],
                        answer=_answer_from_payload(event["answer"]),
                        timestamp=datetime.fromisoformat(event["ts"]),
                    )
                )
        return session

    def _append(self, session_id: str, event: dict) -> None:
        with (self.directory / f"{session_id}.jsonl").open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()

    def create(self) -> Session:
        session = pipeline.new_session()
        with self._registry_lock:
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()
        self._append(
            session.session_id,
            {"event": "created", "session_id": session.session_id,
             "ts": datetime.now(timezone.utc).isoformat()},
        )
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise NotFoundError(f"unknown session {session_id!r}") from None

    def lock(self, session_id: str) -> threading.Lock:
        return self._locks[session_id]

    def record_turn(self, session_id: str) -> None:
        turn = self._sessions[session_id].turns[-1]
        self._append(
            session_id,
            {
                "event": "turn",
                "question": turn.question,
                "answer": answer_payload(turn.answer),
                "ts": turn.timestamp.isoformat(),
            },
        )


class AskRequest(BaseModel):
    question: str
    use_brain: bool = True


def create_app(config: ServiceConfig) -> FastAPI:
    """Assemble the service: load the corpus, pick the backend, reopen the
    session store, and expose the HTTP surface."""
    corpus = config.build_corpus()
    gateway = config.build_gateway()
    store = SessionStore(config.session_dir)
    app = FastAPI(title="medbrain", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.config = config
    app.state.store = store

    def run_pipeline(question: str, use_brain: bool) -> Answer:
        try:
            if use_brain:
                return pipeline.answer_with_brain(
                    question, corpus, config.retrieval, gateway, config.external
                )
            return pipeline.answer_without_brain(question, gateway)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except PipelineError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/ask")
    def ask(req: AskRequest):
        return answer_payload(run_pipeline(req.question, req.use_brain))

    @app.post("/v1/sessions")
    def create_session():
        return {"session_id": store.create().session_id}

    @app.post("/v1/sessions/{session_id}/messages")
    def post_session_message(session_id: str, req: AskRequest):
        try:
            session = store.get(session_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        with store.lock(session_id):
            try:
                answer = pipeline.post_message(
                    session,
                    req.question,
                    corpus=corpus,
                    cfg=config.retrieval,
                    gateway=gateway,
                    sources=config.external,
                    use_brain=req.use_brain,
                )
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            except PipelineError as exc:
                raise HTTPException(status_code=502, detail=str(exc)) from exc
            store.record_turn(session_id)
        return answer_payload(answer)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            session = store.get(session_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {
            "session_id": session.session_id,
            "turns": [
                {
                    "question": t.question,
                    "answer": answer_payload(t.answer),
                    "timestamp": t.timestamp.isoformat(),
                }
                for t in session.turns
            ],
        }

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    host, _, port = config.listen.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port or 8080))
