"""The autonomous answering pipeline.

One question flows through a fixed stage order: keyword extraction,
optional external-article fetch, term-matching retrieval, per-section
knowledge selection, final answer. When keyword extraction yields
nothing or retrieval comes back empty, the raw question goes straight
to the model and the answer is flagged as not grounded (used_brain
False) so callers can label it as unverified prior knowledge.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Sequence

from . import kb, prompts, retrieval
from .errors import (
    EmptyKeywordsError,
    NotFoundError,
    PipelineError,
    ProtocolError,
    TransportError,
)
from .gateway import GenerationParams, LLMBackend
from .kb import Document, KnowledgeSourceConfig
from .retrieval import RetrievalConfig


@dataclass(frozen=True)
class Evidence:
    doc_id: str
    section_index: int
    score: int
    selected_text: str


@dataclass(frozen=True)
class Answer:
    text: str
    keywords: tuple[str, ...]
    evidence: tuple[Evidence, ...]
    used_brain: bool

    def __post_init__(self):
        if self.used_brain != bool(self.evidence):
            raise ValueError("used_brain must be true iff evidence is non-empty")


@dataclass(frozen=True)
class Turn:
    question: str
    answer: Answer
    timestamp: datetime


@dataclass
class Session:
    session_id: str
    turns: list[Turn] = field(default_factory=list)


def _complete(gateway: LLMBackend, prompt_text: str, params: GenerationParams, stage: str) -> str:
    try:
        return gateway.complete(prompt_text, params).text
    except (TransportError, ProtocolError) as exc:
        raise PipelineError(stage, exc) from exc


def answer_with_brain(
    question: str,
    corpus: Sequence[Document],
    cfg: RetrievalConfig,
    gateway: LLMBackend,
    sources: KnowledgeSourceConfig = KnowledgeSourceConfig(),
    *,
    params: GenerationParams = GenerationParams(),
    fetch: Callable[..., Document] = kb.fetch_external_article,
) -> Answer:
    """Answer one question, grounded in the knowledge corpus when possible."""
    if not question.strip():
        raise ValueError("question must be non-empty")
    if not corpus:
        raise ValueError("corpus must be loaded")

    # 1. mine lookup keywords from the question
    keyword_prompt = prompts.render_keyword_prompt(question)
    raw_keywords = _complete(gateway, keyword_prompt.text, params, "keyword_extraction")
    try:
        keywords = prompts.parse_keywords(raw_keywords)
    except EmptyKeywordsError:
        return _answer_direct(question, gateway, params, keywords=())

    # 2. optionally pull one online article and widen the working corpus
    working = list(corpus)
    if sources.external_enabled:
        try:
            working.append(fetch(keywords[0], sources))
        except (NotFoundError, TransportError):
            pass  # online source is supplemental; offline corpus still answers

    # 3. rank sections by keyword hits
    results = retrieval.retrieve_top_n(working, keywords, cfg)
    if not results:
        return _answer_direct(question, gateway, params, keywords=tuple(keywords))

    # 4. let the model select what helps, section by section in rank order
    evidence = []
    for result in results:
        selection_prompt = prompts.render_selection_prompt(result.chunk.raw_text, question)
        selected = _complete(
            gateway, selection_prompt.text, params, "knowledge_selection"
        ).strip()
        if selected:
            evidence.append(
                Evidence(
                    doc_id=result.chunk.doc_id,
                    section_index=result.chunk.section_index,
                    score=result.score,
                    selected_text=selected,
                )
            )
    if not evidence:
        # every selection came back empty: nothing usable was found
        return _answer_direct(question, gateway, params, keywords=tuple(keywords))

    # 5.-6. compile the knowledge and ask for the final answer
    knowledge = "\n\n".join(e.selected_text for e in evidence)
    final_prompt = prompts.render_final_prompt(question, knowledge)
    text = _complete(gateway, final_prompt.text, params, "final_answer")
    return Answer(
        text=text,
        keywords=tuple(keywords),
        evidence=tuple(evidence),
        used_brain=True,
    )


def _answer_direct(
    question: str,
    gateway: LLMBackend,
    params: GenerationParams,
    keywords: tuple[str, ...],
) -> Answer:
    text = _complete(gateway, question, params, "fallback")
    return Answer(text=text, keywords=keywords, evidence=(), used_brain=False)


def answer_without_brain(
    question: str,
    gateway: LLMBackend,
    *,
    params: GenerationParams = GenerationParams(),
) -> Answer:
    """Send the raw question to the model, bypassing retrieval entirely."""
    if not question.strip():
        raise ValueError("question must be non-empty")
    return _answer_direct(question, gateway, params, keywords=())


def new_session() -> Session:
    return Session(session_id=uuid.uuid4().hex)


def post_message(
    session: Session,
    question: str,
    *,
    corpus: Sequence[Document],
    cfg: RetrievalConfig,
    gateway: LLMBackend,
    sources: KnowledgeSourceConfig = KnowledgeSourceConfig(),
    params: GenerationParams = GenerationParams(),
    use_brain: bool = True,
) -> Answer:
    """Answer the latest question only (history is not injected into
    retrieval) and append the turn to the session."""
    if use_brain:
        answer = answer_with_brain(
            question, corpus, cfg, gateway, sources, params=params
        )
    else:
        answer = answer_without_brain(question, gateway, params=params)
    session.turns.append(
        Turn(question=question, answer=answer, timestamp=datetime.now(timezone.utc))
    )
    return answer
