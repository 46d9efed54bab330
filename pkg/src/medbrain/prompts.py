"""The three pipeline prompt templates and the keyword-response parser.

Template skeletons are frozen byte-for-byte (golden copies live under
fixtures/prompts/); rendering only substitutes into the placeholder
slots and never rewraps or truncates input text.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import EmptyKeywordsError

KEYWORD_TEMPLATE = (
    "A question is provided below. Given the question, extract keywords "
    "from the text. Focus on extracting the keywords that can be used to "
    "best look up answers to the question.\n"
    "\n"
    "{question}\n"
    "\n"
    "Provide keywords in the following comma-separated format.\n"
    "Keywords:"
)

SELECTION_TEMPLATE = (
    "Some information is below.\n"
    "\n"
    "{section_text}\n"
    "\n"
    "Select the information that will help to answer the question: {question}\n"
    "Response:"
)

FINAL_TEMPLATE = (
    "The original question is as follows: {question}\n"
    "Based on the information we provided:\n"
    "\n"
    "{knowledge}\n"
    "\n"
    "Answer:"
)


class PromptKind(str, Enum):
    KEYWORD_EXTRACTION = "keyword_extraction"
    KNOWLEDGE_SELECTION = "knowledge_selection"
    FINAL_ANSWER = "final_answer"


@dataclass(frozen=True)
class RenderedPrompt:
    kind: PromptKind
    text: str


def render_keyword_prompt(question: str) -> RenderedPrompt:
    """Stage-one prompt: ask the model for comma-separated lookup keywords."""
    if not question.strip():
        raise ValueError("question must be non-empty")
    return RenderedPrompt(
        kind=PromptKind.KEYWORD_EXTRACTION,
        text=KEYWORD_TEMPLATE.format(question=question),
    )


def render_selection_prompt(section_text: str, question: str) -> RenderedPrompt:
    """Stage-two prompt: ask the model to pick what in a retrieved section
    helps answer the question."""
    if not section_text.strip():
        raise ValueError("section_text must be non-empty")
    if not question.strip():
        raise ValueError("question must be non-empty")
    return RenderedPrompt(
        kind=PromptKind.KNOWLEDGE_SELECTION,
        text=SELECTION_TEMPLATE.format(section_text=section_text, question=question),
    )


def render_final_prompt(question: str, knowledge: str) -> RenderedPrompt:
    """Stage-three prompt: answer the original question from the compiled
    knowledge."""
    if not question.strip():
        raise ValueError("question must be non-empty")
    return RenderedPrompt(
        kind=PromptKind.FINAL_ANSWER,
        text=FINAL_TEMPLATE.format(question=question, knowledge=knowledge),
    )


def parse_keywords(llm_output: str) -> list[str]:
    """Split a keyword-extraction response into keywords.

    Strips an optional leading "Keywords:" label (case-insensitive), splits
    on commas, trims each item, drops empties, and preserves casing — the
    retriever lowercases later. Raises EmptyKeywordsError when nothing
    usable remains.
    """
    text = llm_output.strip()
    if text.lower().startswith("keywords:"):
        text = text[len("keywords:"):]
    keywords = [item.strip() for item in text.split(",")]
    keywords = [item for item in keywords if item]
    if not keywords:
        raise EmptyKeywordsError("no keywords in model output")
    return keywords
