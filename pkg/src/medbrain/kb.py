"""Offline disease database and pluggable external article source.

The on-disk database is hand-editable UTF-8 text: records separated by
blank lines, fields as "Label: value" lines. A field's value runs until
the next known label or the record separator; lines that start with an
unknown label are kept as continuation text of the open field.
"""

from __future__ import annotations

import urllib.parse
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import httpx

from .errors import DiseaseDbParseError, NotFoundError, TransportError

FIELD_LABELS = {
    "Disease:": "name",
    "Symptoms:": "symptoms",
    "Further test:": "further_tests",
    "Treatment:": "treatments",
}


@dataclass(frozen=True)
class DiseaseRecord:
    """One entry of the offline knowledge base."""

    name: str
    symptoms: str = ""
    further_tests: str = ""
    treatments: str = ""

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("disease name must be non-empty")


class SourceKind(str, Enum):
    OFFLINE_DB = "offline_db"
    EXTERNAL_ARTICLE = "external_article"


@dataclass(frozen=True)
class Document:
    """Uniform unit fed to the retriever, regardless of origin."""

    doc_id: str
    title: str
    body: str
    source_kind: SourceKind

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if not self.body:
            raise ValueError("document body must be non-empty")


@dataclass(frozen=True)
class KnowledgeSourceConfig:
    """Where knowledge comes from: offline database files plus an optional
    online article endpoint."""

    offline_db_paths: tuple[str, ...] = ()
    external_endpoint: str | None = None
    external_enabled: bool = False

    def __post_init__(self):
        if self.external_enabled and not self.external_endpoint:
            raise ValueError("external_enabled requires external_endpoint")


def parse_disease_db(text: str) -> list[DiseaseRecord]:
    """Parse full database file contents into records, in file order.

    Raises DiseaseDbParseError (with a 1-based line number) for a block
    with no "Disease:" label, a duplicated label within a block, or
    text appearing before the block's first label.
    """
    records = []
    lines = text.splitlines()
    block: list[tuple[int, str]] = []

    def flush(block: list[tuple[int, str]]):
        if not block:
            return
        fields: dict[str, str] = {}
        current: str | None = None
        for lineno, line in block:
            label = _match_label(line)
            if label is not None:
                attr = FIELD_LABELS[label]
                if attr in fields:
                    raise DiseaseDbParseError(f"duplicate {label!r} field", lineno)
                value = line[len(label):]
                if value.startswith(" "):
                    value = value[1:]
                fields[attr] = value
                current = attr
            elif current is not None:
                fields[current] += "\n" + line
            else:
                raise DiseaseDbParseError(
                    "text before the first field label", lineno
                )
        if "name" not in fields:
            raise DiseaseDbParseError('block missing "Disease:" label', block[0][0])
        try:
            records.append(DiseaseRecord(**fields))
        except ValueError as exc:
            raise DiseaseDbParseError(str(exc), block[0][0]) from None

    for lineno, line in enumerate(lines, start=1):
        if line.strip():
            block.append((lineno, line))
        else:
            flush(block)
            block = []
    flush(block)
    return records


def _match_label(line: str) -> str | None:
    for label in FIELD_LABELS:
        if line.startswith(label):
            return label
    return None


def serialize_disease_db(records: Iterable[DiseaseRecord]) -> str:
    """Normalized file form: every label, a single space, the field text,
    one blank line between records. parse(serialize(records)) == records."""
    blocks = [
        f"Disease: {r.name}\n"
        f"Symptoms: {r.symptoms}\n"
        f"Further test: {r.further_tests}\n"
        f"Treatment: {r.treatments}"
        for r in records
    ]
    return "\n\n".join(blocks) + "\n" if blocks else ""


def load_disease_db(path: str | Path) -> list[DiseaseRecord]:
    return parse_disease_db(Path(path).read_text(encoding="utf-8"))


def slugify(name: str) -> str:
    return name.strip().lower().replace(" ", "-")


def record_to_document(record: DiseaseRecord) -> Document:
    """Flatten a record into a retrievable document. doc_id is derived from
    the name (lowercased, spaces to hyphens) so results are stable across runs."""
    body = (
        f"Disease: {record.name}\n"
        f"Symptoms: {record.symptoms}\n"
        f"Further test: {record.further_tests}\n"
        f"Treatment: {record.treatments}"
    )
    return Document(
        doc_id=slugify(record.name),
        title=record.name,
        body=body,
        source_kind=SourceKind.OFFLINE_DB,
    )


def load_corpus(paths: Sequence[str | Path]) -> list[Document]:
    """Load one or more database files into a retrieval corpus, file order
    preserved."""
    return [record_to_document(r) for p in paths for r in load_disease_db(p)]


def load_article(path: str | Path) -> Document:
    """Load a locally stored plain-text article as a retrievable document;
    doc_id derives from the file stem."""
    path = Path(path)
    return Document(
        doc_id=path.stem.lower().replace("_", "-").replace(" ", "-"),
        title=path.stem,
        body=path.read_text(encoding="utf-8"),
        source_kind=SourceKind.EXTERNAL_ARTICLE,
    )


def fetch_external_article(
    query: str,
    cfg: KnowledgeSourceConfig,
    *,
    timeout: float = 10.0,
    client: httpx.Client | None = None,
) -> Document:
    """Fetch one plain-text article for ``query`` from the configured endpoint.

    GET {base}/article?q={query}; 200 body is the article text, 404 raises
    NotFoundError (caller falls back to offline sources), network failures
    raise TransportError. Never touches local stores.
    """
    if not query:
        raise ValueError("query must be non-empty")
    if not cfg.external_enabled:
        raise ValueError("external source is not enabled")
    url = f"{cfg.external_endpoint.rstrip('/')}/article?q={urllib.parse.quote(query)}"
    try:
        if client is not None:
            resp = client.get(url, timeout=timeout)
        else:
            resp = httpx.get(url, timeout=timeout)
    except httpx.HTTPError as exc:
        raise TransportError(f"external article fetch failed: {exc}") from exc
    if resp.status_code == 404:
        raise NotFoundError(f"no article for query {query!r}")
    if resp.status_code != 200:
        raise TransportError(
            f"external endpoint returned status {resp.status_code}"
        )
    return Document(
        doc_id=f"external-{slugify(query)}",
        title=query,
        body=resp.text,
        source_kind=SourceKind.EXTERNAL_ARTICLE,
    )
