"""Embedding-based greedy-match P/R/F1 and paired significance testing.

For every token on one side, take the best cosine similarity against the
other side and average: candidate-side averages give precision,
reference-side averages give recall. No idf weighting and no baseline
rescaling. Correctness tests run on the deterministic one-hot provider;
production scoring can use a remote embedding service.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import httpx
import numpy as np
from scipy.special import betainc

from .errors import ProtocolError, TransportError
from .retrieval import tokenize

METRIC_NAMES = ("precision", "recall", "f1")


class EmbeddingProvider(Protocol):
    """Maps tokens to unit vectors; output row order matches input order."""

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        ...


class OneHotTestProvider:
    """Deterministic test provider: equal tokens map to identical basis
    vectors, distinct tokens to orthogonal ones, so every cosine is exactly
    0 or 1 and the metric is exactly checkable."""

    def __init__(self, dimension: int = 4096):
        self.dimension = dimension
        self._vocab: dict[str, int] = {}

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(tokens), self.dimension))
        for row, token in enumerate(tokens):
            index = self._vocab.setdefault(token, len(self._vocab))
            if index >= self.dimension:
                raise ValueError("one-hot vocabulary exceeded provider dimension")
            out[row, index] = 1.0
        return out


class RemoteEmbeddingProvider:
    """Client for an embedding service: POST {base}/v1/embeddings with
    {"input": [tokens...]}; response vectors come back in input order and
    are normalized to unit length here."""

    def __init__(self, base_url: str, *, timeout: float = 30.0,
                 client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._client = client

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        payload = {"input": list(tokens)}
        url = f"{self.base_url}/v1/embeddings"
        try:
            if self._client is not None:
                resp = self._client.post(url, json=payload, timeout=self.timeout)
            else:
                resp = httpx.post(url, json=payload, timeout=self.timeout)
        except httpx.HTTPError as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProtocolError(f"embedding service returned {resp.status_code}")
        try:
            vectors = np.asarray(
                [entry["embedding"] for entry in resp.json()["data"]], dtype=float
            )
        except (ValueError, LookupError, TypeError) as exc:
            raise ProtocolError(f"malformed embedding response: {exc}") from exc
        if vectors.shape[0] != len(tokens):
            raise ProtocolError("embedding count does not match token count")
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ProtocolError("embedding service returned a zero vector")
        return vectors / norms


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float  # sample (n-1) standard deviation; 0 for a single value

    def display(self) -> str:
        return f"{self.mean:.4f}±{self.std:.4f}"


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p_value: float
    degenerate: bool = False


@dataclass(frozen=True)
class MetricComparison:
    system_a: MetricSummary
    system_b: MetricSummary
    t_test: TTestResult | None  # None when fewer than two pairs


@dataclass(frozen=True)
class EvalReport:
    n_pairs: int
    label_a: str
    label_b: str
    metrics: dict[str, MetricComparison]


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def greedy_match_scores(
    candidate_tokens: Sequence[str],
    reference_tokens: Sequence[str],
    provider: EmbeddingProvider,
) -> ScoreTriple:
    """Greedy token matching via cosine similarity.

    recall = mean over reference tokens of the max similarity to any
    candidate token; precision the same with roles swapped.
    """
    if not candidate_tokens:
        raise ValueError("candidate tokens must be non-empty")
    if not reference_tokens:
        raise ValueError("reference tokens must be non-empty")
    cand = provider.embed(candidate_tokens)
    ref = provider.embed(reference_tokens)
    sim = cand @ ref.T  # unit vectors, so dot products are cosines
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    return ScoreTriple(precision=precision, recall=recall, f1=f1_score(precision, recall))


def score_pairs(
    pairs: Sequence[tuple[str, str]], provider: EmbeddingProvider
) -> list[ScoreTriple]:
    """Score (candidate, reference) text pairs; texts are tokenized the same
    way as retrieval input."""
    return [
        greedy_match_scores(tokenize(candidate), tokenize(reference), provider)
        for candidate, reference in pairs
    ]


def mean_std(values: Sequence[float]) -> MetricSummary:
    if not values:
        raise ValueError("at least one value required")
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return MetricSummary(mean=mean, std=std)


def aggregate(triples: Sequence[ScoreTriple]) -> dict[str, MetricSummary]:
    if not triples:
        raise ValueError("at least one score triple required")
    return {
        name: mean_std([getattr(t, name) for t in triples]) for name in METRIC_NAMES
    }


def t_cdf(x: float, df: int) -> float:
    """Student's t cumulative distribution via the regularized incomplete
    beta function. Exactly symmetric: t_cdf(x) + t_cdf(-x) == 1."""
    if df < 1:
        raise ValueError("df must be >= 1")
    tail = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + x * x)))
    return tail if x < 0 else 1.0 - tail


def paired_t_test(
    series_a: Sequence[float], series_b: Sequence[float]
) -> TTestResult:
    """Two-tailed paired t-test on per-item differences a_i - b_i.

    When every difference is identical the statistic is undefined; the
    result is flagged degenerate with p = 1 for zero mean difference and
    p = 0 otherwise.
    """
    if len(series_a) != len(series_b):
        raise ValueError("paired series must have equal length")
    n = len(series_a)
    if n < 2:
        raise ValueError("paired t-test needs at least two pairs")
    diffs = [a - b for a, b in zip(series_a, series_b)]
    mean_d = statistics.fmean(diffs)
    sd = statistics.stdev(diffs)
    df = n - 1
    if sd == 0:
        if mean_d == 0:
            return TTestResult(t=0.0, df=df, p_value=1.0, degenerate=True)
        return TTestResult(
            t=math.copysign(math.inf, mean_d), df=df, p_value=0.0, degenerate=True
        )
    t = mean_d / (sd / math.sqrt(n))
    p = 2.0 * t_cdf(-abs(t), df)
    return TTestResult(t=t, df=df, p_value=p, degenerate=False)


def evaluate_run(
    pairs_a: Sequence[tuple[str, str]],
    pairs_b: Sequence[tuple[str, str]],
    provider: EmbeddingProvider,
    *,
    label_a: str = "system_a",
    label_b: str = "system_b",
) -> EvalReport:
    """Score two systems against the same references and compare them.

    Both pair lists must carry identical references in identical order;
    the report holds per-metric mean±std for each system plus the paired
    t-test over the per-pair score series.
    """
    if [r for _, r in pairs_a] != [r for _, r in pairs_b]:
        raise ValueError("both systems must be evaluated against identical references")
    triples_a = score_pairs(pairs_a, provider)
    triples_b = score_pairs(pairs_b, provider)
    agg_a = aggregate(triples_a)
    agg_b = aggregate(triples_b)
    metrics = {}
    for name in METRIC_NAMES:
        series_a = [getattr(t, name) for t in triples_a]
        series_b = [getattr(t, name) for t in triples_b]
        t_test = paired_t_test(series_a, series_b) if len(series_a) >= 2 else None
        metrics[name] = MetricComparison(
            system_a=agg_a[name], system_b=agg_b[name], t_test=t_test
        )
    return EvalReport(
        n_pairs=len(pairs_a), label_a=label_a, label_b=label_b, metrics=metrics
    )


_METRIC_DISPLAY = {"precision": "Precision", "recall": "Recall", "f1": "F1 Score"}


def report_text(report: EvalReport) -> str:
    """Plain-text comparison table: metric rows, one column per system plus
    the paired-test p-value."""
    header = f"{'':<12}{report.label_a:<18}{report.label_b:<18}{'P-value'}"
    lines = [header]
    for name in METRIC_NAMES:
        comparison = report.metrics[name]
        p = f"{comparison.t_test.p_value:.3g}" if comparison.t_test else "n/a"
        lines.append(
            f"{_METRIC_DISPLAY[name]:<12}"
            f"{comparison.system_a.display():<18}"
            f"{comparison.system_b.display():<18}"
            f"{p}"
        )
    lines.append(f"pairs: {report.n_pairs}")
    return "\n".join(lines) + "\n"


def report_dict(report: EvalReport) -> dict:
    out = {"pairs": report.n_pairs, "labels": [report.label_a, report.label_b], "metrics": {}}
    for name, comparison in report.metrics.items():
        entry = {
            report.label_a: {"mean": comparison.system_a.mean, "std": comparison.system_a.std},
            report.label_b: {"mean": comparison.system_b.mean, "std": comparison.system_b.std},
        }
        if comparison.t_test is not None:
            entry["t_test"] = {
                "t": comparison.t_test.t,
                "df": comparison.t_test.df,
                "p_value": comparison.t_test.p_value,
                "degenerate": comparison.t_test.degenerate,
            }
        out["metrics"][name] = entry
    return out


def read_pairs_jsonl(path: str | Path) -> list[tuple[str, str, str]]:
    """Pair input, one {id, candidate, reference} object per line."""
    pairs = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        pairs.append((str(obj["id"]), obj["candidate"], obj["reference"]))
    return pairs
