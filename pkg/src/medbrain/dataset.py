"""Dialogue corpus cleaning and instruction-tuning conversion.

Raw patient-doctor exchanges arrive as JSON Lines; they get length-
filtered, scrubbed of identifying details, converted to
(instruction, input, output) records, and split into stratified
train/test sets. The training hyperparameters travel as a flat
key-value config file.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_INSTRUCTION = (
    "If you are a doctor, please answer the medical questions based on "
    "the patient's description."
)

DEFAULT_MIN_DOCTOR_CHARS = 100


@dataclass(frozen=True)
class Dialogue:
    id: str
    patient_text: str
    doctor_text: str
    specialty: str | None = None


@dataclass(frozen=True)
class InstructionRecord:
    instruction: str
    input: str
    output: str


@dataclass(frozen=True)
class TrainConfig:
    total_batch_size: int = 192
    learning_rate: float = 2e-5
    epochs: int = 3
    max_sequence_length: int = 512
    warmup_ratio: float = 0.03
    weight_decay: float = 0.0

    def __post_init__(self):
        if self.total_batch_size <= 0:
            raise ValueError("total_batch_size must be positive")
        if self.epochs <= 0:
            raise ValueError("epochs must be positive")


def filter_short(
    dialogues: Sequence[Dialogue], min_doctor_chars: int = DEFAULT_MIN_DOCTOR_CHARS
) -> tuple[list[Dialogue], list[Dialogue]]:
    """Partition into (kept, dropped) by trimmed doctor-reply length,
    preserving order. Short replies rarely answer anything of substance."""
    if min_doctor_chars < 0:
        raise ValueError("min_doctor_chars must be >= 0")
    kept, dropped = [], []
    for d in dialogues:
        (kept if len(d.doctor_text.strip()) >= min_doctor_chars else dropped).append(d)
    return kept, dropped


# One combined pattern so scrubbing happens in a single pass; alternation
# order makes emails win over the phone pattern at the same position.
_SCRUB_RE = re.compile(
    r"(?P<email>[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})"
    r"|(?P<url>(?:https?://|www\.)\S+)"
    r"|(?P<phone>(?<![A-Za-z0-9])[+(]?\d(?:[\s().-]{0,2}\d){6,}(?![A-Za-z0-9]))"
    r"|(?P<doctor>(?:Dr\.|Doctor)\s+[A-Z][A-Za-z]*(?:\s+[A-Z][A-Za-z]*)*)"
)

_SCRUB_REPLACEMENTS = {
    "email": "[EMAIL]",
    "url": "[URL]",
    "phone": "[PHONE]",
    "doctor": "Dr. [NAME]",
}


def anonymize(text: str) -> str:
    """Remove identifying details: email addresses, URLs, phone-like digit
    runs (7+ digits with optional separators), and honorific-plus-name
    mentions. Everything else is left untouched; idempotent."""

    def replace(match: re.Match) -> str:
        return _SCRUB_REPLACEMENTS[match.lastgroup]

    return _SCRUB_RE.sub(replace, text)


def grammar_pass(text: str) -> str:
    """Hook for an external grammar-correction tool; intentionally a no-op."""
    return text


def apply_exclusions(
    dialogues: Sequence[Dialogue], excluded_ids: Iterable[str]
) -> list[Dialogue]:
    """Drop dialogues whose ids appear on a manually curated exclusion list."""
    excluded = set(excluded_ids)
    return [d for d in dialogues if d.id not in excluded]


def to_instruction_format(
    dialogue: Dialogue, instruction_text: str = DEFAULT_INSTRUCTION
) -> InstructionRecord:
    """Map a cleaned dialogue onto an (instruction, input, output) record.
    Patient and doctor text pass through byte-for-byte."""
    if not dialogue.patient_text:
        raise ValueError("patient_text must be non-empty")
    if not dialogue.doctor_text:
        raise ValueError("doctor_text must be non-empty")
    return InstructionRecord(
        instruction=instruction_text,
        input=dialogue.patient_text,
        output=dialogue.doctor_text,
    )


def stratified_split(
    dialogues: Sequence[Dialogue], test_fraction: float, seed: int
) -> tuple[list[Dialogue], list[Dialogue]]:
    """Draw a test split so every specialty is proportionally represented.

    Per stratum of size s the test set receives round-half-up
    (test_fraction * s) records, chosen by one seeded Mersenne Twister
    shuffle with strata visited in sorted key order. Records missing a
    specialty fall into the "unknown" stratum. Outputs preserve input
    order; (train, test) is an exact partition of the input.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    strata: dict[str, list[int]] = {}
    for i, d in enumerate(dialogues):
        strata.setdefault(d.specialty or "unknown", []).append(i)
    rng = random.Random(seed)
    test_indices: set[int] = set()
    for key in sorted(strata):
        indices = list(strata[key])
        rng.shuffle(indices)
        take = math.floor(test_fraction * len(indices) + 0.5)
        test_indices.update(indices[:take])
    train = [d for i, d in enumerate(dialogues) if i not in test_indices]
    test = [d for i, d in enumerate(dialogues) if i in test_indices]
    return train, test


# --- file formats ---------------------------------------------------------


def parse_dialogues_jsonl(text: str) -> list[Dialogue]:
    """One JSON object per line: {id, patient_text, doctor_text, specialty?}."""
    dialogues = []
    for line in text.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        dialogues.append(
            Dialogue(
                id=str(obj["id"]),
                patient_text=obj["patient_text"],
                doctor_text=obj["doctor_text"],
                specialty=obj.get("specialty"),
            )
        )
    return dialogues


def read_dialogues(path: str | Path) -> list[Dialogue]:
    return parse_dialogues_jsonl(Path(path).read_text(encoding="utf-8"))


def write_dialogues(dialogues: Sequence[Dialogue], path: str | Path) -> None:
    lines = []
    for d in dialogues:
        obj = {"id": d.id, "patient_text": d.patient_text, "doctor_text": d.doctor_text}
        if d.specialty is not None:
            obj["specialty"] = d.specialty
        lines.append(json.dumps(obj, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def write_instruction_records(
    records: Sequence[InstructionRecord], path: str | Path
) -> None:
    """Instruction-tuning file shape: a JSON array of
    {instruction, input, output} objects."""
    data = [
        {"instruction": r.instruction, "input": r.input, "output": r.output}
        for r in records
    ]
    Path(path).write_text(
        json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def read_instruction_records(path: str | Path) -> list[InstructionRecord]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [InstructionRecord(**obj) for obj in data]


def serialize_train_config(config: TrainConfig) -> str:
    """Flat key-value text, keys exactly the TrainConfig field names."""
    return "".join(
        f"{f.name} = {getattr(config, f.name)!r}\n" for f in fields(TrainConfig)
    )


def parse_train_config(text: str) -> TrainConfig:
    values: dict[str, float | int] = {}
    types = {f.name: f.type for f in fields(TrainConfig)}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in types:
            raise ValueError(f"unknown train-config key {key!r}")
        values[key] = int(raw) if types[key] == "int" else float(raw)
    return TrainConfig(**values)


def emit_train_config(path: str | Path | None = None, **overrides) -> TrainConfig:
    """Materialize the training configuration (defaults unless overridden)
    and optionally write it to a file."""
    config = TrainConfig(**overrides)
    if path is not None:
        Path(path).write_text(serialize_train_config(config), encoding="utf-8")
    return config
