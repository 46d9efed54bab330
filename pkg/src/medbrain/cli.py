"""Command-line surface: ingestion, one-shot asking, terminal chat, the
service, the dataset pipeline, and evaluation.

Exit codes follow the usual convention: 0 success, 1 operational
failure, 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import dataset, kb, metrics, pipeline, retrieval
from .errors import MedbrainError
from .gateway import RemoteBackend, ScriptedBackend
from .kb import KnowledgeSourceConfig
from .retrieval import RetrievalConfig
from .service import DISCLAIMER, ServiceConfig, answer_payload


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _knowledge_options(fn):
    fn = click.option(
        "--db", "db_paths", multiple=True, type=click.Path(exists=True),
        help="Disease database file (repeatable).",
    )(fn)
    fn = click.option(
        "--article", "article_paths", multiple=True, type=click.Path(exists=True),
        help="Plain-text article file to index (repeatable).",
    )(fn)
    fn = click.option("--scripted", type=click.Path(exists=True),
                      help="Scripted backend rules file.")(fn)
    fn = click.option("--remote", help="Remote chat-completion base URL.")(fn)
    fn = click.option("--model", help="Model name for the remote backend.")(fn)
    fn = click.option("--top-n", default=5, show_default=True, type=int)(fn)
    fn = click.option("--section-size", default=256, show_default=True, type=int)(fn)
    fn = click.option("--external-endpoint", help="Online article endpoint base URL.")(fn)
    return fn


def _build_runtime(db_paths, article_paths, scripted, remote, model,
                   top_n, section_size, external_endpoint):
    if not db_paths and not article_paths:
        raise _fail("no knowledge sources; pass --db and/or --article")
    if scripted and remote:
        raise _fail("pass either --scripted or --remote, not both")
    if not scripted and not remote:
        raise _fail("pick a backend: --scripted RULES or --remote URL --model NAME")
    if remote and not model:
        raise _fail("--remote needs --model")
    try:
        corpus = kb.load_corpus(db_paths)
        corpus.extend(kb.load_article(p) for p in article_paths)
        gateway = (
            ScriptedBackend.from_file(scripted) if scripted
            else RemoteBackend(remote, model)
        )
        cfg = RetrievalConfig(section_size=section_size, top_n=top_n)
    except (MedbrainError, ValueError, OSError) as exc:
        raise _fail(str(exc)) from exc
    sources = KnowledgeSourceConfig(
        external_endpoint=external_endpoint,
        external_enabled=external_endpoint is not None,
    )
    return corpus, gateway, cfg, sources


@click.group()
def main():
    """Medical question answering backed by a retrieval knowledge base."""


@main.command()
@click.option("--db", "db_paths", multiple=True, required=True,
              type=click.Path(exists=True))
@click.option("--section-size", default=256, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def ingest(db_paths, section_size, as_json):
    """Validate and index disease database files."""
    try:
        stats = []
        for path in db_paths:
            records = kb.load_disease_db(path)
            docs = [kb.record_to_document(r) for r in records]
            chunks = sum(
                len(retrieval.chunk_document(d, section_size)) for d in docs
            )
            stats.append({"path": str(path), "records": len(records), "chunks": chunks})
    except (MedbrainError, OSError) as exc:
        raise _fail(str(exc)) from exc
    if as_json:
        click.echo(json.dumps({"files": stats}))
        return
    for entry in stats:
        click.echo(
            f"{entry['path']}: {entry['records']} records, {entry['chunks']} sections"
        )


@main.command()
@click.argument("question")
@_knowledge_options
@click.option("--no-brain", is_flag=True, help="Skip retrieval, ask the model directly.")
@click.option("--json", "as_json", is_flag=True, help="Emit the full answer payload.")
def ask(question, no_brain, as_json, **knowledge):
    """Answer one question and print the answer."""
    corpus, gateway, cfg, sources = _build_runtime(**knowledge)
    try:
        if no_brain:
            answer = pipeline.answer_without_brain(question, gateway)
        else:
            answer = pipeline.answer_with_brain(question, corpus, cfg, gateway, sources)
    except (MedbrainError, ValueError) as exc:
        raise _fail(str(exc)) from exc
    if as_json:
        click.echo(json.dumps(answer_payload(answer), ensure_ascii=False))
        return
    click.echo(answer.text)
    if not answer.used_brain:
        click.echo("[unverified: answered from model prior knowledge]", err=True)


@main.command()
@_knowledge_options
def chat(**knowledge):
    """Interactive terminal chat; empty line or EOF ends the session."""
    corpus, gateway, cfg, sources = _build_runtime(**knowledge)
    session = pipeline.new_session()
    click.echo(DISCLAIMER)
    while True:
        try:
            question = click.prompt("you", default="", show_default=False)
        except (EOFError, click.Abort):
            break
        if not question.strip():
            break
        try:
            answer = pipeline.post_message(
                session, question, corpus=corpus, cfg=cfg,
                gateway=gateway, sources=sources,
            )
        except (MedbrainError, ValueError) as exc:
            raise _fail(str(exc)) from exc
        tag = "" if answer.used_brain else " [unverified]"
        click.echo(f"doctor{tag}: {answer.text}")
    click.echo(f"{len(session.turns)} turns.")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def serve(config_path):
    """Run the HTTP service."""
    from .service import serve as run_service

    try:
        config = ServiceConfig.from_file(config_path)
        run_service(config)
    except (MedbrainError, OSError) as exc:
        raise _fail(str(exc)) from exc


@main.command()
@click.argument("input_path", type=click.Path(exists=True))
@click.argument("output_path", type=click.Path())
@click.option("--min-doctor-chars", default=dataset.DEFAULT_MIN_DOCTOR_CHARS,
              show_default=True, type=int)
@click.option("--exclude", "exclude_path", type=click.Path(exists=True),
              help="File of dialogue ids to drop, one per line.")
@click.option("--json", "as_json", is_flag=True)
def clean(input_path, output_path, min_doctor_chars, exclude_path, as_json):
    """Filter short dialogues, apply exclusions, and anonymize the rest."""
    try:
        dialogues = dataset.read_dialogues(input_path)
        if exclude_path:
            ids = Path(exclude_path).read_text(encoding="utf-8").split()
            dialogues = dataset.apply_exclusions(dialogues, ids)
        kept, dropped = dataset.filter_short(dialogues, min_doctor_chars)
        cleaned = [
            dataset.Dialogue(
                id=d.id,
                patient_text=dataset.anonymize(d.patient_text),
                doctor_text=dataset.anonymize(d.doctor_text),
                specialty=d.specialty,
            )
            for d in kept
        ]
        dataset.write_dialogues(cleaned, output_path)
    except (MedbrainError, OSError, ValueError, KeyError) as exc:
        raise _fail(str(exc)) from exc
    summary = {"kept": len(cleaned), "dropped": len(dropped), "output": str(output_path)}
    click.echo(json.dumps(summary) if as_json
               else f"kept {len(cleaned)}, dropped {len(dropped)} -> {output_path}")


@main.command()
@click.argument("input_path", type=click.Path(exists=True))
@click.argument("output_path", type=click.Path())
@click.option("--instruction", default=dataset.DEFAULT_INSTRUCTION, show_default=False,
              help="Instruction text for every record.")
def convert(input_path, output_path, instruction):
    """Convert cleaned dialogues to instruction-tuning records."""
    try:
        dialogues = dataset.read_dialogues(input_path)
        records = [dataset.to_instruction_format(d, instruction) for d in dialogues]
        dataset.write_instruction_records(records, output_path)
    except (MedbrainError, OSError, ValueError, KeyError) as exc:
        raise _fail(str(exc)) from exc
    click.echo(f"wrote {len(records)} records -> {output_path}")


@main.command()
@click.argument("input_path", type=click.Path(exists=True))
@click.option("--train-out", required=True, type=click.Path())
@click.option("--test-out", required=True, type=click.Path())
@click.option("--test-fraction", default=0.1, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True)
def split(input_path, train_out, test_out, test_fraction, seed, as_json):
    """Stratified train/test split keyed on dialogue specialty."""
    try:
        dialogues = dataset.read_dialogues(input_path)
        train, test = dataset.stratified_split(dialogues, test_fraction, seed)
        dataset.write_dialogues(train, train_out)
        dataset.write_dialogues(test, test_out)
    except (MedbrainError, OSError, ValueError, KeyError) as exc:
        raise _fail(str(exc)) from exc
    summary = {"train": len(train), "test": len(test)}
    click.echo(json.dumps(summary) if as_json
               else f"train {len(train)} -> {train_out}; test {len(test)} -> {test_out}")


@main.command("train-config")
@click.option("--out", "out_path", type=click.Path(), default="train_config.txt",
              show_default=True)
@click.option("--total-batch-size", type=int)
@click.option("--learning-rate", type=float)
@click.option("--epochs", type=int)
@click.option("--max-sequence-length", type=int)
@click.option("--warmup-ratio", type=float)
@click.option("--weight-decay", type=float)
@click.option("--json", "as_json", is_flag=True)
def train_config(out_path, as_json, **overrides):
    """Emit the fine-tuning hyperparameter file (defaults unless overridden)."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        config = dataset.emit_train_config(out_path, **overrides)
    except (ValueError, OSError) as exc:
        raise _fail(str(exc)) from exc
    if as_json:
        click.echo(json.dumps(config.__dict__))
    else:
        click.echo(dataset.serialize_train_config(config), nl=False)
        click.echo(f"-> {out_path}")


@main.command("eval")
@click.option("--pairs-a", required=True, type=click.Path(exists=True),
              help="JSONL of {id, candidate, reference} for system A.")
@click.option("--pairs-b", required=True, type=click.Path(exists=True),
              help="Same references, candidates from system B.")
@click.option("--label-a", default="system_a", show_default=True)
@click.option("--label-b", default="system_b", show_default=True)
@click.option("--embedding-endpoint",
              help="Remote embedding service base URL (default: one-hot test provider).")
@click.option("--out", "out_path", type=click.Path(),
              help="Write the machine-readable report here.")
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
def eval_cmd(pairs_a, pairs_b, label_a, label_b, embedding_endpoint, out_path, as_json):
    """Score two systems against shared references and compare them."""
    try:
        rows_a = metrics.read_pairs_jsonl(pairs_a)
        rows_b = metrics.read_pairs_jsonl(pairs_b)
        provider = (
            metrics.RemoteEmbeddingProvider(embedding_endpoint)
            if embedding_endpoint else metrics.OneHotTestProvider()
        )
        report = metrics.evaluate_run(
            [(c, r) for _, c, r in rows_a],
            [(c, r) for _, c, r in rows_b],
            provider,
            label_a=label_a,
            label_b=label_b,
        )
    except (MedbrainError, OSError, ValueError, KeyError) as exc:
        raise _fail(str(exc)) from exc
    payload = metrics.report_dict(report)
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if as_json:
        click.echo(json.dumps(payload))
    else:
        click.echo(metrics.report_text(report), nl=False)


if __name__ == "__main__":
    sys.exit(main())
