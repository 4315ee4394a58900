"""Command line entry points: itemize one filing, evaluate, train, serve.

Exit codes for `itemize`: 0 on success, 2 when no item structure survives,
3 on input errors (bad reference, unreachable filing, broken config).
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .dictionary import KeywordDictionary, default_dictionary, load_dictionary
from .docmodel import parse_filing
from .errors import TenkError
from .evaluation import (
    EvalReport,
    WindowReport,
    evaluate_corpus,
    scorer_window_report,
)
from .ingest import DEFAULT_RATE_LIMIT, FilingFetcher, FilingRef
from .pipeline import (
    PIPELINE_VERSION,
    ItemizedFiling,
    ScoringMode,
    detect_fiscal_year,
    run_pipeline,
    train_default_scorer,
)
from .reconstructor import DEFAULT_SKIP_PENALTY
from .scorer import CandidateScorer, ExternalScorerConfig, LabeledCandidate, Provenance
from .synth import EVALUATION_CONFIG, generate_corpus

OUTPUT_SCHEMA_VERSION = "tenk-itemized/1"

EXIT_OK = 0
EXIT_NO_STRUCTURE = 2
EXIT_INPUT_ERROR = 3


def _load_dict(path: str | None) -> KeywordDictionary:
    return load_dictionary(path) if path else default_dictionary()


def _load_scorer(model_path: str | None, dictionary: KeywordDictionary) -> CandidateScorer:
    """Saved model when available; otherwise train one (and save it if asked)."""
    if model_path and Path(model_path).exists():
        return CandidateScorer.load(model_path)
    click.echo("no saved model, training the default scorer...", err=True)
    scorer = train_default_scorer(dictionary)
    if model_path:
        scorer.save(model_path)
        click.echo(f"saved model to {model_path}", err=True)
    return scorer


def _resolve_ref(ref: str) -> FilingRef:
    if ref.startswith(("http://", "https://")):
        return FilingRef(url=ref)
    path = Path(ref)
    if path.exists():
        return FilingRef(path=path)
    return FilingRef.from_accession(ref)


def _itemized_payload(result: ItemizedFiling, doc, dictionary: KeywordDictionary) -> dict:
    flagged = {item for item, _ in result.reconstruction.flagged}
    segments = {s.item: s for s in result.segments}
    items = []
    for a in result.reconstruction.structure.assignments:
        seg = segments[a.item]
        items.append(
            {
                "item": a.item.label,
                "part": a.item.part,
                "key": seg.key,
                "title": dictionary.title_for(a.item),
                "offset": a.offset,
                "end_offset": seg.end_offset,
                "probability": round(a.probability, 6),
                "flagged": a.item in flagged,
                "text": seg.text,
            }
        )
    return {
        "schema_version": OUTPUT_SCHEMA_VERSION,
        "serial": result.serial,
        "pipeline_version": result.pipeline_version,
        "format": doc.format.value,
        "fiscal_year": detect_fiscal_year(doc),
        "score": round(result.structure_score, 6),
        "needs_review": result.needs_review,
        "items": items,
        "skipped": [i.label for i in result.reconstruction.structure.skipped_items],
    }


def _trace_payload(result: ItemizedFiling, threshold: float, skip_penalty: float) -> dict:
    toc = result.reconstruction.toc
    selected = {
        (a.item, a.offset) for a in result.reconstruction.structure.assignments
    }
    flagged = {item for item, _ in result.reconstruction.flagged}
    candidates = []
    for c in result.candidates:
        sig = c.signature
        candidates.append(
            {
                "item": c.item.label,
                "offset": c.offset,
                "matched_text": c.matched_text,
                "match_kind": c.match_kind.value,
                "score": c.score,
                "signature": None if sig is None else dataclasses.asdict(sig),
                "in_toc": toc is not None and toc.contains(c.offset),
                "selected": (c.item, c.offset) in selected,
                "flagged": (c.item, c.offset) in selected and c.item in flagged,
            }
        )
    return {
        "serial": result.serial,
        "pipeline_version": result.pipeline_version,
        "threshold": threshold,
        "skip_penalty": skip_penalty,
        "toc": None
        if toc is None
        else {"start_offset": toc.start_offset, "end_offset": toc.end_offset},
        "candidates": candidates,
    }


def _eval_payload(report: EvalReport) -> dict:
    return {
        "mode": report.mode,
        "n_docs": report.n_docs,
        "docs_passed": report.docs_passed,
        "docs_failed": report.docs_failed,
        "docs_no_structure": report.docs_no_structure,
        "retrieval_rate": report.retrieval_rate,
        "candidates_correct": report.candidates_correct,
        "candidates_incorrect": report.candidates_incorrect,
        "gold_total": report.gold_total,
        "precision": report.precision,
        "recall": report.recall,
        "failures": {
            "missing": report.failures_missing,
            "spurious": report.failures_spurious,
            "offset": report.failures_offset,
        },
        "runtime_seconds": report.runtime_seconds,
        "per_item": {
            label: {"correct": s.correct, "gold": s.gold, "predicted": s.predicted}
            for label, s in sorted(report.per_item.items())
        },
        "failed_serials": [j.serial for j in report.judgments if not j.passed],
    }


def _window_payload(report: WindowReport) -> dict:
    return {
        "mode": "scorer",
        "n_windows": report.n_windows,
        "true_positives": report.true_positives,
        "false_positives": report.false_positives,
        "false_negatives": report.false_negatives,
        "true_negatives": report.true_negatives,
        "precision": report.precision,
        "recall": report.recall,
    }


@click.group()
@click.version_option(version=PIPELINE_VERSION, prog_name="tenk")
def main() -> None:
    """Form 10-K itemization: split filings into their canonical items."""


@main.command()
@click.argument("ref")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write the itemized JSON here instead of stdout.")
@click.option("--trace", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Dump the full candidate/decision trace to this file.")
@click.option("--cache-dir", default="tenk-cache", show_default=True,
              help="Directory for downloaded filings.")
@click.option("--user-agent", default=None, help="User-Agent for EDGAR requests.")
@click.option("--rate-limit", default=DEFAULT_RATE_LIMIT, show_default=True,
              help="Max EDGAR requests per second.")
@click.option("--dictionary", "dictionary_path", default=None,
              help="Alias dictionary YAML (defaults to the bundled one).")
@click.option("--model-path", default=None,
              help="Scorer model file; trained and saved here when missing.")
@click.option("--threshold", default=0.5, show_default=True,
              help="Accept threshold; boundaries under it are flagged for review.")
@click.option("--skip-penalty", default=DEFAULT_SKIP_PENALTY, show_default=True,
              help="Log-odds cost of declaring an item absent.")
@click.option("--external-scorer-url", default=None,
              help="HTTP scorer endpoint; falls back to the built-in model on failure.")
@click.option("--rule-only", is_flag=True, help="Skip the scorer; keyword rules alone.")
def itemize(
    ref: str,
    out: Path | None,
    trace: Path | None,
    cache_dir: str,
    user_agent: str | None,
    rate_limit: float,
    dictionary_path: str | None,
    model_path: str | None,
    threshold: float,
    skip_penalty: float,
    external_scorer_url: str | None,
    rule_only: bool,
) -> None:
    """Itemize one filing: REF is an EDGAR URL, accession number, or local file."""
    try:
        filing_ref = _resolve_ref(ref)
        dictionary = _load_dict(dictionary_path)
        fetcher = FilingFetcher(cache_dir, user_agent=user_agent, rate_limit=rate_limit)
        raw = fetcher.fetch(filing_ref)
        doc = parse_filing(raw)
        if rule_only:
            scorer, mode = None, ScoringMode.RULE_ONLY
        else:
            scorer, mode = _load_scorer(model_path, dictionary), ScoringMode.FULL
        external = (
            ExternalScorerConfig(url=external_scorer_url) if external_scorer_url else None
        )
        result = run_pipeline(
            doc,
            dictionary,
            scorer=scorer,
            mode=mode,
            skip_penalty=skip_penalty,
            threshold=threshold,
            external=external,
        )
    except (TenkError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)

    payload = _itemized_payload(result, doc, dictionary)
    rendered = json.dumps(payload, indent=2) + "\n"
    if out is not None:
        out.write_text(rendered, encoding="utf-8")
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(rendered, nl=False)
    if trace is not None:
        trace.write_text(
            json.dumps(_trace_payload(result, threshold, skip_penalty), indent=2) + "\n",
            encoding="utf-8",
        )
        click.echo(f"wrote trace {trace}", err=True)
    if result.reconstruction.is_empty:
        click.echo(f"no item structure found in {result.serial}", err=True)
        sys.exit(EXIT_NO_STRUCTURE)


@main.command("eval")
@click.option("--seed", default=EVALUATION_CONFIG.seed, show_default=True,
              help="Corpus generator seed.")
@click.option("--docs", default=EVALUATION_CONFIG.n_docs, show_default=True,
              help="Number of synthetic documents.")
@click.option("--mode", type=click.Choice(["full", "rule", "scorer"]), default="full",
              show_default=True, help="Pipeline variant under evaluation.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Write the JSON report here.")
@click.option("--tolerance", default=0, show_default=True,
              help="Allowed start-offset error in characters.")
@click.option("--windows", default=1000, show_default=True,
              help="Random probe positions for scorer mode.")
@click.option("--dictionary", "dictionary_path", default=None)
@click.option("--model-path", default=None)
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--skip-penalty", default=DEFAULT_SKIP_PENALTY, show_default=True)
def eval_command(
    seed: int,
    docs: int,
    mode: str,
    report_path: Path | None,
    tolerance: int,
    windows: int,
    dictionary_path: str | None,
    model_path: str | None,
    threshold: float,
    skip_penalty: float,
) -> None:
    """Judge the pipeline against a synthetic gold corpus."""
    try:
        dictionary = _load_dict(dictionary_path)
        config = dataclasses.replace(EVALUATION_CONFIG, seed=seed, n_docs=docs)
        corpus = generate_corpus(config, dictionary.entries)
        scorer = (
            _load_scorer(model_path, dictionary) if mode in ("full", "scorer") else None
        )
        if mode == "scorer":
            window = scorer_window_report(
                corpus, dictionary, scorer, n_windows=windows, seed=seed
            )
            payload = _window_payload(window)
            summary = (
                f"mode=scorer windows={window.n_windows} "
                f"precision={window.precision:.3f} recall={window.recall:.3f}"
            )
        else:
            scoring = ScoringMode.FULL if mode == "full" else ScoringMode.RULE_ONLY
            report = evaluate_corpus(
                corpus,
                dictionary,
                scorer,
                scoring,
                tolerance_chars=tolerance,
                skip_penalty=skip_penalty,
                threshold=threshold,
            )
            payload = _eval_payload(report)
            summary = (
                f"mode={mode} docs={report.n_docs} passed={report.docs_passed} "
                f"retrieval={report.retrieval_rate:.3f} "
                f"runtime={report.runtime_seconds:.1f}s"
            )
    except (TenkError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    click.echo(summary)
    if report_path is not None:
        report_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        click.echo(f"wrote report {report_path}", err=True)


@main.command()
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Where to save the trained model.")
@click.option("--dictionary", "dictionary_path", default=None)
@click.option("--labels", "labels_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSONL of expert review labels to train on as well.")
def train(out: Path, dictionary_path: str | None, labels_path: str | None) -> None:
    """Train the candidate scorer and save it."""
    try:
        dictionary = _load_dict(dictionary_path)
        extra: list[LabeledCandidate] = []
        if labels_path:
            for line in Path(labels_path).read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                extra.append(
                    LabeledCandidate(
                        features=tuple(float(v) for v in rec["features"]),
                        label=bool(rec["label"]),
                        provenance=Provenance(rec.get("provenance", "expert_review")),
                    )
                )
        scorer = train_default_scorer(dictionary, extra_samples=extra)
        scorer.save(out)
    except (TenkError, OSError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    click.echo(
        f"trained on {scorer.trained_on_} candidates"
        + (f" ({len(extra)} from expert review)" if extra else "")
        + f", saved to {out}"
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Service config YAML; TENK_* env vars override it.")
@click.option("--host", default=None, help="Bind address override.")
@click.option("--port", default=None, type=int, help="Port override.")
def serve(config_path: str | None, host: str | None, port: int | None) -> None:
    """Run the itemization HTTP service."""
    import uvicorn

    from .service import create_app, load_config

    try:
        config = load_config(config_path)
        if host is not None:
            config = dataclasses.replace(config, host=host)
        if port is not None:
            config = dataclasses.replace(config, port=port)
        app = create_app(config)
    except (TenkError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    uvicorn.run(app, host=config.host, port=config.port)


if __name__ == "__main__":
    main()
