from __future__ import annotations

import io
import json
import logging
import sys
import time
from collections.abc import Callable
from pathlib import Path

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from venmo_latent.config import GridDefaults, LatentConfig
from venmo_latent.corpus import (
    LoadResult,
    dump_transactions,
    filter_min_posts,
    group_by_user,
    read_transactions,
    user_ids_from_transactions,
)
from venmo_latent.errors import ConfigError, LatentError, MissingLabels
from venmo_latent.features import ContentDetector, featurize_corpus, write_features_csv
from venmo_latent.label import (
    LabeledUser,
    LabelTask,
    build_labeled_dataset,
    extract_first_name,
    guess_gender,
    label_breakdown,
    load_name_corpus,
    load_political_labels,
    read_labels,
    write_labels,
)
from venmo_latent.models import Corpus, Transaction
from venmo_latent.utils import atomic_write_json, atomic_write_text, stage_seeds

app = typer.Typer(help="Infer latent user attributes from Venmo-style transaction notes.", no_args_is_help=True)
console = Console()

STDOUT = Path("-")


def _configure_logging(verbose: bool) -> None:
    logger = logging.getLogger("venmo_latent")
    logger.handlers.clear()
    logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False))
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False


@app.callback()
def root(
    ctx: typer.Context,
    config_path: Path | None = typer.Option(None, "--config", help="JSON or TOML config file."),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress at debug level."),
) -> None:
    _configure_logging(verbose)
    ctx.obj = LatentConfig.load(config_path.expanduser() if config_path else None)


def _config(ctx: typer.Context) -> LatentConfig:
    return ctx.obj if isinstance(ctx.obj, LatentConfig) else LatentConfig.load()


def _input(config: LatentConfig, path: Path) -> Path:
    resolved = config.resolve_path(path)
    if not resolved.exists():
        raise typer.BadParameter(f"Path does not exist: {resolved}")
    return resolved


def _emit(config: LatentConfig, path: Path, text: str) -> None:
    if path == STDOUT:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    atomic_write_text(config.resolve_path(path), text)


def _render(write: Callable[[io.StringIO], object]) -> str:
    buffer = io.StringIO()
    write(buffer)
    return buffer.getvalue()


def _parse_n_range(value: str | None) -> tuple[int, int] | None:
    if value is None:
        return None
    try:
        low, high = (int(part) for part in value.split(","))
    except ValueError as exc:
        raise typer.BadParameter(f"--n-range must look like 1,2 (got {value!r})") from exc
    if not 1 <= low <= high <= 3:
        raise typer.BadParameter(f"--n-range must satisfy 1 <= low <= high <= 3 (got {value!r})")
    return (low, high)


def _tokenize_kwargs(config: LatentConfig) -> dict:
    return {
        "emoticons_path": config.tokenize.emoticons_path,
        "exceptions_path": config.tokenize.lemma_exceptions_path,
    }


def _detector(config: LatentConfig) -> ContentDetector | None:
    if config.features.curse_words_path is None and config.features.laughing_path is None:
        return None
    return ContentDetector(
        curse_words_path=config.features.curse_words_path,
        laughing_path=config.features.laughing_path,
    )


def _load(config: LatentConfig, path: Path, strict: bool | None = None) -> LoadResult:
    return read_transactions(_input(config, path), strict=config.corpus.strict if strict is None else strict)


def _load_corpus(config: LatentConfig, path: Path, min_posts: int | None = None) -> Corpus:
    corpus = group_by_user(_load(config, path).transactions)
    return filter_min_posts(corpus, config.corpus.min_posts if min_posts is None else min_posts)


def _load_labels(
    config: LatentConfig,
    corpus: Corpus,
    task: LabelTask,
    labels_path: Path | None,
    political_labels: Path | None,
) -> list[LabeledUser]:
    if labels_path is not None:
        labeled = [u for u in read_labels(_input(config, labels_path)) if u.task is task]
        return [u for u in labeled if u.user_id in corpus.users]
    names = load_name_corpus(config.label.names_path) if task is LabelTask.GENDER else None
    politics_path = political_labels or config.label.politics_labels_path
    politics = load_political_labels(config.resolve_path(politics_path)) if politics_path else None
    if task is LabelTask.POLITICS and politics is None:
        raise MissingLabels("politics task needs --political-labels or --labels")
    return build_labeled_dataset(corpus, task, names=names, region=config.label.region, political_labels=politics)


def _summary_table(rows: list[tuple[str, str]], title: str | None = None) -> Table:
    table = Table(show_header=True, header_style="bold", box=None, padding=(0, 2), title=title)
    table.add_column("Metric", style="dim")
    table.add_column("Value", justify="right")
    for metric, value in rows:
        table.add_row(metric, value)
    return table


@app.command("synth")
def synth_command(
    ctx: typer.Context,
    out: Path = typer.Option(..., "--out", help="Corpus JSONL to write."),
    labels_out: Path | None = typer.Option(None, "--labels", help="Labels CSV (user_id,label,task) to write."),
    planted_out: Path | None = typer.Option(None, "--planted", help="JSON file listing the planted tokens per class."),
    users_per_class: int | None = typer.Option(None, "--users-per-class", min=1),
    posts_min: int | None = typer.Option(None, "--posts-min", min=1),
    posts_max: int | None = typer.Option(None, "--posts-max", min=1),
    p_signal: float | None = typer.Option(None, "--p-signal", min=0.0, max=1.0),
    p_noise: float | None = typer.Option(None, "--p-noise", min=0.0, max=1.0),
    emoji_fraction: float | None = typer.Option(None, "--emoji-fraction", min=0.0, max=1.0),
    seed: int | None = typer.Option(None, "--seed", help="Root seed; the generator uses its own stage seed."),
) -> None:
    """Generate a labeled corpus with class signal planted by construction."""
    from venmo_latent.synth import SynthSpec, generate_synthetic_corpus

    config = _config(ctx)
    root_seed = config.synth.seed if seed is None else seed
    spec = SynthSpec.from_config(
        config.synth,
        n_users_per_class=users_per_class,
        posts_min=posts_min,
        posts_max=posts_max,
        p_signal=p_signal,
        p_noise=p_noise,
        emoji_fraction=emoji_fraction,
        seed=stage_seeds(root_seed)["synth"],
    )
    result = generate_synthetic_corpus(spec, names=load_name_corpus(config.label.names_path))
    _emit(config, out, _render(lambda buf: dump_transactions(result.transactions, buf)))
    if labels_out is not None:
        _emit(config, labels_out, _render(lambda buf: write_labels(buf, result.labels)))
    if planted_out is not None:
        atomic_write_json(
            config.resolve_path(planted_out),
            {label.value: list(tokens) for label, tokens in result.planted.items()},
        )
    if out != STDOUT:
        console.print(
            _summary_table(
                [
                    ("labeled users", str(len(result.labels))),
                    ("transactions", str(len(result.transactions))),
                    ("root seed", str(root_seed)),
                ]
            )
        )


@app.command("ingest")
def ingest_command(
    ctx: typer.Context,
    inputs: list[Path] = typer.Option(..., "--in", help="Transaction JSONL file(s); repeat to merge."),
    out: Path = typer.Option(..., "--out", help="Deduplicated corpus JSONL to write."),
    strict: bool | None = typer.Option(None, "--strict/--lenient", help="Abort on the first malformed line."),
) -> None:
    """Parse, validate and deduplicate transaction records."""
    config = _config(ctx)
    merged: dict[str, Transaction] = {}
    skipped = duplicates = 0
    for path in inputs:
        result = _load(config, path, strict)
        skipped += result.skipped
        duplicates += result.duplicates
        for transaction in result.transactions:
            if transaction.id in merged:
                duplicates += 1
                continue
            merged[transaction.id] = transaction
    corpus = group_by_user(merged.values())
    ordered = sorted(merged.values(), key=lambda t: t.sort_key)
    _emit(config, out, _render(lambda buf: dump_transactions(ordered, buf)))
    if out != STDOUT:
        console.print(
            _summary_table(
                [
                    ("transactions", str(len(ordered))),
                    ("users", str(len(corpus.users))),
                    ("duplicates", str(duplicates)),
                    ("skipped (malformed)", str(skipped)),
                ]
            )
        )


@app.command("stats")
def stats_command(
    ctx: typer.Context,
    input_path: Path = typer.Option(..., "--in", help="Corpus JSONL."),
    histogram_out: Path | None = typer.Option(None, "--histogram-out", help="Note length histogram CSV (length,count)."),
    json_out: Path | None = typer.Option(None, "--json-out", help="Summary as JSON."),
) -> None:
    """Summarize a corpus and export the note length histogram."""
    from venmo_latent.stats import summarize_corpus, write_histogram_csv

    config = _config(ctx)
    summary = summarize_corpus(group_by_user(_load(config, input_path).transactions))
    if histogram_out is not None:
        _emit(config, histogram_out, _render(lambda buf: write_histogram_csv(summary.histogram, buf)))
    if json_out is not None:
        atomic_write_json(config.resolve_path(json_out), summary.to_dict())
    if histogram_out == STDOUT:
        return
    rows = [
        ("transactions", str(summary.n_transactions)),
        ("users", str(summary.n_users)),
        ("charges", f"{summary.pct_charge:.1%}"),
        ("with comments", f"{summary.pct_with_comments:.1%}"),
        ("modal note length", "-" if summary.modal_note_length is None else str(summary.modal_note_length)),
    ]
    rows.extend((f"posts/user {name}", f"{value:g}") for name, value in summary.posts_per_user.items())
    console.print(_summary_table(rows))


@app.command("tokenize-debug")
def tokenize_debug_command(
    ctx: typer.Context,
    note: str = typer.Option(..., "--note", help="Note text to tokenize."),
    n_range: str = typer.Option("1,2", "--n-range", help="N-gram range low,high."),
) -> None:
    """Show tokens, lemmas and n-grams of one note."""
    from venmo_latent.features import detect_content_features
    from venmo_latent.tokens import generate_ngrams, tokenize_post

    config = _config(ctx)
    post = tokenize_post(note, **_tokenize_kwargs(config))
    table = Table(show_header=True, header_style="bold", box=None, padding=(0, 2))
    table.add_column("#", justify="right", style="dim")
    table.add_column("Surface")
    table.add_column("Lemma")
    table.add_column("Kind", style="cyan")
    for index, token in enumerate(post.tokens):
        table.add_row(str(index), token.surface, token.lemma, token.kind.value)
    console.print(table)
    grams = generate_ngrams(post, _parse_n_range(n_range) or (1, 2))
    console.print(Panel(" | ".join(grams) or "[dim]none[/]", title="[bold]N-grams", border_style="dim"))
    counts = {k: v for k, v in detect_content_features(post, detector=_detector(config)).as_dict().items() if v}
    console.print(Panel(", ".join(f"{k}={v}" for k, v in counts.items()) or "[dim]none[/]", title="[bold]Features"))


@app.command("featurize")
def featurize_command(
    ctx: typer.Context,
    input_path: Path = typer.Option(..., "--in", help="Corpus JSONL."),
    out: Path = typer.Option(..., "--out", help="Engineered features CSV, or - for stdout."),
    include_pct_as_actor: bool | None = typer.Option(
        None, "--pct-as-actor/--no-pct-as-actor", help="Append the share of posts where the user is the actor."
    ),
    min_posts: int | None = typer.Option(None, "--min-posts", min=1),
    matrix_out: Path | None = typer.Option(None, "--matrix-out", help="Also export the full feature matrix (Matrix Market)."),
    vocab_out: Path | None = typer.Option(None, "--vocab-out", help="Also write the fitted vocabulary TSV."),
) -> None:
    """Compute per-user socio-linguistic and structural features."""
    config = _config(ctx)
    corpus = _load_corpus(config, input_path, min_posts)
    include = config.features.include_pct_as_actor if include_pct_as_actor is None else include_pct_as_actor
    features = featurize_corpus(
        corpus, include_pct_as_actor=include, detector=_detector(config), tokenize_kwargs=_tokenize_kwargs(config)
    )
    _emit(
        config,
        out,
        _render(lambda buf: write_features_csv(sorted(features.items()), buf, include_pct_as_actor=include)),
    )
    if matrix_out is not None or vocab_out is not None:
        from venmo_latent.pipeline import FeaturePipeline, PipelineSettings, build_documents
        from venmo_latent.vectorize import export_matrix, write_vocabulary

        documents = build_documents(
            corpus,
            sorted(corpus.users),
            include_pct_as_actor=include,
            detector=_detector(config),
            tokenize_kwargs=_tokenize_kwargs(config),
        )
        pipeline = FeaturePipeline(PipelineSettings.from_config(config, include_pct_as_actor=include))
        matrix = pipeline.fit_transform(documents)
        assert pipeline.vocab is not None
        if matrix_out is not None:
            export_matrix(matrix, pipeline.vocab, config.resolve_path(matrix_out), columns=pipeline.engineered_columns)
        if vocab_out is not None:
            write_vocabulary(config.resolve_path(vocab_out), pipeline.vocab)
    if out != STDOUT:
        console.print(f"Wrote features for {len(features)} users to {config.resolve_path(out)}")


@app.command("label")
def label_command(
    ctx: typer.Context,
    input_path: Path = typer.Option(..., "--in", help="Corpus JSONL."),
    task: LabelTask = typer.Option(LabelTask.GENDER, "--task", help="gender or politics."),
    out: Path = typer.Option(..., "--out", help="Labels CSV (user_id,label,task), or - for stdout."),
    names: Path | None = typer.Option(None, "--names", help="Name corpus TSV (name, region, male_count, female_count)."),
    region: str | None = typer.Option(None, "--region", help="Name corpus region, or * for all regions."),
    political_labels: Path | None = typer.Option(None, "--political-labels", help="user_id,label CSV for politics."),
    min_posts: int | None = typer.Option(None, "--min-posts", min=1),
) -> None:
    """Derive binary ground truth labels for a task."""
    config = _config(ctx)
    corpus = _load_corpus(config, input_path, min_posts)
    region = region or config.label.region
    name_corpus = load_name_corpus(config.resolve_path(names) if names else config.label.names_path)
    politics = None
    if task is LabelTask.POLITICS:
        politics_path = political_labels or config.label.politics_labels_path
        if politics_path is None:
            raise MissingLabels("politics task needs --political-labels")
        politics = load_political_labels(config.resolve_path(politics_path))
    labeled = build_labeled_dataset(corpus, task, names=name_corpus, region=region, political_labels=politics)
    _emit(config, out, _render(lambda buf: write_labels(buf, labeled)))
    if out == STDOUT:
        return
    if task is LabelTask.GENDER:
        guesses = [
            guess_gender(extract_first_name(profile.display_name), name_corpus, region)
            for profile in corpus.users.values()
        ]
        breakdown = label_breakdown(guesses)
        console.print(_summary_table([(k.value, str(v)) for k, v in breakdown.items()], title="Name guesses"))
    console.print(f"Labeled {len(labeled)} of {len(corpus.users)} users for {task.value}")


@app.command("train")
def train_command(
    ctx: typer.Context,
    input_path: Path = typer.Option(..., "--in", help="Corpus JSONL."),
    labels_path: Path = typer.Option(..., "--labels", help="Labels CSV from `label` or `synth`."),
    out: Path = typer.Option(..., "--out", help="Model file to write."),
    task: LabelTask = typer.Option(LabelTask.GENDER, "--task"),
    classifier: str = typer.Option("svm", "--classifier", help="svm, mlp or gbdt."),
    vectorizer: str | None = typer.Option(None, "--vectorizer", help="count or tfidf."),
    n_range: str | None = typer.Option(None, "--n-range", help="N-gram range low,high."),
    c: float | None = typer.Option(None, "--C", help="SVM regularization strength."),
    seed: int = typer.Option(0, "--seed", help="Root seed."),
    balance: bool = typer.Option(False, "--balance/--no-balance", help="Downsample the majority class first."),
    min_posts: int | None = typer.Option(None, "--min-posts", min=1),
) -> None:
    """Fit the feature pipeline and one classifier on all labeled users."""
    from venmo_latent.classifiers import CLASSIFIER_KINDS
    from venmo_latent.classifiers.persist import save_model
    from venmo_latent.evaluation import GridPoint, balance_classes, fit_model, positive_mask
    from venmo_latent.pipeline import PipelineSettings, build_documents

    if classifier not in CLASSIFIER_KINDS:
        raise typer.BadParameter(f"Unsupported classifier: {classifier}")
    if vectorizer is not None and vectorizer not in {"count", "tfidf"}:
        raise typer.BadParameter(f"Unsupported vectorizer: {vectorizer}")
    if c is not None and c <= 0:
        raise typer.BadParameter("--C must be positive")
    config = _config(ctx)
    seeds = stage_seeds(seed)
    corpus = _load_corpus(config, input_path, min_posts)
    labeled = _load_labels(config, corpus, task, labels_path, None)
    if balance:
        labeled = balance_classes(labeled, seeds["balance"])
    settings = PipelineSettings.from_config(config, vectorizer=vectorizer, n_range=_parse_n_range(n_range))
    point = GridPoint(classifier, settings.vectorizer, settings.n_range, c if classifier == "svm" else None)
    documents = build_documents(
        corpus,
        [u.user_id for u in labeled],
        include_pct_as_actor=settings.include_pct_as_actor,
        detector=_detector(config),
        tokenize_kwargs=_tokenize_kwargs(config),
    )
    fitted = fit_model(documents, positive_mask(labeled), point.trainer(config), settings, seeds["models"])
    save_model(fitted.model, config.resolve_path(out), pipeline=fitted.pipeline.to_dict())
    console.print(
        _summary_table(
            [
                ("classifier", classifier),
                ("users", str(len(labeled))),
                ("features", str(fitted.model.width)),
                ("model", str(config.resolve_path(out))),
            ]
        )
    )


@app.command("predict")
def predict_command(
    ctx: typer.Context,
    model_path: Path = typer.Option(..., "--model", help="Model file from `train` or `evaluate`."),
    input_path: Path = typer.Option(..., "--in", help="Corpus JSONL."),
    out: Path = typer.Option(STDOUT, "--out", help="Predictions CSV (user_id,prediction), or - for stdout."),
    min_posts: int | None = typer.Option(None, "--min-posts", min=1),
) -> None:
    """Apply a saved model to every user of a corpus."""
    import csv

    from venmo_latent.classifiers.persist import load_model
    from venmo_latent.errors import CorruptError
    from venmo_latent.label import ClassLabel
    from venmo_latent.pipeline import FeaturePipeline, build_documents

    config = _config(ctx)
    saved = load_model(_input(config, model_path))
    if not saved.pipeline:
        raise CorruptError("model file carries no feature pipeline")
    pipeline = FeaturePipeline.from_dict(saved.pipeline)
    corpus = _load_corpus(config, input_path, min_posts)
    user_ids = sorted(corpus.users)
    documents = build_documents(
        corpus,
        user_ids,
        include_pct_as_actor=pipeline.settings.include_pct_as_actor,
        detector=_detector(config),
        tokenize_kwargs=_tokenize_kwargs(config),
    )
    predictions = saved.model.predict_positive(pipeline.transform(documents)) if documents else []

    def write(buf: io.StringIO) -> None:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["user_id", "prediction"])
        for user_id, positive in zip(user_ids, predictions):
            writer.writerow([user_id, (ClassLabel.CLASS_A if positive else ClassLabel.CLASS_B).value])

    _emit(config, out, _render(write))


@app.command("evaluate")
def evaluate_command(
    ctx: typer.Context,
    input_path: Path = typer.Option(..., "--in", help="Corpus JSONL."),
    task: LabelTask = typer.Option(LabelTask.GENDER, "--task"),
    labels_path: Path | None = typer.Option(None, "--labels", help="Labels CSV; derived from the corpus when omitted."),
    political_labels: Path | None = typer.Option(None, "--political-labels", help="user_id,label CSV for politics."),
    grid_path: Path | None = typer.Option(None, "--grid", help="Grid JSON (vectorizer, n_range, C, classifier, overrides)."),
    folds: int | None = typer.Option(None, "--folds", min=2),
    seed: int | None = typer.Option(None, "--seed", help="Root seed."),
    report_path: Path = typer.Option(..., "--report", help="Report JSON to write."),
    model_out: Path | None = typer.Option(None, "--model-out", help="Also save the best config, refit on all users, to this file."),
    workers: int | None = typer.Option(None, "--workers", min=1),
    balance: bool | None = typer.Option(None, "--balance/--no-balance"),
    min_posts: int | None = typer.Option(None, "--min-posts", min=1),
) -> None:
    """Grid search with stratified k-fold cross-validation."""
    from venmo_latent.classifiers.persist import save_model
    from venmo_latent.evaluation import balance_classes, expand_grid, grid_search, positive_mask, stratified_kfold
    from venmo_latent.pipeline import PipelineSettings, build_documents

    config = _config(ctx)
    grid = config.evaluate.grid
    if grid_path is not None:
        try:
            grid = GridDefaults.model_validate(json.loads(_input(config, grid_path).read_text(encoding="utf-8")))
        except (json.JSONDecodeError, ValidationError) as exc:
            raise ConfigError(f"invalid grid {grid_path}: {exc}") from exc
    root_seed = config.evaluate.seed if seed is None else seed
    seeds = stage_seeds(root_seed)
    k = folds or config.evaluate.folds

    corpus = _load_corpus(config, input_path, min_posts)
    labeled = _load_labels(config, corpus, task, labels_path, political_labels)
    if config.evaluate.balance if balance is None else balance:
        labeled = balance_classes(labeled, seeds["balance"])
    positive = positive_mask(labeled)
    plan = stratified_kfold(positive, k, seeds["folds"])
    base = PipelineSettings.from_config(config)
    documents = build_documents(
        corpus,
        [u.user_id for u in labeled],
        include_pct_as_actor=base.include_pct_as_actor,
        detector=_detector(config),
        tokenize_kwargs=_tokenize_kwargs(config),
    )
    started = time.monotonic()
    report = grid_search(
        expand_grid(grid),
        plan,
        documents,
        positive,
        config,
        base_settings=base,
        models_seed=seeds["models"],
        workers=workers or config.evaluate.workers,
    )
    report.task = task.value
    report.seed = root_seed
    if model_out is not None and report.best_model is not None:
        save_model(report.best_model.model, config.resolve_path(model_out), pipeline=report.best_model.pipeline.to_dict())
        report.best_model_path = str(model_out)
    atomic_write_json(config.resolve_path(report_path), report.to_dict())

    table = Table(show_header=True, header_style="bold", box=None, padding=(0, 2))
    table.add_column("Config")
    table.add_column("Mean accuracy", justify="right")
    table.add_column("Folds", style="dim")
    for index, result in enumerate(report.results):
        style = "bold green" if index == report.best_index else None
        folds_text = " ".join(f"{a:.3f}" for a in result.fold_accuracies)
        table.add_row(result.point.key, f"{result.mean_accuracy:.4f}", folds_text, style=style)
    console.print(table)
    if report.refit_accuracy is not None:
        console.print(
            f"Best config [bold]{report.best.point.key}[/] refit on all users, "
            f"training accuracy {report.refit_accuracy:.4f}"
        )
    console.print(
        f"[dim]{len(labeled)} users, {k} folds, {len(report.results)} configs in {time.monotonic() - started:.1f}s[/]"
    )


@app.command("report-coefficients")
def report_coefficients_command(
    ctx: typer.Context,
    model_path: Path = typer.Option(..., "--model", help="Linear SVM model file."),
    k: int = typer.Option(15, "-k", "--top", min=0, help="Features per class."),
    out: Path = typer.Option(STDOUT, "--out", help="CSV (feature,weight,class), or - for stdout."),
    raw_names: bool = typer.Option(False, "--raw-names", help="Keep emoji surfaces instead of _names_."),
) -> None:
    """List the highest weighted features of each class."""
    from venmo_latent.classifiers.persist import load_model
    from venmo_latent.report import top_coefficients, write_coefficients_csv

    config = _config(ctx)
    saved = load_model(_input(config, model_path))
    if saved.model.kind != "svm":
        raise typer.BadParameter(f"coefficients need a linear SVM model, got {saved.model.kind}")
    positive, negative = top_coefficients(saved.model, k)  # type: ignore[arg-type]
    _emit(config, out, _render(lambda buf: write_coefficients_csv(positive + negative, buf, raw_names=raw_names)))


@app.command("serve-mock")
def serve_mock_command(
    ctx: typer.Context,
    input_path: Path = typer.Option(..., "--in", help="Corpus JSONL to serve."),
    host: str | None = typer.Option(None, "--host"),
    port: int | None = typer.Option(None, "--port", min=0),
    page_size: int | None = typer.Option(None, "--page-size", min=1),
    refresh_interval: float | None = typer.Option(None, "--refresh-interval", min=0.0),
    rate_limit: float | None = typer.Option(None, "--rate-limit", min=0.0, help="Requests per second; 0 disables."),
    burst: int | None = typer.Option(None, "--burst", min=1),
) -> None:
    """Serve a corpus through the mock feed, user and profile endpoints."""
    from venmo_latent.harvest import run_mock_server

    config = _config(ctx)
    mock = config.mock
    server = run_mock_server(
        group_by_user(_load(config, input_path).transactions),
        page_size=page_size or mock.page_size,
        refresh_interval=mock.refresh_interval if refresh_interval is None else refresh_interval,
        rate_limit=mock.rate_limit if rate_limit is None else rate_limit,
        burst=burst or mock.burst,
        host=host or mock.host,
        port=mock.port if port is None else port,
    )
    console.print(f"Serving on {server.url} (Ctrl-C to stop)")
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        console.print(f"served={server.requests_served} throttled={server.throttled}")


harvest_app = typer.Typer(help="Collect transactions from a Venmo-style API.")


@harvest_app.command("feed")
def harvest_feed_command(
    ctx: typer.Context,
    endpoint: str | None = typer.Option(None, "--endpoint", help="API base URL."),
    pages: int | None = typer.Option(None, "--pages", min=1, help="Number of feed polls."),
    poll_interval: float | None = typer.Option(None, "--poll-interval", min=0.0, help="Seconds between polls."),
    out: Path = typer.Option(..., "--out", help="Transactions JSONL to write."),
    ids_out: Path | None = typer.Option(None, "--ids-out", help="Discovered user ids, one per line."),
) -> None:
    """Phase one: poll the public feed and collect transactions and user ids."""
    from venmo_latent.harvest import VenmoClient, fetch_public_feed

    config = _config(ctx)
    client = VenmoClient.from_config(endpoint, config.harvest)
    transactions = fetch_public_feed(
        client.endpoint,
        pages or config.harvest.pages,
        poll_interval=config.harvest.poll_interval if poll_interval is None else poll_interval,
        client=client,
    )
    _emit(config, out, _render(lambda buf: dump_transactions(transactions, buf)))
    user_ids = user_ids_from_transactions(transactions)
    if ids_out is not None:
        _emit(config, ids_out, "".join(f"{uid}\n" for uid in user_ids))
    if out != STDOUT:
        console.print(f"Collected {len(transactions)} transactions, {len(user_ids)} user ids")


@harvest_app.command("users")
def harvest_users_command(
    ctx: typer.Context,
    ids: Path | None = typer.Option(None, "--ids", help="User ids to crawl, one per line."),
    endpoint: str | None = typer.Option(None, "--endpoint", help="API base URL."),
    workers: int | None = typer.Option(None, "--workers", min=1),
    checkpoint: Path = typer.Option(..., "--checkpoint", help="Crawl state JSON; resumed when it exists."),
    out: Path = typer.Option(..., "--out", help="Transactions JSONL; appended to when resuming."),
    max_users: int | None = typer.Option(None, "--max-users", min=1, help="Stop after this many users."),
) -> None:
    """Phase two: fetch every public transaction of each user, resumable from a checkpoint."""
    from venmo_latent.harvest import CrawlState, VenmoClient, crawl_users

    config = _config(ctx)
    checkpoint_path = config.resolve_path(checkpoint)
    out_path = config.resolve_path(out)
    if checkpoint_path.exists():
        state = CrawlState.load(checkpoint_path)
        mode = "a"
    else:
        if ids is None:
            raise typer.BadParameter("--ids is required when no checkpoint exists")
        lines = _input(config, ids).read_text(encoding="utf-8").splitlines()
        state = CrawlState.fresh(line.strip() for line in lines if line.strip())
        mode = "w"
    client = VenmoClient.from_config(endpoint, config.harvest)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open(mode, encoding="utf-8") as handle:

        def sink(batch: list[Transaction]) -> None:
            dump_transactions(batch, handle)
            handle.flush()

        result = crawl_users(
            client,
            state,
            sink=sink,
            workers=workers or config.harvest.workers,
            checkpoint=checkpoint_path,
            max_users=max_users,
        )
    state.save(checkpoint_path)
    console.print(
        _summary_table(
            [
                ("users completed", str(result.users_completed)),
                ("new transactions", str(result.transactions_written)),
                ("users pending", str(len(state.pending))),
                ("requests sent", str(client.requests_sent)),
            ]
        )
    )


@harvest_app.command("resolve")
def harvest_resolve_command(
    ctx: typer.Context,
    username: str = typer.Argument(..., help="Profile username."),
    endpoint: str | None = typer.Option(None, "--endpoint", help="API base URL."),
) -> None:
    """Look up the user id embedded in a profile page."""
    from venmo_latent.harvest import VenmoClient, resolve_user_id

    config = _config(ctx)
    client = VenmoClient.from_config(endpoint, config.harvest)
    typer.echo(resolve_user_id(client.endpoint, username, client=client))


app.add_typer(harvest_app, name="harvest")


def main() -> None:
    try:
        app()
    except LatentError as exc:
        Console(stderr=True).print(exc.prefixed, markup=False, highlight=False)
        raise SystemExit(1) from None


if __name__ == "__main__":
    main()
