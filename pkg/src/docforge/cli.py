"""The `forge` command line.

Exit codes: 0 ok, 1 validation (bad config, arguments, inputs), 2 runtime
failure, 3 completed but degraded (parse-degraded files, too many generation
failures). Batch stages read and write file artifacts; `annotate serve` is
the one long-running piece.
"""

from __future__ import annotations

import hashlib
import json
import random
import sys
import time
from pathlib import Path

import click

from . import __version__
from ._jsonl import read_jsonl, write_json, write_jsonl
from .annotation import (
    AnnotationError,
    Decision,
    DecisionStore,
    Session,
    apply_review,
    assign_samples,
    fleiss_kappa,
    matrix_from_decisions,
)
from .dataset import (
    DEFAULT_RATIOS,
    BuildConfig,
    DatasetEntry,
    DatasetError,
    assemble,
    dataset_stats,
    read_dataset,
    split,
    split_stratified,
    write_dataset,
)
from .extract import extract_file, record_from_row, record_to_row
from .filtering import (
    DEFAULT_RULES,
    FilterConfig,
    RuleConfigError,
    apply_filters,
    load_rules,
    outcome_report,
)
from .harness import (
    AdapterError,
    HarnessError,
    RunRecord,
    compare_runs,
    emit_report,
    parse_adapter_spec,
    postprocess_outputs,
    read_run,
    run_generation,
    score_run,
    write_run,
)
from .ingest import ManifestError, load_manifest, run_ingest
from .lora import (
    ArchitectureSpec,
    LoraConfig,
    LoraSpecError,
    bundled_specs,
    lora_params,
    verify_reference_counts,
)
from .metrics import TokenizerConfig
from .prompting import (
    DEFAULT_TEMPLATE,
    PromptError,
    ShotConfig,
    load_template,
    propose_exemplars,
    render_run,
)

VALIDATION_ERRORS = (
    ManifestError,
    RuleConfigError,
    DatasetError,
    PromptError,
    AdapterError,
    AnnotationError,
    HarnessError,
    LoraSpecError,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_DEGRADED = 3


def _set_log_json(ctx, param, value):
    if value:
        ctx.ensure_object(dict)
        ctx.obj["log_json"] = True


def common_options(fn):
    """--version and --log-json, available on every subcommand."""
    fn = click.option(
        "--log-json", is_flag=True, expose_value=False, is_eager=True,
        callback=_set_log_json, help="Emit JSON log lines on stderr.",
    )(fn)
    fn = click.version_option(__version__, "--version", prog_name="forge")(fn)
    return fn


def _log(ctx, event: str, **fields):
    if ctx.obj and ctx.obj.get("log_json"):
        click.echo(json.dumps({"event": event, **fields}, sort_keys=True), err=True)
    else:
        detail = " ".join(f"{k}={v}" for k, v in fields.items())
        click.echo(f"[{event}] {detail}".rstrip(), err=True)


@click.group()
@click.version_option(__version__, prog_name="forge")
@click.option("--log-json", is_flag=True, help="Emit JSON log lines on stderr.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Upper bound on parallel workers.")
@click.pass_context
def forge(ctx, log_json, jobs):
    if jobs < 1:
        raise click.UsageError("--jobs must be >= 1")
    ctx.ensure_object(dict)
    ctx.obj.setdefault("log_json", log_json)
    ctx.obj["jobs"] = jobs


def _inventory_path(out: str) -> Path:
    p = Path(out)
    if p.suffix == ".jsonl":
        return p
    return p / "inventory.jsonl"


@forge.command()
@common_options
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True,
              help="Directory for inventory.jsonl (or an explicit .jsonl path).")
@click.option("--exclude", multiple=True, help="fnmatch pattern over repo-relative paths.")
@click.pass_context
def ingest(ctx, manifest_path, out_path, exclude):
    """Discover Java files and write the inventory."""
    manifest = load_manifest(manifest_path)
    result = run_ingest(manifest, excludes=tuple(exclude))
    target = _inventory_path(out_path)
    write_jsonl(target, result.inventory)
    for w in result.warnings:
        _log(ctx, "ingest-warning", message=w)
    kept = sum(1 for r in result.inventory if r["kept"])
    _log(ctx, "ingest", files=len(result.inventory), kept=kept, out=str(target))


@forge.command()
@common_options
@click.option("--inventory", "inventory_path", required=True, type=click.Path(exists=True))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True),
              help="Resolves repo roots for the inventory's rel_paths.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.pass_context
def extract(ctx, inventory_path, manifest_path, out_path, report_path):
    """Extract (javadoc, declaration) records to JSONL."""
    manifest = load_manifest(manifest_path)
    wanted = {
        (row["repo"], row["rel_path"])
        for row in read_jsonl(inventory_path)
        if row.get("kept")
    }
    result = run_ingest(manifest)
    rows, orphans, degraded_files = [], 0, []
    warnings = []
    seen = set()
    for sf in result.files:
        if (sf.repo, sf.rel_path) not in wanted:
            continue
        seen.add((sf.repo, sf.rel_path))
        fx = extract_file(sf.repo, sf.rel_path, sf.content,
                          license_id=result.licenses[sf.repo])
        rows.extend(record_to_row(r) for r in fx.records)
        orphans += fx.orphans
        warnings.extend(f"{sf.repo}:{sf.rel_path}: {w}" for w in fx.warnings)
        if fx.degraded:
            degraded_files.append(f"{sf.repo}:{sf.rel_path}")
    for repo, rel_path in sorted(wanted - seen):
        warnings.append(f"{repo}:{rel_path}: listed in inventory but not found")
    rows.sort(key=lambda r: (r["repo"], r["rel_path"], r["span"]))
    write_jsonl(Path(out_path), rows)
    if report_path:
        write_json(Path(report_path), {
            "records": len(rows),
            "orphans": orphans,
            "degraded_files": degraded_files,
            "warnings": warnings,
        })
    for w in warnings:
        _log(ctx, "extract-warning", message=w)
    _log(ctx, "extract", records=len(rows), orphans=orphans,
         degraded_files=len(degraded_files), out=out_path)
    if degraded_files:
        ctx.exit(EXIT_DEGRADED)


@forge.command("filter")
@common_options
@click.option("--in", "records_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--min-code-chars", type=int, default=None)
@click.option("--max-code-chars", type=int, default=None)
@click.pass_context
def filter_cmd(ctx, records_path, out_path, rules_path, report_path,
               min_code_chars, max_code_chars):
    """Apply quality rules, dedup, and PII flags."""
    records = [record_from_row(r) for r in read_jsonl(records_path)]
    rules = load_rules(rules_path) if rules_path else DEFAULT_RULES
    config = FilterConfig()
    if min_code_chars is not None or max_code_chars is not None:
        config = FilterConfig(
            min_code_chars=min_code_chars if min_code_chars is not None else config.min_code_chars,
            max_code_chars=max_code_chars if max_code_chars is not None else config.max_code_chars,
        )
    outcome = apply_filters(records, rules=rules, config=config)
    write_jsonl(Path(out_path), [record_to_row(r) for r in outcome.kept])
    report = outcome_report(outcome, total_in=len(records))
    report["flags"] = [{"entry": sid, "rule": rule} for sid, rule in outcome.flags]
    report["rejections"] = [
        {"entry": r.stable_id, "rule": rule} for r, rule in outcome.rejected
    ]
    if report_path:
        write_json(Path(report_path), report)
    _log(ctx, "filter", **{k: report[k] for k in ("input", "kept", "rejected", "duplicates_dropped")})


def _parse_ratios(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise DatasetError(f"ratios must be numbers: {text!r}") from exc
    if len(parts) != 3:
        raise DatasetError("ratios must be three comma-separated floats")
    return parts


@forge.command()
@common_options
@click.option("--in", "kept_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--ratios", default=None, help="Three comma-separated floats summing to 1.")
@click.option("--seed", type=int, default=0)
@click.option("--stratify-by-repo", is_flag=True)
@click.option("--include-kinds", default=None,
              help="Comma-separated declaration kinds (default: method,constructor).")
@click.option("--stats", "stats_path", type=click.Path(), default=None)
@click.pass_context
def build(ctx, kept_path, out_dir, ratios, seed, stratify_by_repo, include_kinds, stats_path):
    """Assemble dataset entries and write the three splits."""
    records = [record_from_row(r) for r in read_jsonl(kept_path)]
    config = BuildConfig()
    if include_kinds:
        config = BuildConfig(kinds=tuple(k.strip() for k in include_kinds.split(",") if k.strip()))
    entries = assemble(records, config)
    ratio_tuple = _parse_ratios(ratios) if ratios else DEFAULT_RATIOS
    splitter = split_stratified if stratify_by_repo else split
    assignment = splitter(entries, ratios=ratio_tuple, seed=seed)
    manifest = write_dataset(entries, assignment, out_dir)
    if stats_path:
        write_json(Path(stats_path), dataset_stats(entries, assignment).as_dict())
    _log(ctx, "build", entries=len(entries), out=out_dir, **manifest["counts"])


def _resolve_split(split_arg: str, dataset_dir: str | None) -> Path:
    """--split takes a JSONL path, or a split name when --dataset is given."""
    direct = Path(split_arg)
    if direct.is_file():
        return direct
    if dataset_dir:
        named = Path(dataset_dir) / f"{split_arg}.jsonl"
        if named.is_file():
            return named
        raise PromptError(f"no {split_arg}.jsonl under {dataset_dir}")
    raise PromptError(f"split file not found: {split_arg}")


@forge.command()
@common_options
@click.option("--split", "split_arg", required=True,
              help="Split JSONL path, or a split name with --dataset.")
@click.option("--dataset", "dataset_dir", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice(["zero", "one", "few"]), default="zero")
@click.option("--exemplars", "exemplars_path", type=click.Path(exists=True), default=None,
              help='JSON {"exemplar_ids": [...]} (needed for one/few).')
@click.option("--template", "template_path", type=click.Path(exists=True), default=None)
@click.option("--train", "train_path", type=click.Path(exists=True), default=None,
              help="Train split JSONL (source of exemplars).")
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--propose", is_flag=True, help="Print exemplar candidates from --train and exit.")
@click.pass_context
def prompts(ctx, split_arg, dataset_dir, mode, exemplars_path, template_path,
            train_path, out_path, propose):
    """Render prompts for a split."""
    template = load_template(template_path) if template_path else DEFAULT_TEMPLATE
    if train_path is None and dataset_dir:
        candidate = Path(dataset_dir) / "train.jsonl"
        train_path = str(candidate) if candidate.is_file() else None
    train_index = {}
    if train_path:
        train_index = {e["id"]: DatasetEntry.from_dict(e) for e in read_jsonl(train_path)}
    if propose:
        if not train_index:
            raise PromptError("--propose needs --train")
        for ex_id in propose_exemplars(list(train_index.values())):
            click.echo(ex_id)
        return
    if out_path is None:
        raise click.UsageError("--out is required")
    exemplar_ids = ()
    if exemplars_path:
        data = json.loads(Path(exemplars_path).read_text(encoding="utf-8"))
        exemplar_ids = tuple(data["exemplar_ids"])
    shots = ShotConfig(mode=mode, exemplar_ids=exemplar_ids)
    entries = [DatasetEntry.from_dict(r)
               for r in read_jsonl(_resolve_split(split_arg, dataset_dir))]
    rows = render_run(entries, template, shots, train_index)
    write_jsonl(Path(out_path), rows)
    _log(ctx, "prompts", mode=mode, rendered=len(rows), out=out_path)


def _run_id(model_label: str, setting: str, outputs: dict[str, str]) -> str:
    digest = hashlib.sha256(
        "\n".join(f"{k}\t{outputs[k]}" for k in sorted(outputs)).encode("utf-8")
    ).hexdigest()[:8]
    return f"{model_label}-{setting}-{digest}"


@forge.command("eval")
@common_options
@click.option("--prompts", "prompts_path", required=True, type=click.Path(exists=True))
@click.option("--refs", "refs_path", required=True, type=click.Path(exists=True),
              help="Dataset split JSONL; `documentation` is the reference.")
@click.option("--adapter", "adapter_spec", required=True,
              help="echo | file:<outputs.jsonl> | cmd:<command> | http(s)://...")
@click.option("--run-label", required=True, help="model:setting, e.g. codellama:few")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--no-postprocess", is_flag=True,
              help="Score raw generations without extracting the doc block.")
@click.option("--timestamps", is_flag=True, help="Record wall-clock times in the run file.")
@click.option("--f1", "use_f1", is_flag=True, help="ROUGE F1 instead of recall.")
@click.pass_context
def eval_cmd(ctx, prompts_path, refs_path, adapter_spec, run_label, out_dir,
             no_postprocess, timestamps, use_f1):
    """Generate over a prompt file and score against references."""
    if ":" not in run_label:
        raise HarnessError("run label must look like model:setting")
    model_label, setting = run_label.rsplit(":", 1)
    adapter = parse_adapter_spec(adapter_spec)
    prompt_rows = read_jsonl(prompts_path)
    references = {r["id"]: r["documentation"] for r in read_jsonl(refs_path)}

    started = time.time()
    gen = run_generation(prompt_rows, adapter, references=references)
    outputs = gen.outputs if no_postprocess else postprocess_outputs(gen.outputs)
    report = score_run(outputs, references, TokenizerConfig(f1=use_f1))

    run = RunRecord(
        run_id=_run_id(model_label, setting, outputs),
        model_label=model_label,
        setting=setting,
        outputs=outputs,
        report=report,
        failures=gen.failures,
        degraded=gen.degraded,
        postprocessed=not no_postprocess,
        timestamps={"started": started, "finished": time.time()} if timestamps else None,
    )
    path = write_run(run, out_dir)
    _log(ctx, "eval", run=run.run_id, bleu=round(report.bleu, 4),
         failures=gen.failures, out=str(path))
    if gen.degraded:
        ctx.exit(EXIT_DEGRADED)


@forge.command()
@common_options
@click.option("--refs", "refs_path", required=True, type=click.Path(exists=True))
@click.option("--cands", "cands_path", required=True, type=click.Path(exists=True),
              help='JSONL {"id","text"}.')
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--f1", "use_f1", is_flag=True)
@click.pass_context
def score(ctx, refs_path, cands_path, out_path, use_f1):
    """Score a candidates file against references (no generation)."""
    outputs = {r["id"]: r["text"] for r in read_jsonl(cands_path)}
    references = {r["id"]: r["documentation"] for r in read_jsonl(refs_path)}
    report = score_run(outputs, references, TokenizerConfig(f1=use_f1))
    payload = report.as_dict()
    if out_path:
        write_json(Path(out_path), payload)
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@forge.command()
@common_options
@click.argument("runs", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--out", "out_arg", required=True,
              help="Markdown report path (or a directory for report.md).")
@click.pass_context
def compare(ctx, runs, out_arg):
    """Build the settings-by-model comparison report from run files."""
    table = compare_runs([read_run(p) for p in runs])
    out = Path(out_arg)
    if out.suffix == ".md":
        out_dir, md_name = out.parent, out.name
    else:
        out_dir, md_name = out, "report.md"
    paths = emit_report(table, out_dir)
    if md_name != "report.md":
        target = out_dir / md_name
        paths["markdown"].replace(target)
        paths["markdown"] = target
    for w in table.warnings:
        _log(ctx, "compare-warning", message=w)
    _log(ctx, "compare", rows=len(table.rows), out=str(paths["markdown"]))


@forge.command("lora-params")
@common_options
@click.option("--spec", "spec_path", type=click.Path(exists=True), default=None,
              help='Architecture JSON {"model_label","num_layers","projections":[...]}.')
@click.option("--rank", type=int, default=16, show_default=True)
@click.option("--targets", default=None,
              help="Comma-separated projection names (default: all seven).")
@click.option("--list", "list_models", is_flag=True, help="List bundled architectures.")
@click.option("--verify-table3", is_flag=True,
              help="Check bundled models against their published reference counts.")
@click.pass_context
def lora_params_cmd(ctx, spec_path, rank, targets, list_models, verify_table3):
    """Count trainable adapter parameters for an architecture."""
    if list_models:
        for spec in bundled_specs():
            click.echo(spec.model_label)
        return
    if verify_table3:
        bad = []
        for row in verify_reference_counts():
            mark = "ok" if row["ok"] else f"MISMATCH (expected {row['expected']:,})"
            got = f"{row['got']:,}" if row["got"] is not None else "missing spec"
            click.echo(f"{row['model']}: {got} {mark}")
            if not row["ok"]:
                bad.append(row["model"])
        if bad:
            raise LoraSpecError(f"reference counts failed for: {', '.join(bad)}")
        return
    if not spec_path:
        raise click.UsageError("need --spec, --list, or --verify-table3")
    arch = ArchitectureSpec.load(spec_path)
    cfg_kwargs = {"rank": rank}
    if targets:
        cfg_kwargs["targets"] = tuple(t.strip() for t in targets.split(",") if t.strip())
    cfg = LoraConfig(**cfg_kwargs)
    count = lora_params(arch, cfg)
    click.echo(json.dumps({
        "model": arch.model_label,
        "rank": cfg.rank,
        "targets": list(cfg.targets),
        "trainable_params": count,
    }, indent=2))


@forge.group()
def annotate():
    """Human review stage."""


@annotate.command("init")
@common_options
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--split", "split_name", default="test", show_default=True)
@click.option("--session-id", default="review-1", show_default=True)
@click.option("--phase", type=click.Choice(["calibration", "review"]), default="review")
@click.option("--annotators", required=True, help="Comma-separated annotator ids.")
@click.option("--items", "n_items", type=int, required=True)
@click.option("--per-annotator", type=int, required=True)
@click.option("--raters", "raters_per_item", type=int, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--gold", "gold_path", type=click.Path(exists=True), default=None,
              help='JSON {entry_id: {"verdict","reason"}} (calibration).')
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def annotate_init(ctx, dataset_dir, split_name, session_id, phase, annotators,
                  n_items, per_annotator, raters_per_item, seed, gold_path, out_path):
    """Create a session file with a balanced assignment."""
    _, by_split = read_dataset(dataset_dir)
    if split_name not in by_split:
        raise AnnotationError(f"unknown split {split_name!r}")
    pool = by_split[split_name]
    if n_items > len(pool):
        raise AnnotationError(f"asked for {n_items} items but the split has {len(pool)}")
    rng = random.Random(seed)
    items = sorted(rng.sample(pool, n_items))
    annotator_ids = [a.strip() for a in annotators.split(",") if a.strip()]
    assignment = assign_samples(items, annotator_ids, per_annotator, raters_per_item, seed=seed)
    gold = None
    if gold_path:
        raw = json.loads(Path(gold_path).read_text(encoding="utf-8"))
        gold = {
            k: Decision(entry_id=k, annotator_id="gold",
                        verdict=v["verdict"], reason=v["reason"])
            for k, v in raw.items()
        }
    session = Session(id=session_id, annotators=annotator_ids, items=items,
                      assignment=assignment, phase=phase, gold=gold)
    write_json(Path(out_path), session.as_dict())
    _log(ctx, "annotate-init", session=session_id, items=len(items),
         annotators=len(annotator_ids), out=out_path)


def _load_flags(path: str) -> dict[str, list[str]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    flags: dict[str, list[str]] = {}
    for item in data.get("flags", []):
        flags.setdefault(item["entry"], []).append(item["rule"])
    return flags


@annotate.command("serve")
@common_options
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--session", "session_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", default=None, type=click.Path(),
              help="Decision log (default: decisions.jsonl next to the session file).")
@click.option("--flags", "flags_path", type=click.Path(exists=True), default=None,
              help="Filter report JSON; its PII flags become queue badges.")
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8571, show_default=True)
@click.pass_context
def annotate_serve(ctx, dataset_dir, session_path, log_path, flags_path, ui_dir, host, port):
    """Run the review API (and UI, if a bundle is given)."""
    import uvicorn

    from .annotation.service import create_app

    session = Session.from_dict(json.loads(Path(session_path).read_text(encoding="utf-8")))
    entries, _ = read_dataset(dataset_dir)
    store = DecisionStore(log_path or Path(session_path).parent / "decisions.jsonl")
    flags = _load_flags(flags_path) if flags_path else None
    app = create_app(session, {e.id: e for e in entries}, store, flags=flags, ui_dir=ui_dir)
    _log(ctx, "annotate-serve", host=host, port=port, session=session.id)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@annotate.command("apply")
@common_options
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--policy", type=click.Choice(["any_remove", "majority"]), default="any_remove",
              show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def annotate_apply(ctx, dataset_dir, log_path, policy, out_dir):
    """Drop removed entries and rewrite the splits."""
    entries, by_split = read_dataset(dataset_dir)
    decisions = DecisionStore(log_path).decisions()
    kept_ids = set(apply_review([e.id for e in entries], decisions, policy=policy))
    out = Path(out_dir)
    counts = {}
    for name, ids in by_split.items():
        members = set(ids) & kept_ids
        rows = [e.as_dict() for e in entries if e.id in members]
        counts[name] = write_jsonl(out / f"{name}.jsonl", rows)
    write_json(out / "manifest.json", {
        "counts": counts,
        "total": sum(counts.values()),
        "policy": policy,
        "removed": len(entries) - len(kept_ids),
    })
    _log(ctx, "annotate-apply", policy=policy, kept=len(kept_ids),
         removed=len(entries) - len(kept_ids), out=out_dir)


@annotate.command("agreement")
@common_options
@click.option("--session", "session_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--by", type=click.Choice(["verdict", "reason"]), default="verdict")
@click.pass_context
def annotate_agreement(ctx, session_path, log_path, by):
    """Print Fleiss' kappa over the fully rated items."""
    session = Session.from_dict(json.loads(Path(session_path).read_text(encoding="utf-8")))
    decisions = DecisionStore(log_path).decisions()
    raters = session.raters_per_item()
    matrix = matrix_from_decisions(decisions, raters=raters, by=by)
    if not matrix.rows:
        click.echo(json.dumps({"kappa": None, "items": 0, "raters": raters,
                               "status": "pending"}))
        return
    kappa = fleiss_kappa(matrix)
    click.echo(json.dumps({"kappa": kappa, "items": len(matrix.rows),
                           "raters": raters, "status": "ok"}))


PIPELINE_STAGES = ("ingest", "extract", "filter", "build", "prompts", "eval")
_STAGE_PRODUCER = {
    "extract": ("ingest", "inventory"),
    "filter": ("extract", "records"),
    "build": ("filter", "kept"),
    "prompts": ("build", "test_split"),
    "eval": ("prompts", "prompts"),
}


@forge.command()
@common_options
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--stages", default=None,
              help="Comma-separated subset of ingest,extract,filter,build,prompts,eval.")
@click.option("--manifest", "manifest_override", type=click.Path(exists=True), default=None)
@click.option("--seed", "seed_override", type=int, default=None)
@click.option("--adapter", "adapter_override", default=None)
@click.option("--run-label", "run_label_override", default=None)
@click.option("--out-root", "out_root_override", type=click.Path(), default=None)
@click.pass_context
def pipeline(ctx, config_path, stages, manifest_override, seed_override,
             adapter_override, run_label_override, out_root_override):
    """Run the batch stages in order, resuming from existing artifacts."""
    config = json.loads(Path(config_path).read_text(encoding="utf-8"))
    if manifest_override:
        config["manifest"] = manifest_override
    if seed_override is not None:
        config["seed"] = seed_override
    if adapter_override:
        config["adapter"] = adapter_override
    if run_label_override:
        config["run_label"] = run_label_override
    if out_root_override:
        config["out_root"] = out_root_override
    if "manifest" not in config:
        raise DatasetError("pipeline config needs a 'manifest' path")

    root = Path(config.get("out_root", "out"))
    root.mkdir(parents=True, exist_ok=True)

    wanted = set(PIPELINE_STAGES)
    if stages:
        wanted = {s.strip() for s in stages.split(",") if s.strip()}
        unknown = wanted - set(PIPELINE_STAGES)
        if unknown:
            raise click.UsageError(f"unknown stages: {sorted(unknown)}")

    paths = {
        "inventory": root / "inventory.jsonl",
        "records": root / "records.jsonl",
        "kept": root / "kept.jsonl",
        "data": root / "data",
        "test_split": root / "data" / "test.jsonl",
        "prompts": root / "prompts.jsonl",
        "runs": root / "runs",
    }
    degraded = False

    def check_upstream(stage: str):
        producer, artifact_key = _STAGE_PRODUCER[stage]
        artifact = paths[artifact_key]
        if not artifact.exists():
            raise DatasetError(f"{stage} needs {artifact.name}; run {producer} first")

    def run_tolerating_degraded(cmd, **kwargs) -> bool:
        try:
            ctx.invoke(cmd, **kwargs)
        except click.exceptions.Exit as exc:
            if exc.exit_code != EXIT_DEGRADED:
                raise
            return True
        return False

    if "ingest" in wanted:
        ctx.invoke(ingest, manifest_path=config["manifest"],
                   out_path=str(paths["inventory"]),
                   exclude=tuple(config.get("exclude", ())))
    if "extract" in wanted:
        check_upstream("extract")
        degraded |= run_tolerating_degraded(
            extract, inventory_path=str(paths["inventory"]),
            manifest_path=config["manifest"],
            out_path=str(paths["records"]), report_path=None)
    if "filter" in wanted:
        check_upstream("filter")
        ctx.invoke(filter_cmd, records_path=str(paths["records"]),
                   out_path=str(paths["kept"]),
                   rules_path=config.get("rules"),
                   report_path=str(root / "filter_report.json"),
                   min_code_chars=None, max_code_chars=None)
    if "build" in wanted:
        check_upstream("build")
        ratio_conf = config.get("ratios")
        ctx.invoke(build, kept_path=str(paths["kept"]), out_dir=str(paths["data"]),
                   ratios=",".join(str(x) for x in ratio_conf) if ratio_conf else None,
                   seed=int(config.get("seed", 0)),
                   stratify_by_repo=bool(config.get("stratify_by_repo", False)),
                   include_kinds=config.get("include_kinds"),
                   stats_path=str(root / "stats.json"))
    if "prompts" in wanted:
        check_upstream("prompts")
        ctx.invoke(prompts, split_arg=str(paths["test_split"]),
                   dataset_dir=str(paths["data"]),
                   mode=config.get("mode", "zero"),
                   exemplars_path=config.get("exemplars"),
                   template_path=config.get("template"),
                   train_path=None,
                   out_path=str(paths["prompts"]), propose=False)
    if "eval" in wanted:
        check_upstream("eval")
        degraded |= run_tolerating_degraded(
            eval_cmd, prompts_path=str(paths["prompts"]),
            refs_path=str(paths["test_split"]),
            adapter_spec=config.get("adapter", "echo"),
            run_label=config.get("run_label", "echo:zero"),
            out_dir=str(paths["runs"]), no_postprocess=False,
            timestamps=False, use_f1=False)

    _log(ctx, "pipeline", stages=",".join(s for s in PIPELINE_STAGES if s in wanted),
         degraded=degraded)
    if degraded:
        ctx.exit(EXIT_DEGRADED)


def main(argv=None) -> int:
    try:
        result = forge.main(args=argv, standalone_mode=False)
        return result if isinstance(result, int) else EXIT_OK
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_VALIDATION
    except click.ClickException as exc:
        exc.show()
        return EXIT_VALIDATION
    except click.exceptions.Abort:
        return EXIT_RUNTIME
    except VALIDATION_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except SystemExit as exc:
        if exc.code is None:
            return EXIT_OK
        return exc.code if isinstance(exc.code, int) else EXIT_RUNTIME
    except OSError as exc:
        click.echo(f"runtime error: {exc}", err=True)
        return EXIT_RUNTIME
    except Exception as exc:
        click.echo(f"unexpected error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
