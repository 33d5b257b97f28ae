"""Generation driving and run scoring.

Model inference sits behind a small adapter; the harness only cares that some
process turns a prompt into text. Failed or missing generations become empty
outputs (a refusal must not improve a score), and a run with more than 10%
failures is marked degraded.
"""

from __future__ import annotations

import json
import re
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from ._jsonl import read_jsonl, write_json, write_jsonl
from .metrics import MetricReport, ScorePair, TokenizerConfig, score_pairs

FAILURE_DEGRADED_SHARE = 0.10
MIN_REF_COVERAGE = 0.90

SETTINGS = ("zero", "one", "few", "finetuned")

_DOC_BLOCK_RE = re.compile(r"/\*\*.*?\*/", re.DOTALL)


class AdapterError(ValueError):
    pass


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorAdapter:
    kind: str  # http_endpoint | external_command | outputs_file | echo
    location: str = ""
    timeout: float = 10.0
    max_retries: int = 3

    def __post_init__(self):
        if self.kind not in ("http_endpoint", "external_command", "outputs_file", "echo"):
            raise AdapterError(f"unknown adapter kind {self.kind!r}")
        if self.kind != "echo" and not self.location:
            raise AdapterError(f"adapter kind {self.kind!r} needs a location")


def parse_adapter_spec(spec: str) -> GeneratorAdapter:
    """`echo`, `file:out.jsonl`, `cmd:<shell command>`, or an http(s) URL."""
    if spec == "echo":
        return GeneratorAdapter(kind="echo")
    if spec.startswith("file:"):
        return GeneratorAdapter(kind="outputs_file", location=spec[len("file:"):])
    if spec.startswith("cmd:"):
        return GeneratorAdapter(kind="external_command", location=spec[len("cmd:"):])
    if spec.startswith("http://") or spec.startswith("https://"):
        return GeneratorAdapter(kind="http_endpoint", location=spec)
    raise AdapterError(f"cannot parse adapter spec {spec!r}")


@dataclass
class GenerationResult:
    outputs: dict[str, str]
    failures: int = 0
    degraded: bool = False
    notes: list[str] = field(default_factory=list)


def _read_outputs_file(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise AdapterError(f"outputs file {path} does not exist")
    table = {}
    for row in read_jsonl(p):
        if "id" not in row or "text" not in row:
            raise AdapterError(f"outputs file {path}: rows need 'id' and 'text'")
        table[row["id"]] = row["text"]
    return table


def _run_command(command: str, prompt_row: dict, timeout: float) -> str | None:
    try:
        proc = subprocess.run(
            shlex.split(command),
            input=json.dumps(prompt_row),
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except (OSError, subprocess.TimeoutExpired):
        return None
    if proc.returncode != 0:
        return None
    return proc.stdout


def _post_with_retries(client: httpx.Client, url: str, row: dict,
                       retries: int, notes: list[str]) -> str | None:
    delay = 0.1
    for attempt in range(retries + 1):
        try:
            resp = client.post(url, json={"id": row["id"], "prompt": row["prompt"]})
            if resp.status_code == 200:
                return resp.json().get("text", "")
            notes.append(f"{row['id']}: HTTP {resp.status_code}")
        except (httpx.HTTPError, json.JSONDecodeError) as exc:
            notes.append(f"{row['id']}: {type(exc).__name__}")
        if attempt < retries:
            time.sleep(delay)
            delay *= 2
    return None


def run_generation(
    prompts: list[dict],
    adapter: GeneratorAdapter,
    references: dict[str, str] | None = None,
) -> GenerationResult:
    """One output per prompt id; failures become empty strings."""
    ids = [row["id"] for row in prompts]
    if len(set(ids)) != len(ids):
        raise HarnessError("duplicate prompt ids")

    result = GenerationResult(outputs={})

    if adapter.kind == "echo":
        if references is None:
            raise AdapterError("echo adapter needs references")
        table = references
        getter = lambda row: table.get(row["id"])
    elif adapter.kind == "outputs_file":
        table = _read_outputs_file(adapter.location)
        getter = lambda row: table.get(row["id"])
    elif adapter.kind == "external_command":
        if not shlex.split(adapter.location):
            raise AdapterError("empty command")
        getter = lambda row: _run_command(adapter.location, row, adapter.timeout)
    else:  # http_endpoint
        client = httpx.Client(timeout=adapter.timeout)
        getter = lambda row: _post_with_retries(
            client, adapter.location, row, adapter.max_retries, result.notes
        )

    for row in prompts:
        text = getter(row)
        if text is None:
            result.failures += 1
            result.outputs[row["id"]] = ""
        else:
            result.outputs[row["id"]] = text

    if adapter.kind == "http_endpoint":
        client.close()

    if prompts and result.failures > FAILURE_DEGRADED_SHARE * len(prompts):
        result.degraded = True
    return result


def extract_doc_block(text: str) -> str:
    """First `/** ... */` block if the generation contains one, else raw."""
    m = _DOC_BLOCK_RE.search(text)
    return m.group(0) if m else text


def postprocess_outputs(outputs: dict[str, str]) -> dict[str, str]:
    return {k: extract_doc_block(v) for k, v in outputs.items()}


@dataclass
class RunRecord:
    run_id: str
    model_label: str
    setting: str
    outputs: dict[str, str] = field(default_factory=dict)
    report: MetricReport | None = None
    failures: int = 0
    degraded: bool = False
    postprocessed: bool = True
    timestamps: dict | None = None

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise HarnessError(f"unknown setting {self.setting!r}; expected one of {SETTINGS}")

    def as_dict(self) -> dict:
        d = {
            "run_id": self.run_id,
            "model_label": self.model_label,
            "setting": self.setting,
            "outputs": self.outputs,
            "failures": self.failures,
            "degraded": self.degraded,
            "postprocessed": self.postprocessed,
            "report": self.report.as_dict() if self.report else None,
        }
        if self.timestamps is not None:
            d["timestamps"] = self.timestamps
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        report = None
        if d.get("report"):
            r = d["report"]
            report = MetricReport(
                bleu=r["bleu"], r1=r["r1"], r2=r["r2"], rl=r["rl"], rlsum=r["rlsum"],
                n_pairs=r["n_pairs"], degenerate_pairs=r.get("degenerate_pairs", 0),
                config=r.get("config", {}),
            )
        return cls(
            run_id=d["run_id"],
            model_label=d["model_label"],
            setting=d["setting"],
            outputs=dict(d.get("outputs", {})),
            report=report,
            failures=int(d.get("failures", 0)),
            degraded=bool(d.get("degraded", False)),
            postprocessed=bool(d.get("postprocessed", True)),
            timestamps=d.get("timestamps"),
        )


def score_run(
    outputs: dict[str, str],
    references: dict[str, str],
    cfg: TokenizerConfig | None = None,
) -> MetricReport:
    """Score outputs against references in id order; absent outputs are empty."""
    if not references:
        raise HarnessError("no references to score against")
    overlap = set(outputs) & set(references)
    if not overlap:
        raise HarnessError("outputs and references share no ids")
    coverage = len(overlap) / len(references)
    if coverage < MIN_REF_COVERAGE:
        raise HarnessError(
            f"outputs cover {coverage:.0%} of references, below the {MIN_REF_COVERAGE:.0%} floor"
        )
    pairs = [
        ScorePair(candidate=outputs.get(rid, ""), reference=references[rid])
        for rid in sorted(references)
    ]
    return score_pairs(pairs, cfg)


@dataclass
class ComparisonRow:
    model_label: str
    setting: str
    bleu: float
    r1: float
    r2: float
    rl: float
    rlsum: float
    best_in_setting: bool = False


@dataclass
class ComparisonTable:
    rows: list[ComparisonRow] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def compare_runs(runs: list[RunRecord]) -> ComparisonTable:
    if not runs:
        raise HarnessError("need at least one run")
    table = ComparisonTable()
    latest: dict[tuple[str, str], RunRecord] = {}
    for run in runs:
        if run.report is None:
            raise HarnessError(f"run {run.run_id} has no report; score it first")
        key = (run.model_label, run.setting)
        if key in latest:
            table.warnings.append(
                f"duplicate run for {key}; keeping the later one ({run.run_id})"
            )
        latest[key] = run

    def order(key):
        model, setting = key
        return (SETTINGS.index(setting), model)

    for key in sorted(latest, key=order):
        run = latest[key]
        r = run.report
        table.rows.append(ComparisonRow(
            model_label=run.model_label, setting=run.setting,
            bleu=r.bleu, r1=r.r1, r2=r.r2, rl=r.rl, rlsum=r.rlsum,
        ))

    for setting in SETTINGS:
        group = [row for row in table.rows if row.setting == setting]
        if group:
            best = max(group, key=lambda row: row.bleu)
            best.best_in_setting = True
    return table


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def emit_report(table: ComparisonTable, out_dir: str | Path) -> dict[str, Path]:
    """Markdown + CSV + progression CSV; returns the written paths."""
    if not table.rows:
        raise HarnessError("empty comparison table")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    md_lines = [
        "| Setting | Model | BLEU | ROUGE-1 | ROUGE-2 | ROUGE-L | ROUGE-Lsum | Best |",
        "|---|---|---|---|---|---|---|---|",
    ]
    csv_lines = ["setting,model,bleu,rouge1,rouge2,rougeL,rougeLsum,best"]
    for row in table.rows:
        flag = "*" if row.best_in_setting else ""
        md_lines.append(
            f"| {row.setting} | {row.model_label} | {_fmt(row.bleu)} | {_fmt(row.r1)} "
            f"| {_fmt(row.r2)} | {_fmt(row.rl)} | {_fmt(row.rlsum)} | {flag} |"
        )
        csv_lines.append(
            f"{row.setting},{row.model_label},{_fmt(row.bleu)},{_fmt(row.r1)},"
            f"{_fmt(row.r2)},{_fmt(row.rl)},{_fmt(row.rlsum)},{flag}"
        )

    prog_lines = ["model,setting,setting_index,bleu,rougeLsum"]
    for model in sorted({r.model_label for r in table.rows}):
        for idx, setting in enumerate(SETTINGS):
            for row in table.rows:
                if row.model_label == model and row.setting == setting:
                    prog_lines.append(
                        f"{model},{setting},{idx},{_fmt(row.bleu)},{_fmt(row.rlsum)}"
                    )

    paths = {
        "markdown": out / "report.md",
        "csv": out / "report.csv",
        "progression": out / "progression.csv",
    }
    paths["markdown"].write_text("\n".join(md_lines) + "\n", encoding="utf-8")
    paths["csv"].write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    paths["progression"].write_text("\n".join(prog_lines) + "\n", encoding="utf-8")
    return paths


def write_run(run: RunRecord, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{run.run_id}.json"
    write_json(path, run.as_dict())
    return path


def read_run(path: str | Path) -> RunRecord:
    return RunRecord.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_outputs(outputs: dict[str, str], path: str | Path) -> int:
    rows = [{"id": k, "text": v} for k, v in sorted(outputs.items())]
    return write_jsonl(path, rows)
