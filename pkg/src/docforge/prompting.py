"""Prompt rendering for the zero/one/few-shot settings.

Rendering is pure string assembly: same entry, template, and shots give the
same bytes. Exemplars are fixed per run; the target entry must never be one
of them, and its own documentation never enters the prompt.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from pathlib import Path

from .dataset import DatasetEntry

SHOT_COUNTS = {"zero": 0, "one": 1, "few": 3}


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    role_preamble: str = "You are a senior Java developer."
    instruction: str = "Write the Javadoc comment for the following code."
    input_marker: str = "### Code:"
    output_marker: str = "### Javadoc:"
    context_fields: tuple[str, ...] = ("package", "enclosing_class")

    def __post_init__(self):
        if not self.input_marker or not self.output_marker:
            raise PromptError("markers must be non-empty")
        if self.input_marker == self.output_marker:
            raise PromptError("input and output markers must differ")
        unknown = set(self.context_fields) - {"package", "enclosing_class"}
        if unknown:
            raise PromptError(f"unknown context fields: {sorted(unknown)}")


DEFAULT_TEMPLATE = PromptTemplate()


@dataclass(frozen=True)
class ShotConfig:
    mode: str = "zero"
    exemplar_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mode not in SHOT_COUNTS:
            raise PromptError(f"unknown mode {self.mode!r}")
        want = SHOT_COUNTS[self.mode]
        if len(self.exemplar_ids) != want:
            raise PromptError(
                f"mode {self.mode!r} needs exactly {want} exemplars, got {len(self.exemplar_ids)}"
            )
        if len(set(self.exemplar_ids)) != len(self.exemplar_ids):
            raise PromptError("duplicate exemplar ids")


def load_template(path: str | Path) -> PromptTemplate:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {"role_preamble", "instruction", "input_marker", "output_marker", "context_fields"}
    unknown = set(data) - known
    if unknown:
        raise PromptError(f"unknown template fields: {sorted(unknown)}")
    if "context_fields" in data:
        data["context_fields"] = tuple(data["context_fields"])
    return PromptTemplate(**data)


def _context_lines(entry: DatasetEntry, template: PromptTemplate) -> list[str]:
    lines = []
    if "package" in template.context_fields and entry.package:
        lines.append(f"Package: {entry.package}")
    if "enclosing_class" in template.context_fields and entry.enclosing_class:
        lines.append(f"Class: {entry.enclosing_class}")
    return lines


def _input_block(entry: DatasetEntry, template: PromptTemplate) -> list[str]:
    return _context_lines(entry, template) + [template.input_marker, entry.code]


def render_prompt(
    entry: DatasetEntry,
    template: PromptTemplate,
    shots: ShotConfig,
    train_index: dict[str, DatasetEntry],
) -> str:
    exemplars = []
    for ex_id in shots.exemplar_ids:
        if ex_id == entry.id:
            raise PromptError(f"entry {entry.id} appears among its own exemplars")
        if ex_id not in train_index:
            raise PromptError(f"exemplar {ex_id} not found in the train split")
        exemplars.append(train_index[ex_id])

    parts = [template.role_preamble, template.instruction]
    for ex in exemplars:
        parts.extend(_input_block(ex, template))
        parts.append(template.output_marker)
        parts.append(ex.documentation)
    parts.extend(_input_block(entry, template))
    return "\n".join(parts) + "\n"


def render_run(
    entries: list[DatasetEntry],
    template: PromptTemplate,
    shots: ShotConfig,
    train_index: dict[str, DatasetEntry],
) -> list[dict]:
    rows = []
    for entry in entries:
        try:
            rows.append({"id": entry.id, "prompt": render_prompt(entry, template, shots, train_index)})
        except PromptError as exc:
            raise PromptError(f"entry {entry.id}: {exc}") from exc
    return rows


def propose_exemplars(train_entries: list[DatasetEntry], k: int = 3) -> list[str]:
    """Suggest exemplar candidates: around median code length, tags present.

    A convenience for building the shots config; the choice stays explicit in
    the config file.
    """
    if len(train_entries) < k:
        raise PromptError(f"need at least {k} train entries")
    med = statistics.median(len(e.code) for e in train_entries)

    def score(e: DatasetEntry):
        tagful = "@param" in e.documentation or "@return" in e.documentation
        return (0 if tagful else 1, abs(len(e.code) - med), e.id)

    ranked = sorted(train_entries, key=score)
    return [e.id for e in ranked[:k]]
