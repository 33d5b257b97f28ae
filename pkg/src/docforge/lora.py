"""Exact trainable-parameter accounting for low-rank adapters.

Counts only the elements of the two low-rank factors injected per targeted
projection matrix: a d_in x d_out projection adapted at rank r contributes
r * (d_in + d_out) parameters per layer. Architecture dimensions live in
bundled JSON data files, one per model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

TARGET_PROJECTIONS = ("q_proj", "k_proj", "v_proj", "o_proj", "gate_proj", "up_proj", "down_proj")

# Published reference counts at rank 16 over all seven projections.
REFERENCE_COUNTS = {
    "LLaMA-3.1-8B": 41_943_040,
    "Mistral-7B-v0.3": 41_943_040,
    "Qwen-2.5-Coder-3B": 29_933_568,
    "Gemma-2-9B": 54_018_048,
    "Phi-3.5-Mini-Instruct": 29_884_416,
}


class LoraSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Projection:
    name: str
    d_in: int
    d_out: int


@dataclass(frozen=True)
class ArchitectureSpec:
    model_label: str
    num_layers: int
    projections: tuple[Projection, ...]

    def __post_init__(self):
        if self.num_layers < 1:
            raise LoraSpecError(f"{self.model_label}: num_layers must be >= 1")
        names = [p.name for p in self.projections]
        if len(names) != len(set(names)):
            raise LoraSpecError(f"{self.model_label}: duplicate projection names")
        for p in self.projections:
            if p.d_in < 1 or p.d_out < 1:
                raise LoraSpecError(f"{self.model_label}: projection {p.name} has non-positive dims")

    @classmethod
    def from_dict(cls, data: dict) -> "ArchitectureSpec":
        projections = tuple(
            Projection(name=p["name"], d_in=int(p["d_in"]), d_out=int(p["d_out"]))
            for p in data["projections"]
        )
        return cls(model_label=data["model_label"], num_layers=int(data["num_layers"]), projections=projections)

    @classmethod
    def load(cls, path: str | Path) -> "ArchitectureSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class LoraConfig:
    rank: int = 16
    alpha: float = 16.0
    targets: tuple[str, ...] = TARGET_PROJECTIONS

    def __post_init__(self):
        if self.rank < 0:
            raise LoraSpecError("rank must be >= 0")
        if self.alpha <= 0:
            raise LoraSpecError("alpha must be > 0")


def lora_params(arch: ArchitectureSpec, cfg: LoraConfig) -> int:
    """Trainable parameter count: num_layers * sum over targets of r*(d_in+d_out)."""
    by_name = {p.name: p for p in arch.projections}
    per_layer = 0
    for target in cfg.targets:
        if target not in by_name:
            raise LoraSpecError(f"target {target!r} not present in {arch.model_label} spec")
        p = by_name[target]
        per_layer += cfg.rank * (p.d_in + p.d_out)
    return arch.num_layers * per_layer


def bundled_specs() -> list[ArchitectureSpec]:
    """All architecture specs shipped with the package, sorted by label."""
    specs = []
    root = resources.files("docforge").joinpath("data/architectures")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            specs.append(ArchitectureSpec.from_dict(json.loads(entry.read_text(encoding="utf-8"))))
    return specs


def verify_reference_counts(
    specs: list[ArchitectureSpec] | None = None, cfg: LoraConfig | None = None
) -> list[dict]:
    """Compare computed counts against the published per-model integers.

    Returns one row per model: {model, expected, got, ok}. Exact equality.
    """
    specs = specs if specs is not None else bundled_specs()
    cfg = cfg or LoraConfig()
    rows = []
    by_label = {s.model_label: s for s in specs}
    for label, expected in REFERENCE_COUNTS.items():
        spec = by_label.get(label)
        if spec is None:
            rows.append({"model": label, "expected": expected, "got": None, "ok": False})
            continue
        got = lora_params(spec, cfg)
        rows.append({"model": label, "expected": expected, "got": got, "ok": got == expected})
    return rows


@dataclass
class TrainingConfig:
    """Fine-tuning run configuration with the shipped defaults."""

    batch_size_train: int = 8
    batch_size_validation: int = 2
    gradient_accumulation_steps: int = 4
    optimizer: str = "AdamW"
    learning_rate: float = 2e-4
    evaluation_strategy: str = "steps"
    evaluation_steps: int = 5
    scheduler: str = "linear"
    weight_decay: float = 0.01
    epochs: int = 5
    _numeric: tuple = field(
        default=(
            "batch_size_train",
            "batch_size_validation",
            "gradient_accumulation_steps",
            "learning_rate",
            "evaluation_steps",
            "weight_decay",
            "epochs",
        ),
        repr=False,
    )

    def __post_init__(self):
        for name in self._numeric:
            value = getattr(self, name)
            if not value > 0:
                raise LoraSpecError(f"{name} must be positive, got {value!r}")

    def as_dict(self) -> dict:
        return {
            "batch_size_train": self.batch_size_train,
            "batch_size_validation": self.batch_size_validation,
            "gradient_accumulation_steps": self.gradient_accumulation_steps,
            "optimizer": self.optimizer,
            "learning_rate": self.learning_rate,
            "evaluation_strategy": self.evaluation_strategy,
            "evaluation_steps": self.evaluation_steps,
            "scheduler": self.scheduler,
            "weight_decay": self.weight_decay,
            "epochs": self.epochs,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingConfig":
        known = {f for f in cls.__dataclass_fields__ if not f.startswith("_")}
        unknown = set(data) - known
        if unknown:
            raise LoraSpecError(f"unknown training config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "TrainingConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), indent=2) + "\n", encoding="utf-8")


def default_training_config_path() -> Path:
    return Path(str(resources.files("docforge").joinpath("data/training_default.json")))
