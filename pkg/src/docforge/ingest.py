"""Repository manifests, source discovery, and the doc-comment prefilter."""

from __future__ import annotations

import fnmatch
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .masking import has_doc_comment, strip_literals

JAVA_EXT = ".java"
MAX_FILE_BYTES = 2 * 1024 * 1024

KEEP_DOC = "doc_comment_found"
KEEP_PACKAGE_INFO = "package_info"
DISCARD_NO_DOC = "no_doc_comment"


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class RepoSource:
    name: str
    root: str
    license_id: str
    revision: str | None = None


@dataclass
class RepoManifest:
    entries: list[RepoSource]
    schema_version: int = 1


@dataclass
class SourceFile:
    repo: str
    rel_path: str
    content: str
    byte_len: int

    @property
    def is_package_info(self) -> bool:
        base = self.rel_path.rsplit("/", 1)[-1]
        return base in ("package-info.java", "module-info.java")


def load_manifest(path: str | Path) -> RepoManifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(data, dict) or "repos" not in data:
        raise ManifestError(f"{path}: manifest must be an object with a 'repos' list")
    unknown = set(data) - {"repos", "schema_version"}
    if unknown:
        raise ManifestError(f"{path}: unknown manifest keys: {sorted(unknown)}")
    entries = []
    for i, raw in enumerate(data["repos"]):
        missing = {"name", "root", "license_id"} - set(raw)
        if missing:
            raise ManifestError(f"{path}: repos[{i}] missing fields: {sorted(missing)}")
        extra = set(raw) - {"name", "root", "license_id", "revision"}
        if extra:
            raise ManifestError(f"{path}: repos[{i}] unknown fields: {sorted(extra)}")
        if not str(raw["license_id"]).strip():
            raise ManifestError(f"{path}: repos[{i}] ({raw['name']}): license_id must be non-empty")
        root = Path(raw["root"])
        if not root.is_absolute():
            root = path.parent / root  # relative roots resolve against the manifest
        entries.append(
            RepoSource(
                name=str(raw["name"]),
                root=str(root),
                license_id=str(raw["license_id"]),
                revision=raw.get("revision"),
            )
        )
    names = [e.name for e in entries]
    if len(names) != len(set(names)):
        raise ManifestError(f"{path}: repo names must be unique")
    roots = [os.path.normpath(e.root) for e in entries]
    if len(roots) != len(set(roots)):
        raise ManifestError(f"{path}: repo roots must be distinct")
    return RepoManifest(entries=entries, schema_version=int(data.get("schema_version", 1)))


def _walk_java_files(root: Path) -> list[Path]:
    found = []
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        dirnames.sort()
        for fname in sorted(filenames):
            if not fname.endswith(JAVA_EXT):
                continue
            p = Path(dirpath) / fname
            if p.is_symlink():
                continue
            found.append(p)
    return found


def discover_sources(
    manifest: RepoManifest,
    excludes: tuple[str, ...] = (),
    warnings: list[str] | None = None,
) -> list[SourceFile]:
    """All Java files under the manifest roots, ordered (repo, rel_path).

    Oversized and excluded files are skipped (with a warning); undecodable
    bytes are replaced, never fatal.
    """
    sink = warnings if warnings is not None else []
    out: list[SourceFile] = []
    for repo in sorted(manifest.entries, key=lambda e: e.name):
        root = Path(repo.root)
        if not root.is_dir():
            raise ManifestError(f"repo {repo.name}: root {root} is not a readable directory")
        files = []
        for p in _walk_java_files(root):
            rel = p.relative_to(root).as_posix()
            if any(fnmatch.fnmatch(rel, pattern) for pattern in excludes):
                sink.append(f"{repo.name}:{rel}: excluded by pattern")
                continue
            raw = p.read_bytes()
            if len(raw) > MAX_FILE_BYTES:
                sink.append(f"{repo.name}:{rel}: skipped, {len(raw)} bytes exceeds cap")
                continue
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError:
                text = raw.decode("utf-8", errors="replace")
                sink.append(f"{repo.name}:{rel}: invalid UTF-8, bytes replaced")
            files.append(SourceFile(repo=repo.name, rel_path=rel, content=text, byte_len=len(raw)))
        files.sort(key=lambda sf: sf.rel_path)
        out.extend(files)
    seen = set()
    for sf in out:
        key = (sf.repo, sf.rel_path)
        if key in seen:
            raise ManifestError(f"duplicate source file {key}")
        seen.add(key)
    return out


def prefilter(sf: SourceFile) -> tuple[bool, str]:
    """Keep iff the masked text still contains a doc-comment opener."""
    if not has_doc_comment(strip_literals(sf.content)):
        return False, DISCARD_NO_DOC
    if sf.is_package_info:
        return True, KEEP_PACKAGE_INFO
    return True, KEEP_DOC


@dataclass
class IngestResult:
    files: list[SourceFile] = field(default_factory=list)  # kept files only
    inventory: list[dict] = field(default_factory=list)  # one row per discovered file
    warnings: list[str] = field(default_factory=list)
    licenses: dict = field(default_factory=dict)  # repo -> license_id


def run_ingest(manifest: RepoManifest, excludes: tuple[str, ...] = ()) -> IngestResult:
    result = IngestResult(licenses={e.name: e.license_id for e in manifest.entries})
    sources = discover_sources(manifest, excludes=excludes, warnings=result.warnings)
    for sf in sources:
        kept, reason = prefilter(sf)
        result.inventory.append(
            {
                "repo": sf.repo,
                "rel_path": sf.rel_path,
                "byte_len": sf.byte_len,
                "kept": kept,
                "reason": reason,
            }
        )
        if kept:
            result.files.append(sf)
    return result
