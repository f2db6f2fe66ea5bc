"""Dataset manifest: one row per video segment.

The on-disk format is a comma-delimited table with a header row (or an
equivalent JSON list). Paths are stored relative to the manifest file.
Component scores are packed as ``name=value`` pairs joined by semicolons,
ROI boxes as ``x:y:w:h``.

Loading validates everything it can see — unique ids, score ranges,
component/total consistency, file existence — and reports problems with the
offending line number. A missing audio path is not an error; it marks the
sound modality absent for that segment.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from neopain.errors import DataError
from neopain.fusion import (
    NIPS_COMPONENT_RANGES,
    NPASS_INDICATORS,
    NipsScore,
    NpassScore,
    binarize,
    nips_level,
    npass_level,
)
from neopain.video import RoiBox

CSV_COLUMNS = ("sample_id", "subject_id", "frames_dir", "audio_path", "scale",
               "components", "total", "face_box", "body_box")
SCALES = ("NIPS", "N-PASS")


@dataclass
class SampleRecord:
    """One segment: media locations plus its clinical scoring."""

    sample_id: str
    subject_id: str
    frames_dir: str | None
    audio_path: str | None
    scale: str
    components: dict[str, int]
    total: int
    face_box: RoiBox | None = None
    body_box: RoiBox | None = None

    def score_object(self):
        if self.scale == "NIPS":
            return NipsScore(**self.components)
        return NpassScore(**self.components)

    def level(self):
        if self.scale == "NIPS":
            return nips_level(self.total)
        return npass_level(self.total)

    def binary_label(self) -> str | None:
        """Two-class label, or None for excluded (sedation) samples."""
        return binarize(self.level())

    def indicator_score(self, indicator: str) -> int | None:
        """Level-1 training score for one indicator; NIPS rows only.

        Body movement collapses arms/legs to a single 0/1 flag (any limb
        moving counts as movement).
        """
        if self.scale != "NIPS":
            return None
        if indicator == "face":
            return self.components["face"]
        if indicator == "sound":
            return self.components["cry"]
        if indicator == "body":
            return 1 if (self.components["arms"] + self.components["legs"]) else 0
        raise DataError(f"unknown indicator {indicator!r}")

    def has_video(self) -> bool:
        return bool(self.frames_dir)

    def has_audio(self) -> bool:
        return bool(self.audio_path)


@dataclass
class Manifest:
    """Validated collection of sample records plus their root directory."""

    records: list[SampleRecord]
    root: Path = field(default_factory=Path)

    def __post_init__(self):
        self.by_id = {r.sample_id: r for r in self.records}

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def subjects(self) -> list[str]:
        seen = []
        for r in self.records:
            if r.subject_id not in seen:
                seen.append(r.subject_id)
        return seen

    def resolve(self, rel: str) -> Path:
        return self.root / rel


def _format_box(box: RoiBox | None) -> str:
    if box is None:
        return ""
    return f"{box.x}:{box.y}:{box.width}:{box.height}"


def _parse_box(text: str, kind: str, ctx: str) -> RoiBox | None:
    if not text:
        return None
    parts = text.split(":")
    if len(parts) != 4:
        raise DataError(f"{ctx}: box must be x:y:w:h, got {text!r}")
    try:
        x, y, w, h = (int(p) for p in parts)
    except ValueError as exc:
        raise DataError(f"{ctx}: non-integer box field in {text!r}") from exc
    return RoiBox(x, y, w, h, kind)


def _format_components(components: dict[str, int]) -> str:
    return ";".join(f"{k}={v}" for k, v in components.items())


def _parse_components(text: str, ctx: str) -> dict[str, int]:
    out = {}
    for part in filter(None, text.split(";")):
        if "=" not in part:
            raise DataError(f"{ctx}: component entry {part!r} is not name=value")
        name, _, value = part.partition("=")
        try:
            out[name.strip()] = int(value)
        except ValueError as exc:
            raise DataError(f"{ctx}: component {name!r} has non-integer value") from exc
    return out


def _validate_record(rec: SampleRecord, ctx: str, root: Path,
                     check_files: bool) -> None:
    if not rec.sample_id:
        raise DataError(f"{ctx}: empty sample id")
    if not rec.subject_id:
        raise DataError(f"{ctx}: empty subject id")
    if rec.scale not in SCALES:
        raise DataError(f"{ctx}: scale must be one of {SCALES}, got {rec.scale!r}")
    expected = (set(NIPS_COMPONENT_RANGES) if rec.scale == "NIPS"
                else set(NPASS_INDICATORS))
    if set(rec.components) != expected:
        raise DataError(
            f"{ctx}: {rec.scale} components must be {sorted(expected)}, "
            f"got {sorted(rec.components)}"
        )
    try:
        score = rec.score_object()
    except Exception as exc:
        raise DataError(f"{ctx}: {exc}") from exc
    if score.total != rec.total:
        raise DataError(
            f"{ctx}: components sum to {score.total} but total says {rec.total}"
        )
    rec.level()  # range check on the total
    if check_files:
        if rec.frames_dir and not (root / rec.frames_dir).is_dir():
            raise DataError(f"{ctx}: frames directory missing: {rec.frames_dir}")
        if rec.audio_path and not (root / rec.audio_path).is_file():
            raise DataError(f"{ctx}: audio file missing: {rec.audio_path}")


def _validate_manifest(records: list[SampleRecord], contexts: list[str],
                       root: Path, check_files: bool) -> None:
    seen = {}
    for rec, ctx in zip(records, contexts):
        if rec.sample_id in seen:
            raise DataError(
                f"{ctx}: duplicate sample id {rec.sample_id!r} "
                f"(first at {seen[rec.sample_id]})"
            )
        seen[rec.sample_id] = ctx
        _validate_record(rec, ctx, root, check_files)


def load_manifest(path, check_files: bool = True) -> Manifest:
    """Read and validate a manifest (CSV or JSON, chosen by extension)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    root = path.parent
    records, contexts = [], []
    if path.suffix.lower() == ".json":
        try:
            entries = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(entries, list):
            raise DataError(f"{path}: expected a JSON list of records")
        for i, entry in enumerate(entries):
            ctx = f"{path}:record {i}"
            records.append(SampleRecord(
                sample_id=str(entry.get("sample_id", "")),
                subject_id=str(entry.get("subject_id", "")),
                frames_dir=entry.get("frames_dir") or None,
                audio_path=entry.get("audio_path") or None,
                scale=entry.get("scale", ""),
                components={k: int(v) for k, v in entry.get("components", {}).items()},
                total=int(entry.get("total", -99)),
                face_box=_parse_box(entry.get("face_box", "") or "", "face", ctx),
                body_box=_parse_box(entry.get("body_box", "") or "", "body", ctx),
            ))
            contexts.append(ctx)
    else:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}:1: empty manifest") from None
            if tuple(header) != CSV_COLUMNS:
                raise DataError(
                    f"{path}:1: header must be {','.join(CSV_COLUMNS)}"
                )
            for lineno, row in enumerate(reader, start=2):
                ctx = f"{path}:{lineno}"
                if len(row) != len(CSV_COLUMNS):
                    raise DataError(
                        f"{ctx}: expected {len(CSV_COLUMNS)} fields, got {len(row)}"
                    )
                vals = dict(zip(CSV_COLUMNS, row))
                try:
                    total = int(vals["total"])
                except ValueError as exc:
                    raise DataError(f"{ctx}: total is not an integer") from exc
                records.append(SampleRecord(
                    sample_id=vals["sample_id"],
                    subject_id=vals["subject_id"],
                    frames_dir=vals["frames_dir"] or None,
                    audio_path=vals["audio_path"] or None,
                    scale=vals["scale"],
                    components=_parse_components(vals["components"], ctx),
                    total=total,
                    face_box=_parse_box(vals["face_box"], "face", ctx),
                    body_box=_parse_box(vals["body_box"], "body", ctx),
                ))
                contexts.append(ctx)
    _validate_manifest(records, contexts, root, check_files)
    return Manifest(records, root)


def save_manifest(manifest: Manifest, path) -> None:
    """Write CSV or JSON depending on the extension; inverse of load."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".json":
        entries = []
        for r in manifest.records:
            entries.append({
                "sample_id": r.sample_id,
                "subject_id": r.subject_id,
                "frames_dir": r.frames_dir or "",
                "audio_path": r.audio_path or "",
                "scale": r.scale,
                "components": r.components,
                "total": r.total,
                "face_box": _format_box(r.face_box),
                "body_box": _format_box(r.body_box),
            })
        path.write_text(json.dumps(entries, indent=2, sort_keys=True) + "\n")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in manifest.records:
            writer.writerow([
                r.sample_id, r.subject_id, r.frames_dir or "",
                r.audio_path or "", r.scale,
                _format_components(r.components), r.total,
                _format_box(r.face_box), _format_box(r.body_box),
            ])
