"""Audio manifest: the TSV input listing utterances to run models over.

One row per utterance with four tab-separated columns:

    id <TAB> audio path <TAB> reference language <TAB> reference text

An optional header row with exactly those column names is skipped. Relative
audio paths are resolved against the manifest file's directory at load time.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import AdapterError

COLUMNS = ("id", "audio_path", "ref_language", "ref_text")


@dataclass(frozen=True)
class ManifestRow:
    id: str
    audio_path: Path
    ref_language: str
    ref_text: str


@dataclass(frozen=True)
class AudioManifest:
    rows: tuple[ManifestRow, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for row in self.rows:
            if not row.id:
                raise AdapterError("manifest row has an empty id")
            if row.id in seen:
                raise AdapterError(f"duplicate utterance id {row.id!r}")
            seen.add(row.id)
            if not row.ref_language or any(ch.isspace() for ch in row.ref_language):
                raise AdapterError(f"{row.id}: bad reference language {row.ref_language!r}")

    def __len__(self) -> int:
        return len(self.rows)

    def missing_audio(self) -> list[ManifestRow]:
        return [row for row in self.rows if not row.audio_path.is_file()]


def load_manifest(path: str | Path) -> AudioManifest:
    path = Path(path)
    base = path.parent
    rows: list[ManifestRow] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if lineno == 1 and tuple(fields) == COLUMNS:
                continue
            if len(fields) != 4:
                raise AdapterError(
                    f"{path}:{lineno}: expected 4 tab-separated columns, got {len(fields)}"
                )
            uid, audio, language, text = fields
            audio_path = Path(audio)
            if not audio_path.is_absolute():
                audio_path = base / audio_path
            rows.append(ManifestRow(uid, audio_path, language, text))
    try:
        return AudioManifest(tuple(rows))
    except AdapterError as exc:
        raise AdapterError(f"{path}: {exc}") from None


def save_manifest(manifest: AudioManifest, path: str | Path) -> None:
    lines = ["\t".join(COLUMNS)]
    for row in manifest.rows:
        for field in (row.id, row.ref_language, row.ref_text):
            if "\t" in field or "\n" in field:
                raise AdapterError(f"{row.id}: field contains a tab or newline")
        lines.append("\t".join((row.id, str(row.audio_path), row.ref_language, row.ref_text)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
