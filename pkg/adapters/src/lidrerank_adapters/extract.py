"""N-best extraction: SLID ranking plus language-conditioned transcription.

For each manifest utterance the SLID backend proposes the top-n languages
with log-probabilities, the ASR backend decodes one transcript per proposed
language, and the result becomes one corpus JSONL row whose candidates carry
"slid", "asr", and "len" features. Decode failures skip the utterance and
are recorded; everything else lands in the output corpus.

Progress is checkpointed per utterance to an append-only JSONL file, so an
interrupted run resumes where it stopped: already-extracted utterances are
reused verbatim, previously failed ones are retried. The final corpus is
merged from the progress file in manifest order, making the on-disk result
independent of processing order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .audio import read_samples
from .backends import AsrBackend, SlidBackend
from .errors import AdapterError, DecodeError, UnsupportedLanguageError
from .manifest import AudioManifest, ManifestRow


@dataclass(frozen=True)
class ExtractReport:
    total: int
    extracted: int
    skipped: tuple[tuple[str, str], ...] = ()  # (utterance id, reason)
    reused: int = 0


@dataclass
class _Progress:
    path: Path
    entries: dict[str, dict] = field(default_factory=dict)

    @classmethod
    def open(cls, path: Path) -> "_Progress":
        progress = cls(path)
        if path.exists():
            with open(path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        entry = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise AdapterError(f"{path}:{lineno}: malformed progress entry: {exc}")
                    progress.entries[entry["id"]] = entry  # last entry per id wins
        return progress

    def append(self, entry: dict) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n")
            fh.flush()
        self.entries[entry["id"]] = entry


def _extract_one(row: ManifestRow, slid: SlidBackend, asr: AsrBackend, n: int) -> dict:
    samples = read_samples(row.audio_path)
    ranked = slid.rank_languages(samples, min(n, len(slid.languages)))
    candidates = []
    for rank, (language, log_prob) in enumerate(ranked, 1):
        transcript, loglik = asr.transcribe(samples, language)
        candidates.append(
            {
                "language": language,
                "transcript": transcript,
                "slid_rank": rank,
                "features": {
                    "asr": loglik,
                    "len": float(len(transcript)),
                    "slid": log_prob,
                },
            }
        )
    return {
        "id": row.id,
        "ref_language": row.ref_language,
        "ref_text": row.ref_text,
        "audio_ref": str(row.audio_path),
        "candidates": candidates,
    }


def extract_nbest(
    manifest: AudioManifest,
    slid: SlidBackend,
    asr: AsrBackend,
    n: int,
    out_path: str | Path,
    *,
    progress_path: str | Path | None = None,
) -> ExtractReport:
    """Run SLID + conditioned ASR over the manifest and write a corpus JSONL."""
    if n < 1:
        raise AdapterError(f"n must be >= 1, got {n}")
    missing = manifest.missing_audio()
    if missing:
        listing = ", ".join(f"{row.id} -> {row.audio_path}" for row in missing[:5])
        raise AdapterError(f"{len(missing)} audio file(s) missing: {listing}")

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if progress_path is None:
        progress_path = out_path.with_name(out_path.name + ".progress")
    progress = _Progress.open(Path(progress_path))

    reused = 0
    for row in manifest.rows:
        done = progress.entries.get(row.id)
        if done is not None and done.get("status") == "ok":
            reused += 1
            continue
        try:
            utterance = _extract_one(row, slid, asr, n)
        except (DecodeError, UnsupportedLanguageError, OSError, ValueError) as exc:
            progress.append({"id": row.id, "status": "failed", "error": str(exc)})
            continue
        progress.append({"id": row.id, "status": "ok", "utterance": utterance})

    lines = []
    skipped = []
    for row in manifest.rows:
        entry = progress.entries[row.id]
        if entry["status"] == "ok":
            lines.append(json.dumps(entry["utterance"], ensure_ascii=False, sort_keys=True))
        else:
            skipped.append((row.id, entry["error"]))
    out_path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return ExtractReport(
        total=len(manifest),
        extracted=len(lines),
        skipped=tuple(skipped),
        reused=reused,
    )
