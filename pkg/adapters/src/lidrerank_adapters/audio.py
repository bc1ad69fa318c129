"""WAV file I/O and the payload codec used by the mock model family.

Audio is mono 16 kHz 16-bit PCM read and written with the stdlib ``wave``
module. The mock backends need audio whose "content" they can recover, so
``synthesize_audio`` embeds a ``language<TAB>text`` payload directly in the
samples behind a small magic header; ``decode_payload`` recovers it and
returns None for any WAV that does not carry one (real recordings).
"""

from __future__ import annotations

import hashlib
import struct
import wave
from pathlib import Path

SAMPLE_RATE = 16000
_MAGIC = 0x4C49  # header sample marking an embedded payload
_MAX_PAYLOAD = 4096


def write_wav(path: str | Path, samples: list[int], *, rate: int = SAMPLE_RATE) -> None:
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(struct.pack(f"<{len(samples)}h", *samples))


def read_samples(path: str | Path) -> list[int]:
    with wave.open(str(path), "rb") as fh:
        if fh.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM, got {8 * fh.getsampwidth()}-bit")
        frames = fh.readframes(fh.getnframes())
    count = len(frames) // 2
    return list(struct.unpack(f"<{count}h", frames[: 2 * count]))


def _to_int16(value: int) -> int:
    return value - 0x10000 if value > 0x7FFF else value


def _to_uint16(sample: int) -> int:
    return sample + 0x10000 if sample < 0 else sample


def synthesize_audio(path: str | Path, language: str, text: str) -> None:
    """Write a WAV whose samples embed ``language`` and ``text``.

    The mock SLID/ASR/alignment backends decode this payload in place of
    running signal processing; decoration samples derived from the payload
    hash give each file a distinct, content-dependent tail.
    """
    payload = f"{language}\t{text}".encode("utf-8")
    if len(payload) > _MAX_PAYLOAD:
        raise ValueError(f"payload too large ({len(payload)} bytes)")
    padded = payload + b"\x00" * (len(payload) % 2)
    samples = [_to_int16(_MAGIC), len(payload)]
    for i in range(0, len(padded), 2):
        samples.append(_to_int16(padded[i] | (padded[i + 1] << 8)))
    digest = hashlib.sha256(payload).digest()
    for i in range(0, 64, 2):
        word = digest[i % 32] | (digest[(i + 1) % 32] << 8)
        samples.append(_to_int16(word % 16001 - 8000))
    write_wav(path, samples)


def decode_payload(samples: list[int]) -> tuple[str, str] | None:
    """Recover ``(language, text)`` from synthesized audio, else None."""
    if len(samples) < 2 or _to_uint16(samples[0]) != _MAGIC:
        return None
    length = _to_uint16(samples[1])
    if not 0 < length <= _MAX_PAYLOAD:
        return None
    n_words = (length + 1) // 2
    if len(samples) < 2 + n_words:
        return None
    raw = bytearray()
    for sample in samples[2 : 2 + n_words]:
        word = _to_uint16(sample)
        raw.append(word & 0xFF)
        raw.append(word >> 8)
    try:
        payload = raw[:length].decode("utf-8")
    except UnicodeDecodeError:
        return None
    if "\t" not in payload:
        return None
    language, text = payload.split("\t", 1)
    return language, text
