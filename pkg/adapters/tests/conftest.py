import pytest

from lidrerank_adapters import (
    AudioManifest,
    ManifestRow,
    mock_text,
    save_manifest,
    synthesize_audio,
)

TOY_LANGUAGES = ("eng", "deu", "fra", "cmn")


def build_toy_manifest(root, n=10, languages=TOY_LANGUAGES):
    """Write n synthesized WAVs plus their TSV manifest; returns the TSV path."""
    audio_dir = root / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(n):
        language = languages[i % len(languages)]
        text = mock_text(language, "ref", i, words=3 + i % 3)
        wav = audio_dir / f"utt{i:02d}.wav"
        synthesize_audio(wav, language, text)
        rows.append(ManifestRow(f"utt{i:02d}", wav, language, text))
    manifest_path = root / "manifest.tsv"
    save_manifest(AudioManifest(tuple(rows)), manifest_path)
    return manifest_path


@pytest.fixture(scope="session")
def toy_manifest_path(tmp_path_factory):
    return build_toy_manifest(tmp_path_factory.mktemp("toy"))
