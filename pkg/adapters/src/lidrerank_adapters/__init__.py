"""Model-driven corpus builders for multilingual n-best re-ranking.

Runs SLID/ASR models over an audio manifest to produce n-best corpus JSONL
(`extract_nbest`), then adds LM / written-LID / alignment feature scores
(`annotate_features`). Output conforms to the corpus format consumed by the
`lidrerank` package; the two packages share only that file format.
"""

from .annotate import ANNOTATABLE, AnnotateReport, annotate_features
from .audio import decode_payload, read_samples, synthesize_audio, write_wav
from .backends import (
    BACKEND_KINDS,
    MOCK_CHAR_LANGUAGES,
    MOCK_LANGUAGES,
    MockAsr,
    MockLm,
    MockSlid,
    MockUasr,
    MockWlid,
    get_backend,
    mock_text,
    mock_vocabulary,
    romanize,
)
from .errors import AdapterError, DecodeError, UnsupportedLanguageError
from .extract import ExtractReport, extract_nbest
from .manifest import AudioManifest, ManifestRow, load_manifest, save_manifest

__version__ = "0.1.0"

__all__ = [
    "ANNOTATABLE",
    "AdapterError",
    "AnnotateReport",
    "AudioManifest",
    "BACKEND_KINDS",
    "DecodeError",
    "ExtractReport",
    "MOCK_CHAR_LANGUAGES",
    "MOCK_LANGUAGES",
    "ManifestRow",
    "MockAsr",
    "MockLm",
    "MockSlid",
    "MockUasr",
    "MockWlid",
    "UnsupportedLanguageError",
    "annotate_features",
    "decode_payload",
    "extract_nbest",
    "get_backend",
    "load_manifest",
    "mock_text",
    "mock_vocabulary",
    "read_samples",
    "romanize",
    "save_manifest",
    "synthesize_audio",
    "write_wav",
    "__version__",
]
