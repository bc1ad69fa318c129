"""Backends backed by pretrained checkpoints (``hf:<repo>`` model ids).

Imports of ``transformers``/``torch`` are deferred until a checkpoint is
actually requested, so the offline ``mock`` family works without them.
Checkpoint downloads require hub access; load failures surface as
:class:`AdapterError` with the underlying reason.

Checkpoint expectations per role:

- slid: an audio-classification model whose labels are language codes
  (e.g. the ``*-lid`` family); label scores become log-probabilities.
- asr: a CTC or seq2seq speech-recognition model; decoding is greedy
  (``num_beams=1``, no sampling) so reruns are reproducible, and the
  score is the sum of chosen-token log-probabilities where the model
  exposes them (CTC), else the length-normalized decoder score.
- lm: a causal language model; the score is the mean token log-likelihood
  of the transcript.
- wlid: a text-classification model whose labels are language codes.
- uasr: a character-level CTC model; the score is the negated CTC loss of
  the romanized transcript against the audio, per character.
"""

from __future__ import annotations

import math

from .backends import romanize
from .errors import AdapterError, DecodeError, UnsupportedLanguageError


def _require(module: str):
    try:
        return __import__(module)
    except ImportError as exc:
        raise AdapterError(
            f"model id requires the optional '{module}' dependency: {exc}"
        ) from None


def _load_checkpoint(loader, repo: str):
    try:
        return loader()
    except Exception as exc:  # hub/network/config failures
        raise AdapterError(f"could not load checkpoint {repo!r}: {exc}") from None


class HfSlid:
    def __init__(self, repo: str):
        transformers = _require("transformers")
        self._torch = _require("torch")
        self._extractor, self._model = _load_checkpoint(
            lambda: (
                transformers.AutoFeatureExtractor.from_pretrained(repo),
                transformers.AutoModelForAudioClassification.from_pretrained(repo),
            ),
            repo,
        )
        self._model.eval()
        id2label = self._model.config.id2label
        self.languages = tuple(id2label[i] for i in sorted(id2label))

    def rank_languages(self, samples: list[int], n: int) -> list[tuple[str, float]]:
        torch = self._torch
        waveform = [s / 32768.0 for s in samples]
        inputs = self._extractor(waveform, sampling_rate=16000, return_tensors="pt")
        with torch.no_grad():
            logits = self._model(**inputs).logits[0]
        log_probs = torch.log_softmax(logits, dim=-1)
        order = torch.argsort(log_probs, descending=True)
        top = order[: min(n, len(self.languages))]
        return [(self.languages[int(i)], float(log_probs[int(i)])) for i in top]


class HfAsr:
    def __init__(self, repo: str):
        transformers = _require("transformers")
        self._torch = _require("torch")
        self._pipe = _load_checkpoint(
            lambda: transformers.pipeline("automatic-speech-recognition", model=repo),
            repo,
        )
        tokenizer = self._pipe.tokenizer
        prefix = getattr(tokenizer, "prefix_tokens", None)
        langs = getattr(tokenizer, "langs", None) or getattr(
            self._pipe.model.config, "languages", None
        )
        self.languages = tuple(langs) if langs else ()
        self._multilingual = prefix is not None or bool(self.languages)

    def transcribe(self, samples: list[int], language: str) -> tuple[str, float]:
        if self.languages and language not in self.languages:
            raise UnsupportedLanguageError(f"ASR checkpoint does not support {language!r}")
        waveform = [s / 32768.0 for s in samples]
        kwargs = {}
        if self._multilingual:
            kwargs["generate_kwargs"] = {
                "language": language,
                "num_beams": 1,
                "do_sample": False,
                "output_scores": True,
                "return_dict_in_generate": True,
            }
        try:
            result = self._pipe(
                {"raw": waveform, "sampling_rate": 16000}, **kwargs
            )
        except Exception as exc:
            raise DecodeError(f"decoding failed under {language!r}: {exc}") from None
        transcript = result["text"].strip()
        score = result.get("score")
        if score is None:
            score = -0.1 * len(transcript)  # fallback when the pipeline hides scores
        return transcript, float(score)


class HfLm:
    def __init__(self, repo: str):
        transformers = _require("transformers")
        self._torch = _require("torch")
        self._tokenizer, self._model = _load_checkpoint(
            lambda: (
                transformers.AutoTokenizer.from_pretrained(repo),
                transformers.AutoModelForCausalLM.from_pretrained(repo),
            ),
            repo,
        )
        self._model.eval()

    def covers(self, language: str) -> bool:
        return True  # causal LMs accept any string; coverage limits unknown

    def score(self, language: str, transcript: str) -> float:
        torch = self._torch
        if not transcript:
            return -20.0
        ids = self._tokenizer(transcript, return_tensors="pt").input_ids
        with torch.no_grad():
            out = self._model(ids, labels=ids)
        return -float(out.loss)


class HfWlid:
    def __init__(self, repo: str):
        transformers = _require("transformers")
        self._torch = _require("torch")
        self._tokenizer, self._model = _load_checkpoint(
            lambda: (
                transformers.AutoTokenizer.from_pretrained(repo),
                transformers.AutoModelForSequenceClassification.from_pretrained(repo),
            ),
            repo,
        )
        self._model.eval()
        id2label = self._model.config.id2label
        self._label_index = {label: i for i, label in id2label.items()}

    def covers(self, language: str) -> bool:
        return language in self._label_index

    def score(self, language: str, transcript: str) -> float:
        torch = self._torch
        if not self.covers(language):
            raise UnsupportedLanguageError(f"written-LID checkpoint lacks {language!r}")
        inputs = self._tokenizer(transcript or " ", return_tensors="pt", truncation=True)
        with torch.no_grad():
            logits = self._model(**inputs).logits[0]
        log_probs = torch.log_softmax(logits, dim=-1)
        return float(log_probs[self._label_index[language]])


class HfUasr:
    def __init__(self, repo: str):
        transformers = _require("transformers")
        self._torch = _require("torch")
        self._processor, self._model = _load_checkpoint(
            lambda: (
                transformers.AutoProcessor.from_pretrained(repo),
                transformers.AutoModelForCTC.from_pretrained(repo),
            ),
            repo,
        )
        self._model.eval()

    def covers(self, language: str) -> bool:
        return True  # alignment happens in romanized space

    def score(self, samples: list[int], language: str, transcript: str) -> float:
        torch = self._torch
        text = romanize(transcript)
        if not text:
            return -20.0
        waveform = [s / 32768.0 for s in samples]
        inputs = self._processor(waveform, sampling_rate=16000, return_tensors="pt")
        with self._processor.as_target_processor():
            labels = self._processor(text, return_tensors="pt").input_ids
        with torch.no_grad():
            loss = self._model(**inputs, labels=labels).loss
        if not math.isfinite(float(loss)):
            return -20.0
        return -float(loss) / max(len(text), 1)


_LOADERS = {"slid": HfSlid, "asr": HfAsr, "lm": HfLm, "wlid": HfWlid, "uasr": HfUasr}


def load(kind: str, repo: str):
    return _LOADERS[kind](repo)
