"""Shared exception types."""


class AdapterError(Exception):
    """Invalid manifest, corpus, configuration, or model identifier."""


class UnsupportedLanguageError(AdapterError):
    """A model was asked to handle a language outside its inventory."""


class DecodeError(AdapterError):
    """Transcription of one utterance failed."""
