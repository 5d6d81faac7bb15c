"""Query-efficient adversarial attacks against categorical-input classifiers."""

from __future__ import annotations

__version__ = "1.0.0"

MODEL_FILE_VERSION = "catbreak-model-v1"
EMBEDDING_FILE_VERSION = "catbreak-embed-v1"
