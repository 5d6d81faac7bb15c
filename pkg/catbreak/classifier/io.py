"""Model files: one JSON header line followed by a little-endian float64 payload."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from catbreak import MODEL_FILE_VERSION
from catbreak.categorical.io import (
    FLOAT_DTYPE,
    embedding_from_payload,
    embedding_payload,
    pack_header,
    read_floats,
    split_header,
)
from catbreak.classifier.affine import AffineModel
from catbreak.classifier.base import CategoricalModel
from catbreak.classifier.mlp import EmbedMlpModel
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)


def _mlp_parts(model: EmbedMlpModel) -> tuple[dict, np.ndarray]:
    header = {
        "d": model.table.dim,
        "hidden": list(model.hidden_sizes),
        "planted": list(model.planted),
        "sensitivity": model.sensitivity,
    }
    parts = [embedding_payload(model.table)]
    for weight, bias in model.layers:
        parts.extend([weight.ravel(), bias])
    return header, np.concatenate(parts)


def _affine_parts(model: AffineModel) -> tuple[dict, np.ndarray]:
    rows = [model.weights[i, :m].ravel() for i, m in enumerate(model.values_per_feature)]
    return {}, np.concatenate([model.base] + rows)


def save_model(path: str | Path, model: CategoricalModel) -> None:
    if isinstance(model, EmbedMlpModel):
        extra, flat = _mlp_parts(model)
    elif isinstance(model, AffineModel):
        extra, flat = _affine_parts(model)
    else:
        raise CatbreakError("INVALID_ARG", f"cannot serialize model kind {model.kind!r}")
    header = {
        "version": MODEL_FILE_VERSION,
        "kind": model.kind,
        "n": model.num_features,
        "m": list(model.values_per_feature),
        "k": model.num_classes,
        "seed": getattr(model, "seed", None),
        **extra,
    }
    with open(path, "wb") as handle:
        handle.write(pack_header(header))
        handle.write(flat.astype(FLOAT_DTYPE).tobytes())
    logger.debug("Saved %s model (%d parameters) to %s", model.kind, flat.size, path)


def _load_mlp(header: dict, payload: bytes, counts: tuple[int, ...], k: int) -> EmbedMlpModel:
    dim = int(header["d"])
    hidden = [int(width) for width in header.get("hidden", [])]
    widths = [len(counts) * dim] + hidden + [k]
    embed_size = sum(counts) * dim
    layer_sizes = [(widths[i + 1], widths[i]) for i in range(len(widths) - 1)]
    total = embed_size + sum(rows * cols + rows for rows, cols in layer_sizes)
    flat = read_floats(payload, total)

    table = embedding_from_payload(counts, dim, flat[:embed_size])
    offset = embed_size
    layers = []
    for rows, cols in layer_sizes:
        weight = flat[offset: offset + rows * cols].reshape(rows, cols)
        offset += rows * cols
        bias = flat[offset: offset + rows]
        offset += rows
        layers.append((weight, bias))
    return EmbedMlpModel(
        table,
        tuple(layers),
        seed=header.get("seed"),
        planted=tuple(header.get("planted", ())),
        sensitivity=str(header.get("sensitivity", "")),
    )


def _load_affine(header: dict, payload: bytes, counts: tuple[int, ...], k: int) -> AffineModel:
    flat = read_floats(payload, k + sum(counts) * k)
    weights = np.zeros((len(counts), max(counts), k))
    offset = k
    for i, m in enumerate(counts):
        weights[i, :m] = flat[offset: offset + m * k].reshape(m, k)
        offset += m * k
    return AffineModel(flat[:k], weights, counts, seed=header.get("seed"))


_LOADERS = {
    EmbedMlpModel.kind: _load_mlp,
    AffineModel.kind: _load_affine,
}


def load_model(path: str | Path) -> CategoricalModel:
    header, payload = split_header(Path(path).read_bytes())
    if header.get("version") != MODEL_FILE_VERSION:
        raise CatbreakError("FORMAT", f"unsupported model version {header.get('version')!r}")
    loader = _LOADERS.get(header.get("kind"))
    if loader is None:
        raise CatbreakError("FORMAT", f"unknown model kind {header.get('kind')!r}")
    try:
        counts = tuple(int(m) for m in header["m"])
        k = int(header["k"])
        if int(header["n"]) != len(counts):
            raise CatbreakError("FORMAT", "header n does not match the value counts")
        model = loader(header, payload, counts, k)
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, CatbreakError):
            raise
        raise CatbreakError("FORMAT", f"malformed model header: {err}") from err
    logger.debug("Loaded %s model from %s", model.kind, path)
    return model
