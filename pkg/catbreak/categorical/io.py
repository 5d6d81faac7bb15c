"""Dataset (JSON Lines) and embedding-table file formats."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterable

import numpy as np

from catbreak import EMBEDDING_FILE_VERSION
from catbreak.categorical.instance import EmbeddingTable, Instance
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)

FLOAT_DTYPE = np.dtype("<f8")


def instance_from_record(record: dict) -> Instance:
    if not isinstance(record, dict) or "categories" not in record or "label" not in record:
        raise CatbreakError("FORMAT", "record must contain 'categories' and 'label'")
    categories = record["categories"]
    if not isinstance(categories, list):
        raise CatbreakError("FORMAT", "'categories' must be a list")
    for value in categories:
        if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
            raise CatbreakError("FORMAT", "categories must be integers or null")
    if isinstance(record["label"], bool) or not isinstance(record["label"], int):
        raise CatbreakError("FORMAT", "'label' must be an integer")
    return Instance(tuple(categories), record["label"])


def read_dataset(path: str | Path) -> list[Instance]:
    instances = []
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise CatbreakError("FORMAT", f"{path}:{line_number}: {err.msg}") from err
            instances.append(instance_from_record(record))
    logger.debug("Read %d instances from %s", len(instances), path)
    return instances


def write_dataset(path: str | Path, instances: Iterable[Instance]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for inst in instances:
            handle.write(json.dumps(inst.to_dict()) + "\n")
            count += 1
    logger.debug("Wrote %d instances to %s", count, path)
    return count


def pack_header(header: dict) -> bytes:
    return (json.dumps(header, sort_keys=True) + "\n").encode("utf-8")


def split_header(blob: bytes) -> tuple[dict, bytes]:
    newline = blob.find(b"\n")
    if newline < 0:
        raise CatbreakError("FORMAT", "missing JSON header line")
    try:
        header = json.loads(blob[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise CatbreakError("FORMAT", "unreadable JSON header") from err
    if not isinstance(header, dict):
        raise CatbreakError("FORMAT", "header must be a JSON object")
    return header, blob[newline + 1:]


def read_floats(payload: bytes, expected: int) -> np.ndarray:
    if len(payload) != expected * FLOAT_DTYPE.itemsize:
        raise CatbreakError(
            "FORMAT",
            f"payload holds {len(payload) // FLOAT_DTYPE.itemsize} floats, expected {expected}",
        )
    return np.frombuffer(payload, dtype=FLOAT_DTYPE).astype(np.float64)


def embedding_payload(table: EmbeddingTable) -> np.ndarray:
    """Valid slots only, row-major over (feature, value, dim)."""
    return np.concatenate(
        [table.vectors[i, :m].ravel() for i, m in enumerate(table.values_per_feature)]
    )


def embedding_from_payload(
    values_per_feature: tuple[int, ...], dim: int, flat: np.ndarray
) -> EmbeddingTable:
    rows = np.zeros((len(values_per_feature), max(values_per_feature), dim))
    offset = 0
    for i, m in enumerate(values_per_feature):
        rows[i, :m] = flat[offset: offset + m * dim].reshape(m, dim)
        offset += m * dim
    return EmbeddingTable(values_per_feature, rows)


def write_embedding(path: str | Path, table: EmbeddingTable) -> None:
    header = {
        "version": EMBEDDING_FILE_VERSION,
        "n": table.num_features,
        "m": list(table.values_per_feature),
        "d": table.dim,
    }
    with open(path, "wb") as handle:
        handle.write(pack_header(header))
        handle.write(embedding_payload(table).astype(FLOAT_DTYPE).tobytes())


def read_embedding(path: str | Path) -> EmbeddingTable:
    header, payload = split_header(Path(path).read_bytes())
    if header.get("version", EMBEDDING_FILE_VERSION) != EMBEDDING_FILE_VERSION:
        raise CatbreakError("FORMAT", f"unsupported embedding version {header['version']!r}")
    try:
        counts = tuple(int(m) for m in header["m"])
        dim = int(header["d"])
        n = int(header["n"])
    except (KeyError, TypeError, ValueError) as err:
        raise CatbreakError("FORMAT", "embedding header needs n, m and d") from err
    if n != len(counts):
        raise CatbreakError("FORMAT", f"header n={n} but {len(counts)} value counts")
    flat = read_floats(payload, sum(counts) * dim)
    return embedding_from_payload(counts, dim, flat)
