"""Curator-side dataset registry: content-addressed JSON blobs on disk.

Each registered dataset is stored once under its content hash; a small
index file maps dataset ids to hashes. Re-registering identical content
under the same id is a no-op, while re-registering an id with different
content is refused (ids are stable handles analysts reference).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .domain import Dataset, Schema
from .errors import ConfigError, UnknownDatasetError

INDEX_FILE = "index.json"


def dataset_content_hash(dataset: Dataset) -> str:
    payload = json.dumps(
        {"schema": dataset.schema.to_config(), "records": dataset.records.tolist()},
        separators=(",", ":"),
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class DatasetRegistry:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _index_path(self) -> Path:
        return self.root / INDEX_FILE

    def _load_index(self) -> dict:
        path = self._index_path()
        if not path.exists():
            return {}
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)

    def _save_index(self, index: dict) -> None:
        with open(self._index_path(), "w", encoding="utf-8") as handle:
            json.dump(index, handle, indent=2, sort_keys=True)

    def register(self, dataset_id: str, dataset: Dataset) -> str:
        """Persist a dataset under `dataset_id`; returns its content hash."""
        content_hash = dataset_content_hash(dataset)
        index = self._load_index()
        existing = index.get(dataset_id)
        if existing == content_hash:
            return content_hash
        if existing is not None:
            raise ConfigError(
                f"dataset id {dataset_id!r} already registered with different content"
            )
        blob_path = self.root / f"{content_hash}.json"
        if not blob_path.exists():
            with open(blob_path, "w", encoding="utf-8") as handle:
                json.dump(
                    {
                        "contentHash": content_hash,
                        "schema": dataset.schema.to_config(),
                        "records": dataset.records.tolist(),
                        "size": dataset.size,
                    },
                    handle,
                )
        index[dataset_id] = content_hash
        self._save_index(index)
        return content_hash

    def get(self, dataset_id: str) -> Dataset:
        index = self._load_index()
        if dataset_id not in index:
            raise UnknownDatasetError(f"unknown dataset {dataset_id!r}")
        blob_path = self.root / f"{index[dataset_id]}.json"
        with open(blob_path, "r", encoding="utf-8") as handle:
            blob = json.load(handle)
        return Dataset(
            schema=Schema.from_config(blob["schema"]),
            records=np.asarray(blob["records"], dtype=np.int64),
        )

    def ids(self) -> list[str]:
        return sorted(self._load_index())
