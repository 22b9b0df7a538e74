import json
from pathlib import Path

import numpy as np
import pytest

from remeasure.errors import ConfigError, UnknownDatasetError
from remeasure.registry import DatasetRegistry, dataset_content_hash
from remeasure.scoring import PayoffConfig
from tests.conftest import random_dataset

FIXTURES = Path(__file__).parent.parent / "fixtures"


class TestRegistry:
    def test_register_and_get_round_trip(self, census_schema, tmp_path):
        rng = np.random.default_rng(1)
        dataset = random_dataset(census_schema, 40, rng)
        registry = DatasetRegistry(tmp_path)
        content_hash = registry.register("demo", dataset)
        loaded = registry.get("demo")
        assert loaded.schema == dataset.schema
        assert np.array_equal(loaded.records, dataset.records)
        assert dataset_content_hash(loaded) == content_hash
        assert registry.ids() == ["demo"]

    def test_same_content_two_ids_share_one_blob(self, census_schema, tmp_path):
        rng = np.random.default_rng(2)
        dataset = random_dataset(census_schema, 20, rng)
        registry = DatasetRegistry(tmp_path)
        h1 = registry.register("a", dataset)
        h2 = registry.register("b", dataset)
        assert h1 == h2
        blobs = [p for p in tmp_path.iterdir() if p.name != "index.json"]
        assert len(blobs) == 1

    def test_conflicting_content_rejected(self, census_schema, tmp_path):
        rng = np.random.default_rng(3)
        registry = DatasetRegistry(tmp_path)
        registry.register("a", random_dataset(census_schema, 20, rng))
        with pytest.raises(ConfigError):
            registry.register("a", random_dataset(census_schema, 20, rng))

    def test_unknown_id(self, tmp_path):
        with pytest.raises(UnknownDatasetError):
            DatasetRegistry(tmp_path).get("ghost")


class TestShippedScoringConfigs:
    @pytest.mark.parametrize("name", ["census", "diabetes", "student"])
    def test_constants_tables_parse(self, name):
        with open(FIXTURES / f"scoring_{name}.json") as handle:
            config = PayoffConfig.from_config(json.load(handle))
        assert len(config.questions) == 4
        assert config.per_question_max == 2.5
        binary = [q for q in config.questions if q.kind == "binary"]
        assert len(binary) == 1
        assert binary[0].constant == 2.0

    def test_census_table_values(self):
        with open(FIXTURES / "scoring_census.json") as handle:
            config = PayoffConfig.from_config(json.load(handle))
        constants = {q.qid: q.constant for q in config.questions}
        assert constants == {"q1": 75.00, "q2": 2.00, "q3": 217.69, "q4": 56.8}
