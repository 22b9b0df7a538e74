import numpy as np
import pytest

from remeasure.domain import Attribute, Dataset, QueryDomain, Schema


@pytest.fixture
def census_schema():
    return Schema(
        attributes=(
            Attribute(
                name="race",
                bins=("white", "black", "asian", "other"),
            ),
            Attribute(
                name="age",
                bins=("0-17", "18-34", "35-54", "55-64", "65+"),
                breakpoints=(0.0, 18.0, 35.0, 55.0, 65.0, 120.0),
            ),
            Attribute(
                name="marital",
                bins=("never", "married", "widowed", "divorced"),
            ),
            Attribute(
                name="income",
                bins=("<50k", "50-100k", "100k+"),
                breakpoints=(0.0, 50_000.0, 100_000.0, 1_000_000.0),
            ),
        )
    )


def random_dataset(schema: Schema, size: int, rng: np.random.Generator) -> Dataset:
    cols = [rng.integers(0, len(a.bins), size=size) for a in schema.attributes]
    return Dataset(schema=schema, records=np.column_stack(cols))


@pytest.fixture
def census_dataset(census_schema):
    rng = np.random.default_rng(7)
    return random_dataset(census_schema, 1000, rng)


@pytest.fixture
def race_age_domain(census_schema):
    return QueryDomain(
        (census_schema.attribute("race"), census_schema.attribute("age"))
    )
