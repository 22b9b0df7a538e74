"""Regenerate the committed fixture files. Run from the repository root:

    python3 fixtures/make_fixtures.py

Outputs are deterministic; re-running must not change any file.
"""

import csv
import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).parent
sys.path.insert(0, str(ROOT.parent))

from tests.dgm_builder import build_block_config  # noqa: E402

SCHEMA_CENSUS = {
    "attributes": [
        {
            "name": "race",
            "column": "race",
            "bins": ["white", "black", "asian", "other"],
        },
        {
            "name": "age",
            "column": "age",
            "bins": ["0-17", "18-34", "35-54", "55-64", "65+"],
            "breakpoints": [0, 18, 35, 55, 65, 120],
        },
        {
            "name": "marital",
            "column": "marital",
            "bins": ["never", "married", "widowed", "divorced"],
        },
        {
            "name": "income",
            "column": "income",
            "bins": ["<50k", "50-100k", "100k+"],
            "breakpoints": [0, 50000, 100000, 1000000],
        },
    ]
}

# Question-level normalization constants for the three study-style blocks.
# Interval constants are the 95th quantile of estimate +/- error scores;
# every binary question uses the quadratic rule's worst score of 2.
SCORING_TABLES = {
    "census": [
        {"id": "q1", "kind": "quantitative", "constant": 75.00},
        {"id": "q2", "kind": "binary", "constant": 2.00},
        {"id": "q3", "kind": "quantitative", "constant": 217.69},
        {"id": "q4", "kind": "quantitative", "constant": 56.8},
    ],
    "diabetes": [
        {"id": "q1", "kind": "quantitative", "constant": 113.4},
        {"id": "q2", "kind": "quantitative", "constant": 283.3},
        {"id": "q3", "kind": "quantitative", "constant": 186.2},
        {"id": "q4", "kind": "binary", "constant": 2.00},
    ],
    "student": [
        {"id": "q1", "kind": "quantitative", "constant": 178.8},
        {"id": "q2", "kind": "quantitative", "constant": 185.6},
        {"id": "q3", "kind": "binary", "constant": 2.00},
        {"id": "q4", "kind": "quantitative", "constant": 56.8},
    ],
}


def write_census_csv(path: Path, size: int = 1000, seed: int = 2024) -> None:
    rng = np.random.default_rng(seed)
    races = ["white", "black", "asian", "other"]
    maritals = ["never", "married", "widowed", "divorced"]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["race", "age", "marital", "income"])
        for _ in range(size):
            writer.writerow(
                [
                    races[rng.choice(4, p=[0.6, 0.18, 0.12, 0.1])],
                    int(rng.integers(0, 100)),
                    maritals[rng.choice(4, p=[0.35, 0.45, 0.08, 0.12])],
                    int(rng.gamma(2.0, 30000)),
                ]
            )


def main() -> None:
    dgm_dir = ROOT / "dgm"
    dgm_dir.mkdir(exist_ok=True)
    for name, seed in (("block_a", 1001), ("block_b", 1002), ("block_c", 1003)):
        config = build_block_config(seed=seed, size=1000)
        with open(dgm_dir / f"{name}.json", "w") as handle:
            json.dump(config, handle)
        print(f"wrote dgm/{name}.json")

    with open(ROOT / "schema_census.json", "w") as handle:
        json.dump(SCHEMA_CENSUS, handle, indent=2)
    for name, questions in SCORING_TABLES.items():
        with open(ROOT / f"scoring_{name}.json", "w") as handle:
            json.dump({"questions": questions, "perQuestionMax": 2.5}, handle, indent=2)
    write_census_csv(ROOT / "census_sample.csv")
    print("wrote schema_census.json, scoring configs, census_sample.csv")


if __name__ == "__main__":
    main()
