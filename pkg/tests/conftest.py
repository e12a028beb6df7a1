from datetime import date
from pathlib import Path

import pytest
import yaml

from app.config import PipelineConfig
from app.ingest.corpus import PreparedPatent
from app.ingest.synthetic import generate_synthetic_corpus, write_jsonl
from app.models import PatentRecord

ROOT = Path(__file__).resolve().parents[1]
STOPWORDS = ROOT / "config" / "stopwords.txt"
LEMMAS = ROOT / "config" / "lemmas.tsv"


def make_patent(patent_id, filed, inventors, pairs, firm="F1", ipc="H01", cites=()):
    record = PatentRecord(
        patent_id=patent_id,
        filing_date=filed,
        inventor_ids=tuple(inventors),
        firm_id=firm,
        ipc_class=ipc,
        cited_ids=tuple(cites),
    )
    return PreparedPatent(record=record, tokens=(), pairs=frozenset(pairs))


def small_config_dict(corpus_path) -> dict:
    return {
        "seed": 7,
        "ingest": {
            "input_path": str(corpus_path),
            "stopwords_path": str(STOPWORDS),
            "lemmas_path": str(LEMMAS),
        },
        "novelty": {"analysis_start": "2007-01-01"},
        "regression": {"max_order": 4, "firm_threshold": 5, "grid_points": 20},
        "quantiles": {"novelty_taus": [0.25, 0.5, 0.75], "citation_taus": [0.9]},
        "simulation": {
            "n_categories": 20,
            "agents_per_category": 10,
            "knowledge_size": 20,
            "seed": 11,
            "grid_points": 20,
        },
        "export": {"histogram_bins": 10},
    }


@pytest.fixture
def corpus_path(tmp_path):
    return write_jsonl(generate_synthetic_corpus(n_patents=200, seed=7), tmp_path / "patents.jsonl")


@pytest.fixture
def config_dict(corpus_path):
    return small_config_dict(corpus_path)


@pytest.fixture
def pipeline_config(config_dict):
    return PipelineConfig.model_validate(config_dict)


@pytest.fixture
def config_file(tmp_path, config_dict):
    path = tmp_path / "pipeline.yaml"
    path.write_text(yaml.safe_dump(config_dict), encoding="utf-8")
    return path


@pytest.fixture
def tiny_team_corpus():
    """Two solo patents followed by the joint patent of their inventors"""
    return [
        make_patent("P1", date(2000, 1, 1), ["A"], {0, 1}),
        make_patent("P2", date(2000, 1, 2), ["B"], {1, 2}),
        make_patent("P3", date(2000, 1, 3), ["A", "B"], {0, 2}),
    ]
