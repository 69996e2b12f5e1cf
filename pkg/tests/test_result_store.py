import asyncio
import json

import pytest

from ..core.app.attractor_service import AttractorService, solve_degree
from ..core.sdp.problem import SdpStatus
from ..core.storage.result_store import ResultDocument, SolveRecord, record_key
from ..models.errors import ConfigError
from ..models.run_config import loads_config
from .conftest import TOY_CONFIG


@pytest.fixture(scope="module")
def toy_document():
    config = loads_config(TOY_CONFIG, [("tightening.degrees", "[2, 4]")])
    return asyncio.run(AttractorService(config).solve_all())


def without_timestamp(data):
    return {key: value for key, value in data.items() if key != "timestamp"}


class TestSolveRecord:
    def test_key(self):
        assert record_key(8, 0.05) == "k=8,discount=0.05"

    def test_failed_record(self, toy_config_text):
        config = loads_config(toy_config_text)
        record = SolveRecord(k=2, discount=1.0, status=SdpStatus.NUMERICAL_TROUBLE, error="boom")
        assert not record.succeeded
        data = record.to_dict()
        assert data["status"] == "numerical_trouble"
        assert "w" not in data
        restored = SolveRecord.from_dict(data, config)
        assert restored.approximation is None
        assert restored.error == "boom"

    def test_toy_solve(self, toy_system, unit_interval, toy_config_text):
        settings = loads_config(toy_config_text).solver
        record = solve_degree(toy_system, unit_interval, 2, settings, certify_samples=200, seed=1)
        assert record.approximation is not None
        assert record.solution is not None
        assert record.approximation.d_k >= -1e-6
        assert record.approximation.certification is not None
        assert set(record.sdp_residuals) == {"equality_inf_norm", "min_block_eigenvalue", "duality_gap"}


class TestResultDocument:
    def test_records_follow_config_order(self, toy_document):
        assert [r.k for r in toy_document.records] == [2, 4]
        assert all(r.approximation is not None for r in toy_document.records)

    def test_json_round_trip(self, toy_document):
        data = json.loads(toy_document.to_json())
        restored = ResultDocument.from_dict(data)
        assert restored.to_dict() == data
        assert restored.records[0].solution is not None
        assert restored.records[1].approximation.w == toy_document.records[1].approximation.w

    def test_document_layout(self, toy_document):
        data = toy_document.to_dict()
        assert data["schema"] == 1
        assert data["system"]["fingerprint"] == toy_document.config.build_system().fingerprint()
        assert data["X"]["domain"]["kind"] == "box"
        assert set(data["timestamp"]["wall_times"]) == {"k=2,discount=1.0", "k=4,discount=1.0"}
        record = data["records"][0]
        assert len(record["w"]) == 3
        assert record["w"][2]["exponent"] == [2]

    def test_save_and_load(self, toy_document, tmp_path):
        path = toy_document.save(tmp_path / "toy_result.json")
        loaded = ResultDocument.load(path)
        assert without_timestamp(loaded.to_dict()) == without_timestamp(toy_document.to_dict())

    def test_solve_is_deterministic(self, toy_document):
        again = asyncio.run(AttractorService(toy_document.config).solve_all())
        assert without_timestamp(again.to_dict()) == without_timestamp(toy_document.to_dict())

    def test_select(self, toy_document):
        assert toy_document.select().k == 4
        assert toy_document.select(2).k == 2
        with pytest.raises(ConfigError):
            toy_document.select(6)
        with pytest.raises(ConfigError):
            toy_document.select(discount=0.5)

    def test_fingerprint_mismatch(self, toy_document):
        data = json.loads(toy_document.to_json())
        data["system"]["fingerprint"] = "0" * 64
        with pytest.raises(ConfigError):
            ResultDocument.from_dict(data)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ResultDocument.load(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigError):
            ResultDocument.load(path)
