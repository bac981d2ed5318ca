"""Tests for run configuration, result documents and stored runs."""

from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from selfsim.errors import ParameterError
from selfsim.lab import SweepRecord
from selfsim.report import ResultDocument, build_meta, load_run_config
from selfsim.storage import RunRecord, RunStatus, SweepRow, get_db, load_runs, save_run


def _document(command="packing", ifs_hash="ab" * 32, value=(2.39, 2.40)) -> ResultDocument:
    return ResultDocument(
        command=command,
        ifs_hash=ifs_hash,
        s=0.63,
        cert={"delta_lb": 1 / 3},
        result={"value_lo": value[0], "value_hi": value[1]},
        meta=build_meta(datetime.now(timezone.utc), 1),
    )


def test_document_round_trip():
    document = _document()
    again = ResultDocument.from_json(document.to_json())
    assert again == document
    assert again.schema_version == 1
    assert "meta" not in document.deterministic_json()


def test_document_accepts_numpy_values():
    document = ResultDocument(
        command="verify", ifs_hash="00",
        result={"ok": np.bool_(True), "worst": np.float64(0.5), "points": np.arange(3)},
    )
    assert document.result == {"ok": True, "worst": 0.5, "points": [0, 1, 2]}
    assert '"ok": true' in document.to_json()


def test_document_rejects_unknown_schema():
    text = _document().to_json().replace('"schema_version": 1', '"schema_version": 2')
    with pytest.raises(ValueError):
        ResultDocument.from_json(text)


def test_run_config_from_flags(systems_dir):
    config = load_run_config({"command": "packing", "ifs_path": systems_dir / "cantor.json", "eps": 1e-3})
    assert config.eps == 1e-3
    assert config.window == "compact"
    assert config.store is False


def test_run_config_flags_override_yaml(systems_dir, tmp_path):
    config_file = tmp_path / "run.yaml"
    config_file.write_text("eps: 0.01\nsamples: 50\nseed: 3\ncenter-depth: 2\n")
    config = load_run_config(
        {"command": "verify", "ifs_path": systems_dir / "cantor.json", "eps": 1e-3, "seed": None},
        config_file,
    )
    assert config.eps == 1e-3
    assert config.samples == 50
    assert config.seed == 3
    assert config.center_depth == 2


@pytest.mark.parametrize("flags", [
    {"command": "packing", "eps": -1.0},
    {"command": "packing", "tol": 0.0},
    {"command": "verify"},
    {"command": "sweep", "seed": 1, "magnitudes": [1e-3, -1e-3]},
    {"command": "packing", "unknown": 1},
    {"command": "launch"},
])
def test_run_config_rejects(systems_dir, flags):
    with pytest.raises(ParameterError):
        load_run_config({"ifs_path": systems_dir / "cantor.json", **flags})


def test_run_config_rejects_missing_paths(systems_dir, tmp_path):
    with pytest.raises(ParameterError):
        load_run_config({"command": "dim", "ifs_path": tmp_path / "absent.json"})
    with pytest.raises(ParameterError):
        load_run_config({"command": "dim", "ifs_path": systems_dir / "cantor.json",
                         "out": tmp_path / "missing" / "out.json"})


def test_unreadable_yaml(systems_dir, tmp_path):
    config_file = tmp_path / "bad.yaml"
    config_file.write_text("- just\n- a list\n")
    with pytest.raises(ParameterError):
        load_run_config({"command": "dim", "ifs_path": systems_dir / "cantor.json"}, config_file)


def test_save_and_load_runs(memory_db):
    first = save_run(_document(ifs_hash="aa" * 32))
    second = save_run(_document(command="certify", ifs_hash="bb" * 32), status=RunStatus.UNCERTIFIED)
    assert second > first

    assert [d.command for d in load_runs()] == ["packing", "certify"]
    assert [d.command for d in load_runs(ifs_hash="bb" * 32)] == ["certify"]
    assert load_runs(command="sweep") == []

    with get_db() as db:
        run = db.get(RunRecord, second)
        assert run.status == RunStatus.UNCERTIFIED
        assert run.delta_lb == pytest.approx(1 / 3)
        assert run.value_lo is not None


def test_sweep_rows_are_stored(memory_db):
    records = [
        SweepRecord(delta_req=1e-3, d_actual=8e-4, s_g=0.63, packing_lo=2.39, packing_hi=2.40,
                    cert_ok=True, seed=17, magnitude_index=0, trial=t, eps=0.01,
                    base_lo=2.39, base_hi=2.40)
        for t in range(3)
    ]
    run_id = save_run(_document(command="sweep"), sweep_records=records)
    with get_db() as db:
        rows = db.query(SweepRow).filter(SweepRow.run_id == run_id).order_by(SweepRow.trial).all()
        assert [row.trial for row in rows] == [0, 1, 2]
        assert rows[0].deviation == 0.0


def test_runs_are_stamped_in_utc(memory_db):
    run_id = save_run(_document())
    with get_db() as db:
        created = db.get(RunRecord, run_id).created_at
    # SQLite hands the stamp back naive; it was written as UTC
    if created.tzinfo is None:
        created = created.replace(tzinfo=timezone.utc)
    assert abs(datetime.now(timezone.utc) - created) < timedelta(minutes=5)
