"""Persisting result documents."""

import logging
from typing import Optional, Sequence

from selfsim.report.documents import ResultDocument
from selfsim.storage.db import get_db, init_db
from selfsim.storage.models import RunRecord, RunStatus, SweepRow

logger = logging.getLogger(__name__)


def save_run(
    document: ResultDocument,
    status: RunStatus = RunStatus.OK,
    ifs_name: Optional[str] = None,
    sweep_records: Sequence = (),
) -> int:
    """Store a result document (and sweep trials, if any); returns the run id."""
    init_db()
    result = document.result
    with get_db() as db:
        run = RunRecord(
            command=document.command,
            ifs_hash=document.ifs_hash,
            ifs_name=ifs_name,
            s=document.s,
            delta_lb=(document.cert or {}).get("delta_lb"),
            value_lo=result.get("value_lo"),
            value_hi=result.get("value_hi"),
            status=status,
            document=document.to_json(),
        )
        for record in sweep_records:
            run.sweep_rows.append(SweepRow(
                magnitude_index=record.magnitude_index,
                trial=record.trial,
                seed=record.seed,
                delta_req=record.delta_req,
                d_actual=record.d_actual,
                s_g=record.s_g,
                packing_lo=record.packing_lo,
                packing_hi=record.packing_hi,
                cert_ok=record.cert_ok,
                flagged=record.flagged,
                deviation=record.deviation,
            ))
        db.add(run)
        db.flush()
        run_id = run.id
    logger.info(f"Stored {document.command} run #{run_id}")
    return run_id


def load_runs(ifs_hash: Optional[str] = None, command: Optional[str] = None) -> list[ResultDocument]:
    """Stored documents, oldest first, optionally filtered."""
    init_db()
    with get_db() as db:
        query = db.query(RunRecord)
        if ifs_hash is not None:
            query = query.filter(RunRecord.ifs_hash == ifs_hash)
        if command is not None:
            query = query.filter(RunRecord.command == command)
        return [ResultDocument.from_json(run.document) for run in query.order_by(RunRecord.id).all()]
