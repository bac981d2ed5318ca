from selfsim.storage.db import configure_db, get_db, init_db
from selfsim.storage.models import Base, RunRecord, RunStatus, SweepRow
from selfsim.storage.runs import load_runs, save_run

__all__ = [
    "configure_db", "get_db", "init_db", "Base", "RunRecord", "RunStatus", "SweepRow",
    "load_runs", "save_run",
]
