from selfsim.report.documents import (
    SCHEMA_VERSION,
    ResultDocument,
    RunConfig,
    build_meta,
    load_run_config,
)

__all__ = ["SCHEMA_VERSION", "ResultDocument", "RunConfig", "build_meta", "load_run_config"]
