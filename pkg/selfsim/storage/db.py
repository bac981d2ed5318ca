"""Database connection and session management."""

from contextlib import contextmanager
from typing import Generator, Optional
from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import sessionmaker, Session
from selfsim.config import settings
from selfsim.storage.models import Base


def make_engine(url: str) -> Engine:
    """Create an engine; SQLite connections may be shared across worker threads."""
    return create_engine(
        url,
        echo=(settings.log_level == "DEBUG"),
        connect_args={"check_same_thread": False} if "sqlite" in url else {}
    )


# Create engine
engine = make_engine(settings.database_url)

# Create session factory
SessionLocal = sessionmaker(
    autocommit=False,
    autoflush=False,
    bind=engine
)


def configure_db(url: Optional[str] = None) -> Engine:
    """Rebind the session factory to another database (e.g. sqlite:// in tests)."""
    global engine
    engine = make_engine(url or settings.database_url)
    SessionLocal.configure(bind=engine)
    return engine


def init_db() -> None:
    """Initialize database tables."""
    Base.metadata.create_all(bind=engine)


@contextmanager
def get_db() -> Generator[Session, None, None]:
    """
    Context manager for database sessions.

    Usage:
        with get_db() as db:
            db.query(RunRecord).all()
    """
    db = SessionLocal()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()
