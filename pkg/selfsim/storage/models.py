"""SQLAlchemy models for stored runs."""

from datetime import datetime, timezone
from typing import Optional
from sqlalchemy import (
    String, Text, Float, Boolean, DateTime, Integer,
    ForeignKey, Index, Enum as SQLEnum
)
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship
import enum


class Base(DeclarativeBase):
    """Base class for all models."""
    pass


class RunStatus(str, enum.Enum):
    """Outcome of a command, mirroring the CLI exit codes."""
    OK = "ok"
    INPUT_ERROR = "input_error"
    UNCERTIFIED = "uncertified"
    PRECISION = "precision"
    VIOLATION = "violation"


class RunRecord(Base):
    """One executed command and its result document."""
    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(primary_key=True)

    command: Mapped[str] = mapped_column(String(50), nullable=False)
    ifs_hash: Mapped[str] = mapped_column(String(64), nullable=False)
    ifs_name: Mapped[Optional[str]] = mapped_column(String(200))

    # Result summary
    s: Mapped[Optional[float]] = mapped_column(Float)
    delta_lb: Mapped[Optional[float]] = mapped_column(Float)
    value_lo: Mapped[Optional[float]] = mapped_column(Float)
    value_hi: Mapped[Optional[float]] = mapped_column(Float)
    status: Mapped[RunStatus] = mapped_column(
        SQLEnum(RunStatus),
        default=RunStatus.OK
    )

    # Full result document (JSON)
    document: Mapped[str] = mapped_column(Text, nullable=False)

    created_at: Mapped[datetime] = mapped_column(
        DateTime(timezone=True),
        default=lambda: datetime.now(timezone.utc)
    )

    sweep_rows: Mapped[list["SweepRow"]] = relationship(
        back_populates="run",
        cascade="all, delete-orphan"
    )

    __table_args__ = (
        Index("idx_run_hash_command", "ifs_hash", "command"),
    )

    def __repr__(self) -> str:
        return f"<RunRecord(id={self.id}, command='{self.command}', hash='{self.ifs_hash[:12]}')>"


class SweepRow(Base):
    """One trial of a continuity sweep."""
    __tablename__ = "sweep_rows"

    id: Mapped[int] = mapped_column(primary_key=True)
    run_id: Mapped[int] = mapped_column(ForeignKey("runs.id"), nullable=False)

    magnitude_index: Mapped[int] = mapped_column(Integer, nullable=False)
    trial: Mapped[int] = mapped_column(Integer, nullable=False)
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    delta_req: Mapped[float] = mapped_column(Float, nullable=False)
    d_actual: Mapped[Optional[float]] = mapped_column(Float)
    s_g: Mapped[Optional[float]] = mapped_column(Float)
    packing_lo: Mapped[Optional[float]] = mapped_column(Float)
    packing_hi: Mapped[Optional[float]] = mapped_column(Float)
    cert_ok: Mapped[bool] = mapped_column(Boolean, default=False)
    flagged: Mapped[bool] = mapped_column(Boolean, default=False)
    deviation: Mapped[Optional[float]] = mapped_column(Float)

    run: Mapped["RunRecord"] = relationship(back_populates="sweep_rows")

    __table_args__ = (
        Index("idx_sweep_run_order", "run_id", "magnitude_index", "trial"),
    )

    def __repr__(self) -> str:
        return f"<SweepRow(run={self.run_id}, magnitude={self.delta_req:.3e}, trial={self.trial})>"
