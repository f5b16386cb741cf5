"""
SQLAlchemy models for the run ledger.
Simulation runs with their error norms and entropy history, and convergence
studies with one row per mesh level.
"""
from datetime import datetime

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from core.db import Base


class SimulationRun(Base):
    """
    One invocation of `run` (or one level of a convergence study).
    """
    __tablename__ = "simulation_runs"

    id = Column(Integer, primary_key=True, index=True)
    problem = Column(String, nullable=False, index=True)
    dimension = Column(Integer, nullable=False)
    nx = Column(Integer, nullable=False)
    ny = Column(Integer, nullable=True)
    degree = Column(Integer, nullable=False)
    cfl = Column(Float, nullable=False)
    t_end = Column(Float, nullable=False)
    flux_mode = Column(String, nullable=False, default="es")
    limiter = Column(Boolean, nullable=False, default=True)
    status = Column(String, nullable=False, default="running")  # running | finished | failed
    message = Column(Text, nullable=True)
    steps = Column(Integer, nullable=True)
    final_time = Column(Float, nullable=True)
    profile_path = Column(String, nullable=True)
    entropy_path = Column(String, nullable=True)
    started_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime, nullable=True)

    # Relationships
    errors = relationship("ErrorRecord", back_populates="run", cascade="all, delete-orphan")
    entropy_samples = relationship("EntropySample", back_populates="run", cascade="all, delete-orphan",
                                   order_by="EntropySample.step")

    def __repr__(self):
        return f"<SimulationRun(id={self.id}, problem='{self.problem}', status='{self.status}')>"


class ErrorRecord(Base):
    """
    Error norms of one variable against the exact solution.
    """
    __tablename__ = "error_records"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("simulation_runs.id"), nullable=False)
    variable = Column(String, nullable=False)
    l1 = Column(Float, nullable=False)
    l2 = Column(Float, nullable=False)
    linf = Column(Float, nullable=False)

    run = relationship("SimulationRun", back_populates="errors")

    def __repr__(self):
        return f"<ErrorRecord(run_id={self.run_id}, variable='{self.variable}', l1={self.l1:.3e})>"


class EntropySample(Base):
    __tablename__ = "entropy_samples"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("simulation_runs.id"), nullable=False)
    step = Column(Integer, nullable=False)
    time = Column(Float, nullable=False)
    entropy = Column(Float, nullable=False)

    run = relationship("SimulationRun", back_populates="entropy_samples")

    def __repr__(self):
        return f"<EntropySample(run_id={self.run_id}, step={self.step}, entropy={self.entropy:.6e})>"


class ConvergenceStudy(Base):
    """
    A mesh ladder for one problem, variable and degree.
    """
    __tablename__ = "convergence_studies"

    id = Column(Integer, primary_key=True, index=True)
    problem = Column(String, nullable=False, index=True)
    variable = Column(String, nullable=False)
    degree = Column(Integer, nullable=False)
    table_path = Column(String, nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow)

    levels = relationship("ConvergenceLevel", back_populates="study", cascade="all, delete-orphan",
                          order_by="ConvergenceLevel.n")

    def __repr__(self):
        return f"<ConvergenceStudy(id={self.id}, problem='{self.problem}', variable='{self.variable}')>"


class ConvergenceLevel(Base):
    __tablename__ = "convergence_levels"

    id = Column(Integer, primary_key=True, index=True)
    study_id = Column(Integer, ForeignKey("convergence_studies.id"), nullable=False)
    n = Column(Integer, nullable=False)
    l1 = Column(Float, nullable=False)
    l2 = Column(Float, nullable=False)
    linf = Column(Float, nullable=False)
    order_l1 = Column(Float, nullable=True)
    order_l2 = Column(Float, nullable=True)
    order_linf = Column(Float, nullable=True)

    study = relationship("ConvergenceStudy", back_populates="levels")

    def __repr__(self):
        return f"<ConvergenceLevel(study_id={self.study_id}, n={self.n}, l1={self.l1:.3e})>"
