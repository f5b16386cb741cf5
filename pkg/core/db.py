"""
Database configuration and initialization.
Handles the run-ledger connection and session creation.
"""
import logging
import os

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker, declarative_base

import settings

logger = logging.getLogger(__name__)

# Database configuration
# RMHD_DATABASE_URL points the ledger elsewhere; default is a local SQLite file.
DATABASE_URL = os.getenv("RMHD_DATABASE_URL", settings.DEFAULT_DATABASE_URL)


def _connect_args(url: str) -> dict:
    if url.startswith("sqlite"):
        return {"check_same_thread": False}
    return {}


def make_engine(url: str):
    return create_engine(url, connect_args=_connect_args(url))


# Create engine
engine = make_engine(DATABASE_URL)

# Session factory
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

# Base class for models
Base = declarative_base()


def init_db(bind=None):
    """
    Creates all ledger tables on `bind` (the default engine when None).
    """
    # Import models here to ensure they are registered with Base
    from core import models  # noqa: F401
    target = bind if bind is not None else engine
    Base.metadata.create_all(bind=target)
    logger.info("Run ledger initialized at %s", target.url)


def open_session(url: str = None):
    """
    Session on `url` (the configured ledger when None), tables created.
    """
    if url is None or url == DATABASE_URL:
        init_db()
        return SessionLocal()
    bind = make_engine(url)
    init_db(bind)
    return sessionmaker(autocommit=False, autoflush=False, bind=bind)()
