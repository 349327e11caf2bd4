#!/usr/bin/env python3
"""
Result cache for the matrix-factorisation toolkit
Stores finished CLI reports keyed by a digest of the command and its inputs
"""

import hashlib
import json
import logging
from datetime import datetime
from typing import Optional

from sqlalchemy import create_engine, Column, String, DateTime, JSON
from sqlalchemy.orm import sessionmaker, declarative_base

from config import settings

# Configure logging
logger = logging.getLogger(__name__)

# Database base
Base = declarative_base()


class Cache(Base):
    __tablename__ = 'cache'

    key = Column(String(255), primary_key=True)
    value = Column(JSON)
    updated_at = Column(DateTime, default=datetime.utcnow)


def cache_key(command: str, document_text: str, flags: dict) -> str:
    """SHA-256 of the command, the canonical document text and the canonical flags"""
    payload = json.dumps({'command': command, 'document': document_text, 'flags': flags}, sort_keys=True)
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()


class ResultCache:
    def __init__(self, database_url: Optional[str] = None):
        """Initialize database connection"""
        self.database_url = database_url or settings.database_url
        if not self.database_url:
            logger.debug("DATABASE_URL not set. Result cache is disabled.")
            self.engine = None
            self.Session = None
            self.enabled = False
            return

        try:
            # Handle both postgres:// and postgresql:// URLs
            if self.database_url.startswith('postgres://'):
                self.database_url = self.database_url.replace('postgres://', 'postgresql://', 1)

            self.engine = create_engine(self.database_url, echo=False)
            self.Session = sessionmaker(bind=self.engine)
            self.enabled = True
            logger.info("Result cache connection initialized")
        except Exception as e:
            logger.error(f"Failed to initialize result cache: {e}")
            self.engine = None
            self.Session = None
            self.enabled = False

    def create_tables(self) -> bool:
        if not self.enabled:
            return False

        try:
            Base.metadata.create_all(self.engine)
            logger.info("Cache tables created/verified successfully")
            return True
        except Exception as e:
            logger.error(f"Error creating cache tables: {e}")
            return False

    def save(self, key: str, value: dict) -> bool:
        """Store a report under key, replacing any earlier one"""
        if not self.enabled:
            return False

        session = self.Session()
        try:
            entry = session.query(Cache).filter(Cache.key == key).first()
            if entry:
                entry.value = value
                entry.updated_at = datetime.utcnow()
            else:
                session.add(Cache(key=key, value=value))
            session.commit()
            return True
        except Exception as e:
            logger.error(f"Error saving cache entry {key[:12]}: {e}")
            session.rollback()
            return False
        finally:
            session.close()

    def get(self, key: str) -> Optional[dict]:
        if not self.enabled:
            return None

        session = self.Session()
        try:
            entry = session.query(Cache).filter(Cache.key == key).first()
            return entry.value if entry else None
        except Exception as e:
            logger.error(f"Error fetching cache entry {key[:12]}: {e}")
            return None
        finally:
            session.close()

    def count(self) -> int:
        if not self.enabled:
            return 0

        session = self.Session()
        try:
            return session.query(Cache).count()
        except Exception as e:
            logger.error(f"Error counting cache entries: {e}")
            return 0
        finally:
            session.close()


# Global result cache instance
result_cache = ResultCache()
