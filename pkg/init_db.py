#!/usr/bin/env python3
"""
Cache initialization script for the matrix-factorisation toolkit
Run once to create the result cache tables
"""

import logging

from config import settings
from database import ResultCache

logger = logging.getLogger(__name__)


def main(database_url=None):
    """Create the result cache tables"""
    settings.configure_logging()
    print("🔧 Initializing result cache...")

    cache = ResultCache(database_url)
    if not cache.enabled:
        print("❌ Database connection not available!")
        print("Please check your DATABASE_URL environment variable.")
        return 1

    print("📊 Creating cache tables...")
    if cache.create_tables():
        print("✅ Cache tables created successfully!")
        print(f"📈 Cached reports: {cache.count()}")
        return 0
    else:
        print("❌ Failed to create cache tables!")
        return 1


if __name__ == "__main__":
    exit(main())
