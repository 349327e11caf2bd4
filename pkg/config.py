#!/usr/bin/env python3
"""
Settings for the matrix-factorisation toolkit
Values come from the environment (or a local .env file)
"""

import os
import logging
from typing import Optional
from dotenv import load_dotenv
from sympy import isprime

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

ORDERS = ('degrevlex', 'lex', 'grlex')
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Settings:
    def __init__(self, environ=None):
        """Read toolkit defaults from the environment"""
        env = os.environ if environ is None else environ
        problems = []

        self.order = env.get('MF_ORDER', 'degrevlex').strip().lower()
        if self.order not in ORDERS:
            problems.append(f"MF_ORDER={self.order!r} (expected one of {', '.join(ORDERS)})")

        raw_char = env.get('MF_CHAR', '0').strip()
        try:
            self.characteristic = int(raw_char)
        except ValueError:
            self.characteristic = 0
            problems.append(f"MF_CHAR={raw_char!r} is not an integer")
        else:
            if self.characteristic != 0 and not isprime(self.characteristic):
                problems.append(f"MF_CHAR={raw_char!r} must be 0 or a prime")

        raw_bound = env.get('MF_DEGREE_BOUND')
        self.degree_bound: Optional[int] = None
        if raw_bound:
            try:
                self.degree_bound = int(raw_bound)
                if self.degree_bound < 0:
                    raise ValueError
            except ValueError:
                problems.append(f"MF_DEGREE_BOUND={raw_bound!r} must be a non-negative integer")
                self.degree_bound = None

        self.log_level = env.get('MF_LOG_LEVEL', 'INFO').strip().upper()
        if not isinstance(logging.getLevelName(self.log_level), int):
            problems.append(f"MF_LOG_LEVEL={self.log_level!r} is not a logging level")

        self.database_url = env.get('DATABASE_URL') or None

        if problems:
            for problem in problems:
                logger.error(f"Invalid setting: {problem}")
            raise ValueError(f"Invalid settings: {'; '.join(problems)}")

    def configure_logging(self):
        logging.basicConfig(format=LOG_FORMAT, level=getattr(logging, self.log_level))


settings = Settings()
