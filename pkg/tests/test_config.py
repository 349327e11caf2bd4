"""Tests for environment settings"""

from pathlib import Path

import pytest
from dotenv import dotenv_values

from config import Settings


def test_defaults():
    settings = Settings({})
    assert settings.order == 'degrevlex'
    assert settings.characteristic == 0
    assert settings.degree_bound is None
    assert settings.log_level == 'INFO'
    assert settings.database_url is None


def test_values_from_the_environment():
    settings = Settings({'MF_ORDER': 'LEX', 'MF_CHAR': '7', 'MF_DEGREE_BOUND': '5', 'MF_LOG_LEVEL': 'debug',
                         'DATABASE_URL': 'sqlite://'})
    assert settings.order == 'lex'
    assert settings.characteristic == 7
    assert settings.degree_bound == 5
    assert settings.log_level == 'DEBUG'
    assert settings.database_url == 'sqlite://'


@pytest.mark.parametrize('env', [
    {'MF_ORDER': 'revlex'},
    {'MF_CHAR': '4'},
    {'MF_CHAR': 'zero'},
    {'MF_DEGREE_BOUND': '-1'},
    {'MF_LOG_LEVEL': 'LOUD'},
])
def test_invalid_settings(env):
    with pytest.raises(ValueError):
        Settings(env)


@pytest.mark.parametrize('p', [2, 3, 5, 7, 11, 13, 17, 19, 101])
def test_prime_characteristics_accepted(p):
    assert Settings({'MF_CHAR': str(p)}).characteristic == p


@pytest.mark.parametrize('p', [1, 4, 9, 15, 91])
def test_composite_characteristics_rejected(p):
    with pytest.raises(ValueError):
        Settings({'MF_CHAR': str(p)})


def test_example_env_matches_defaults():
    example = dotenv_values(Path(__file__).resolve().parent.parent / '.env.example')
    defaults = Settings({})
    assert example['MF_ORDER'] == defaults.order
    assert int(example['MF_CHAR']) == defaults.characteristic
    assert example['MF_LOG_LEVEL'] == defaults.log_level
