"""Shared test configuration: keep the tests directory importable so the
test modules can reach the reference implementations in oracles.py."""

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))
