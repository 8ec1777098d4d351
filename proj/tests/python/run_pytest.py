"""Runs the smoke tests; exits 77 (skipped) when neither pytest nor the module is importable."""

import importlib.util
import sys

if importlib.util.find_spec("pytest") is None or importlib.util.find_spec("kinlab") is None:
    print("kinlab or pytest not importable; skipping")
    sys.exit(77)

import pytest

sys.exit(pytest.main(["-q", "-p", "no:cacheprovider", *sys.argv[1:]]))
