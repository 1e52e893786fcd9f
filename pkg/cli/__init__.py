# cli/__init__.py - v0.1.0
# This file makes the 'cli' directory a Python package.
