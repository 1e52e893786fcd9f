# flow/__init__.py - v0.1.0
# This file makes the 'flow' directory a Python package.
