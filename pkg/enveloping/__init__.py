# enveloping/__init__.py - v0.1.0
# This file makes the 'enveloping' directory a Python package.
