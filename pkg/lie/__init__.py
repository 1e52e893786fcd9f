# lie/__init__.py - v0.1.0
# This file makes the 'lie' directory a Python package.
