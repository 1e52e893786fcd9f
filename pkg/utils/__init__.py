# utils/__init__.py - v0.1.0
# This file makes the 'utils' directory a Python package.