# magnus/__init__.py - v0.1.0
# This file makes the 'magnus' directory a Python package.
