# config/__init__.py - v0.1.0
# This file makes the 'config' directory a Python package.