# core/__init__.py - v0.1.0
# This file makes the 'core' directory a Python package.