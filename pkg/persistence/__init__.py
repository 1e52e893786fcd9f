# persistence/__init__.py - v0.1.0
# This file makes the 'persistence' directory a Python package.