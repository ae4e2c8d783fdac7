"""Crowd-navigation simulation and human-empowerment evaluation toolkit."""

__version__ = "0.1.0"
