"""Cooperative monitoring of a moving ground convoy by unicycle aerial agents
flying an equally spaced formation on a time-varying elliptical orbit."""

__version__ = "0.1.0"
