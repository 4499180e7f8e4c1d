"""Classical tweet sentiment classification with a streaming trend service."""

__version__ = "0.1.0"
