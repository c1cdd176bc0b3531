"""Document-level parallel corpus construction, curation, and evaluation."""

__version__ = "0.1.0"
