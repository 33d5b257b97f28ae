"""Javadoc corpus curation and documentation-generation evaluation toolkit."""

__version__ = "0.1.0"
