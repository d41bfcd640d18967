"""Average-value correspondence: classical relations to quantum operator rules."""

__version__ = "0.1.0"
