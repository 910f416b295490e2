"""Born machine training and hardware-aware circuit search for discretized time series."""

__version__ = "0.1.0"
