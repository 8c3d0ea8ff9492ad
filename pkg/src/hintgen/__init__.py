"""Program repair and hint generation engine with benchmarking and serving layers."""

__version__ = "0.1.0"
