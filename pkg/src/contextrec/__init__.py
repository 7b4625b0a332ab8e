"""contextrec - five-aspect personal context model and recognition harness."""

__version__ = "0.1.0"
