"""contextrec core module."""
