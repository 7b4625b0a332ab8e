"""contextrec tests."""
