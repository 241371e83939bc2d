"""Top-level package for tests."""

__all__ = ["conftest"]
