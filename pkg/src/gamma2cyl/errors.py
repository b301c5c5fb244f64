class ResourceLimitError(RuntimeError):
    """Raised when a request would exceed a configured size or memory cap."""
