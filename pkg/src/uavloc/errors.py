class ConfigError(ValueError):
    """Invalid simulation or experiment parameter."""


class DomainError(ValueError):
    """Input outside the validity range of a channel formula."""
