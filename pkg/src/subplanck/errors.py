class GuardError(ValueError):
    """A numerical guard failed: truncation too small, unnormalized state,
    ill-conditioned fit, or a parameter outside the validity window."""


class ConfigError(ValueError):
    """An invalid or inconsistent configuration."""
