class ConfigurationError(ValueError):
    """Invalid scenario or network parameters."""


class ProtocolError(RuntimeError):
    """The bidding protocol exceeded its hard round guard."""
