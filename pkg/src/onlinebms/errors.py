class ConfigurationError(ValueError):
    """Invalid configuration or parameter combination."""


class DimensionError(ValueError):
    """Array shapes do not match the stream's predictor count."""


class DataError(ValueError):
    """Malformed input records (e.g. non-binary responses)."""
