class ConfigError(ValueError):
    """Invalid solver or experiment configuration."""


class DecompositionRequired(ValueError):
    """Instance is larger than the quantum register can encode directly."""


class TsplibParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
