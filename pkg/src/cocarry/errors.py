class ConfigurationError(ValueError):
    """Invalid model, gain or scenario parameter."""


class NumericError(ArithmeticError):
    """Non-finite input or a failed factorization inside the control loop."""


class AnalysisError(ValueError):
    """Logs or reports that cannot be compared or summarized."""
