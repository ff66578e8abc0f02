"""Exception types raised by the simulator."""


class ConfigurationError(ValueError):
    """Invalid scenario or run configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionError(ValueError):
    """Array shapes that do not agree on L, K or M."""


class ExhaustiveLimitError(ValueError):
    """Exhaustive search requested for more users than the configured bound."""

    def __init__(self, users, bound):
        super().__init__(
            f"exhaustive search over {users}! pilot assignments refused: "
            f"K={users} exceeds k_max_exhaustive={bound}"
        )
        self.users = users
        self.bound = bound
