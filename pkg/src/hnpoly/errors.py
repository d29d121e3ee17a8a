"""Exceptions shared across the toolkit."""


class BudgetExceeded(RuntimeError):
    """An enumeration hit its work cap before finishing.

    ``partial`` carries whatever was computed before the cap was hit (for
    example a non-certified hull), or ``None``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
