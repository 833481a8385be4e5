"""Exception types shared across the package."""


class DomainError(ValueError):
  """Input violates a documented precondition (bad k, negative count, ...)."""


class ParseError(ValueError):
  """A counts file could not be parsed."""

  def __init__(self, message, line_number=None):
    if line_number is not None:
      message = f"line {line_number}: {message}"
    super().__init__(message)
    self.line_number = line_number


class OracleLimitError(DomainError):
  """Brute-force enumeration refused because the instance is too large."""
