"""Exception types shared across the package.

The CLI maps these onto exit codes: FormatError and NotFoundError are
usage/format problems (exit 2), DegenerateDataError marks data that is
structurally valid but unusable for the requested computation (exit 3).
"""


class FormatError(ValueError):
    """Input file or document violates its declared format."""


class NotFoundError(KeyError):
    """A requested entity (country, field) is absent from the input."""

    def __str__(self) -> str:  # KeyError quotes its args; keep the message plain
        return self.args[0] if self.args else ""


class DegenerateDataError(ValueError):
    """Data is too degenerate for the requested computation (e.g. all-tied targets)."""
