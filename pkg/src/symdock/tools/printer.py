import sys
from typing import Any, Iterable, List, Optional, TextIO, Tuple


class VoidPrinter:
    """Printer that prints nothing."""

    def print_header(self):
        """Print nothing."""

    def print_row(self, values: Iterable[Any]):
        """Print nothing.

        Args:
            values: The values not to print.
        """

    def print_line(self, text: str):
        """Print nothing.

        Args:
            text: The text not to print.
        """


class ColumnPrinter(VoidPrinter):
    """Printer that formats sweep or epoch records in a column layout.

    Args:
        columns: A list of (column name, format string) tuples.
        placeholder_values: Placeholder values to use when calculating the
            column widths.
        column_padding: Number of spaces to insert between columns.
        stream: Text stream to write to; defaults to ``sys.stdout`` at the
            time of printing.

    Attributes:
        column_names: Tuple of column names (headers).
        column_formatters: Tuple of column formatting strings.
        column_widths: Tuple of calculated column widths.
    """

    column_names: Tuple[str, ...]
    column_formatters: Tuple[str, ...]
    column_widths: Tuple[int, ...]

    def __init__(
        self,
        *,
        columns: List[Tuple[str, str]],
        placeholder_values: Optional[List[Any]] = None,
        column_padding: int = 4,
        stream: Optional[TextIO] = None,
    ):
        self.column_names, format_strings = map(tuple, zip(*columns))
        self.column_formatters = tuple(
            f"{{value:{format_string}}}" for format_string in format_strings
        )
        self.column_padding = column_padding
        self._stream = stream

        if placeholder_values is None:
            placeholder_values = [0] * len(self.column_names)
        self.column_widths = tuple(
            max(len(name), len(self._format(formatter, value)))
            + column_padding
            for name, formatter, value in zip(
                self.column_names, self.column_formatters, placeholder_values
            )
        )

    @staticmethod
    def _format(formatter, value):
        # Missing entries (an epoch without a synthesis call, say) print
        # as a dash instead of failing the numeric format.
        if value is None:
            return "-"
        return formatter.format(value=value)

    def _write(self, text):
        stream = self._stream if self._stream is not None else sys.stdout
        stream.write(text + "\n")

    def print_line(self, text: str):
        """Print a free-form line, e.g. a termination reason.

        Args:
            text: The line to print.
        """
        self._write(text)

    def print_header(self):
        """Print the column names and an underline."""
        names = []
        rules = []
        for name, width in zip(self.column_names, self.column_widths):
            names.append(name.ljust(width))
            rules.append(
                "-" * (width - self.column_padding) + " " * self.column_padding
            )
        self._write("".join(names))
        self._write("".join(rules))

    def print_row(self, values: Iterable[Any]):
        """Print values formatted as a row.

        Args:
            values: The values to print, one per column.
        """
        self._write(
            "".join(
                self._format(formatter, value).ljust(width)
                for formatter, width, value in zip(
                    self.column_formatters, self.column_widths, values
                )
            )
        )


def make_printer(verbosity: int, columns, stream=None, **kwargs):
    """Return a column printer at ``verbosity >= 2`` and a void one below."""
    if verbosity >= 2:
        return ColumnPrinter(columns=columns, stream=stream, **kwargs)
    return VoidPrinter()
