"""Exception types shared across the package."""


class BelowCutoffError(ValueError):
    """Raised when a damage level is too small to map onto a finite severity."""


class IngestionError(ValueError):
    """Raised when an input file fails validation.

    ``problems`` holds ``(line_number, message)`` pairs, one per offending
    line (line 0 means the file as a whole).
    """

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)
        shown = "; ".join(f"line {n}: {msg}" for n, msg in self.problems[:10])
        more = len(self.problems) - 10
        if more > 0:
            shown += f"; ... and {more} more"
        super().__init__(f"{self.path}: {shown}")

    def to_dict(self):
        return {
            "path": self.path,
            "problems": [{"line": n, "message": msg} for n, msg in self.problems],
        }
