"""Exception types shared across the package."""


class AlphabetMismatchError(ValueError):
    """Two strings from different alphabets were combined or compared."""


class ParseError(ValueError):
    """A character outside the alphabet was encountered while parsing."""

    def __init__(self, char: str, position: int, record: str | None = None):
        self.char = char
        self.position = position
        self.record = record
        where = f"record {record!r}, " if record is not None else ""
        super().__init__(
            f"unknown character {char!r} at {where}position {position}"
        )


class CapExceededError(RuntimeError):
    """A computation would exceed its configured resource cap."""


class DegenerateComponentError(RuntimeError):
    """A mixture component lost essentially all of its posterior mass."""

    def __init__(self, component: int):
        self.component = component
        super().__init__(f"component {component} has vanishing responsibility mass")
