from __future__ import annotations


class InvalidConfigError(Exception):
    pass


class GridMismatchError(Exception):
    pass


class NonPSDError(Exception):
    pass


class DegenerateTimeError(Exception):
    pass


class NoFiniteRateError(Exception):
    pass


class InsufficientHitsError(Exception):
    pass


EXCEPTIONS = (
    InvalidConfigError,
    GridMismatchError,
    NonPSDError,
    DegenerateTimeError,
    NoFiniteRateError,
    InsufficientHitsError,
    FileNotFoundError,
)

EXIT_CODES: dict[type[Exception], int] = {
    InvalidConfigError: 2,
    FileNotFoundError: 2,
    NoFiniteRateError: 3,
    InsufficientHitsError: 4,
}


def exit_code(err: Exception) -> int:
    for exc, code in EXIT_CODES.items():
        if isinstance(err, exc):
            return code
    return 1
