"""Shared exception base classes."""


class LockforgeError(Exception):
    """Base for every error raised by this package.

    The CLI maps these to exit code 2 (input/usage errors) unless a more
    specific disposition applies.
    """


class DomainError(LockforgeError):
    """An argument is outside its documented domain."""
