"""Exception taxonomy shared across the package."""


class TransdiffError(ValueError):
    pass


class NotLimit(TransdiffError):
    pass


class ZeroOperator(TransdiffError):
    pass


class ZeroElement(TransdiffError):
    pass


class InfiniteLocalOrder(TransdiffError):
    pass


class OrderUnknown(TransdiffError):
    pass


class NotCompatible(TransdiffError):
    pass


class NotCoprime(TransdiffError):
    pass


class UnsupportedFamily(TransdiffError):
    pass


class MalformedTerm(TransdiffError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
