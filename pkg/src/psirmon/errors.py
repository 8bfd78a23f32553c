"""Exception hierarchy shared by all psirmon modules."""


class PsirmonError(Exception):
    """Base class for every error raised by this package."""


class InsufficientDataError(PsirmonError, ValueError):
    pass


class ShapeError(PsirmonError, ValueError):
    pass


class DomainError(PsirmonError, ValueError):
    pass


class TooManySlicesError(DomainError):
    pass


class DegenerateError(PsirmonError, ArithmeticError):
    """A fit or statistic collapsed (zero variance, empty slice, zero direction...)."""


class DegenerateSliceError(DegenerateError):
    pass


class DegenerateDirectionError(DegenerateError):
    pass


class DegenerateInputError(DegenerateError):
    pass


class DegenerateModelError(DegenerateError):
    pass


class DegenerateApproximationError(DegenerateError):
    pass


class DegenerateSignalError(DegenerateError):
    pass
