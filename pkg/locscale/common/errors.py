# locscale/common/errors.py


class LocscaleError(Exception):
    """Base class for every error raised on purpose by this package."""
    pass


class ContractError(LocscaleError):
    """A caller violated a documented precondition."""
    pass


class DomainError(ContractError):
    """A kernel was evaluated outside its domain (for example t <= 0)."""
    pass


class InputFormatError(LocscaleError):
    """An input file could not be parsed under its declared format."""
    pass
