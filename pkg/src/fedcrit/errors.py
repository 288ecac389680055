class FedCritError(Exception):
    """Base class for errors raised by fedcrit."""


class ConfigError(FedCritError, ValueError):
    pass


class ShapeError(FedCritError, ValueError):
    pass


class ContractError(FedCritError, ValueError):
    """A precondition of an operation was violated."""


class DegenerateGradientError(FedCritError, ArithmeticError):
    pass


class UndefinedMetricError(FedCritError, ValueError):
    pass


class IngestionError(FedCritError, ValueError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column
