"""Exception types shared across the toolkit."""


class TabsynbenchError(Exception):
    """Base class for all toolkit errors."""


class SchemaMismatch(TabsynbenchError):
    pass


class ParseError(TabsynbenchError):
    pass


class UnknownCategory(TabsynbenchError):
    pass


class EmptyTable(TabsynbenchError):
    pass


class DegenerateSplit(TabsynbenchError):
    pass


class LayoutMismatch(TabsynbenchError):
    pass


class DimensionMismatch(TabsynbenchError):
    pass


class NonScalarRoot(TabsynbenchError):
    pass


class ShapeMismatch(TabsynbenchError):
    pass


class NonFiniteLoss(TabsynbenchError):
    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class InsufficientData(TabsynbenchError):
    pass


class KindMismatch(TabsynbenchError):
    pass


class NotCategorical(TabsynbenchError):
    pass


class NotContinuous(TabsynbenchError):
    pass


class EmptyColumn(TabsynbenchError):
    pass


class TaskMismatch(TabsynbenchError):
    pass


class SingleClassTrainingSet(TabsynbenchError):
    pass


class EmptyTest(TabsynbenchError):
    pass


class DegenerateInput(TabsynbenchError):
    pass


class ConfigError(TabsynbenchError):
    pass


class NoCheckpoints(TabsynbenchError):
    pass
