"""Exception types raised across the package."""


class EmboundError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class DimensionMismatch(EmboundError, ValueError):
    pass


class NoIntersection(EmboundError):
    def __init__(self, antenna_index):
        super().__init__(f"ray from antenna {antenna_index} misses the boundary")
        self.antenna_index = antenna_index


class DegenerateInput(EmboundError, ValueError):
    pass


class OutOfRange(EmboundError, ValueError):
    pass


class PoseRejected(EmboundError):
    pass


class UnlabeledMeasurement(EmboundError):
    pass


class DegenerateLabels(EmboundError, ValueError):
    pass


class RankDeficient(EmboundError):
    def __init__(self, requested, usable):
        super().__init__(
            f"data supports only {usable} nonzero singular values, {requested} requested"
        )
        self.requested = requested
        self.usable = usable


class NonFiniteLoss(EmboundError):
    exit_code = 3

    def __init__(self, epoch, batch, loss):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch
        self.loss = loss


class NoResonance(EmboundError):
    pass


class NoPeak(EmboundError):
    pass


class EmptyRaster(EmboundError):
    pass


class GridMismatch(EmboundError):
    pass
