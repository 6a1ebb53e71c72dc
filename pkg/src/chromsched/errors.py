"""Exception types shared across the package."""


class SchedulingError(Exception):
    """Base class for solver and model errors."""


class NoSlotError(SchedulingError):
    """No feasible start time exists within the searched horizon."""

    def __init__(self, t_min: int, horizon: int, detail: str = ""):
        self.t_min = t_min
        self.horizon = horizon
        msg = f"no feasible start in [{t_min}, {horizon}]"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class CapacityError(SchedulingError):
    """A reservation would drive a column profile below zero free units."""

    def __init__(self, instant: int, level: int, msg: str = ""):
        self.instant = instant
        self.level = level
        super().__init__(
            msg or f"insufficient capacity at minute {instant} (level {level})"
        )


class IncompleteScheduleError(SchedulingError):
    """A schedule is missing a placement required by the computation."""


class InstanceFormatError(SchedulingError):
    """An instance or schedule document has a malformed field."""
