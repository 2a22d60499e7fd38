"""Exception types shared across the library."""


class GeoAttError(Exception):
    """Base class for all library errors."""


class NotSkew(GeoAttError):
    """Matrix handed to vee() is not skew-symmetric within tolerance."""


class Degenerate(GeoAttError):
    """Matrix cannot be projected onto the rotation group."""


class ConstraintViolated(GeoAttError):
    """A keep-out cone constraint is violated or touched.

    Attributes:
        cone_index: index of the offending cone (or None when unknown).
        value: offending value of r' R' v.
        t: simulation time of the violation, when raised inside a run.
    """

    def __init__(self, message, cone_index=None, value=None, t=None):
        super().__init__(message)
        self.cone_index = cone_index
        self.value = value
        self.t = t


class InfeasibleGoal(GeoAttError):
    """The desired attitude (or a waypoint) lies inside a keep-out cone."""


class DomainInvalid(GeoAttError):
    """Parameters fall outside the analytic domain (empty or inconsistent)."""
