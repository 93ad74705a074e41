"""Exception hierarchy for the harmap package."""


class HarmapError(Exception):
    """Base class for all errors raised by this package."""


class NonConvergence(HarmapError):
    """Iterative solver exhausted its iteration budget."""


class PoleEvaluation(HarmapError):
    """A rational function was evaluated at (or too close to) a pole."""

    def __init__(self, z, message=None):
        self.z = z
        super().__init__(message or f"evaluation at pole near z = {z}")


class IndeterminateValue(HarmapError):
    """0/0 encountered; numerator and denominator both vanish."""


class NotIsolated(HarmapError):
    """Expansion point is ambiguously close to a distinct denominator root."""


class AtSingularity(HarmapError):
    """Evaluation point coincides with a pole or logarithmic anchor."""


class DegenerateAnalyticPart(HarmapError):
    """The analytic derivative vanishes identically; no dilatation exists."""


class DegenerateDilatation(HarmapError):
    """The dilatation is a unimodular constant; the critical set is not a curve."""


class IndeterminateIndex(HarmapError):
    """Leading coefficients are tied in magnitude; the index is undetermined."""


class HitBranchPoint(HarmapError):
    """Curve tracing ran into a zero of the dilatation derivative."""

    def __init__(self, z, message=None):
        self.z = z
        super().__init__(message or f"branch point encountered near z = {z}")


class MaxSteps(HarmapError):
    """Curve tracing exceeded its step budget without closing."""


class UnbalancedVertex(HarmapError):
    """Directed arc graph has in-degree != out-degree; an arc was missed."""


class SingularSample(HarmapError):
    """A critical-curve sample coincides with a singularity of the mapping."""


class TooClose(HarmapError):
    """No admissible representative point could be placed inside a tile."""


class TangentialCrossing(HarmapError):
    """Segment crosses a caustic tangentially; intersection index undefined."""


class MultipleCrossings(HarmapError):
    """Segment crosses the caustic more than once."""


class OnCurve(HarmapError):
    """Query point lies on (or numerically on) the sampled curve."""


class NonInteger(HarmapError):
    """Accumulated winding angle does not resolve to an integer."""


class EtaOnCaustic(HarmapError):
    """Target point is within the safety margin of a caustic."""

    def __init__(self, eta, distance, margin):
        self.eta = eta
        self.distance = distance
        self.margin = margin
        super().__init__(
            f"eta = {eta} is {distance:.3e} from the caustics "
            f"(safety margin {margin:.3e})"
        )


class DegenerateMap(HarmapError):
    """Mapping violates the structural assumptions needed for counting."""


class EtaOnBoundaryImage(HarmapError):
    """f - eta vanishes on the boundary of the requested component."""


class EtaTooSmall(HarmapError):
    """|eta| below the threshold required for far-field localization."""

    def __init__(self, threshold):
        self.threshold = threshold
        super().__init__(f"|eta| must exceed {threshold:.6g}")


class SingularJacobian(HarmapError):
    """Newton step attempted where the Jacobian vanishes."""


class CountMismatch(HarmapError):
    """Newton solver and counting formula disagree after seed escalation."""

    def __init__(self, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(f"solver found {found} pre-images, formula predicts {expected}")


class NotAFold(HarmapError):
    """Requested fold analysis at a point where the caustic tangent vanishes."""


class NotACusp(HarmapError):
    """Requested cusp analysis at a point that is not a cusp pre-image."""


class DegenerateA1(HarmapError):
    """Leading local coefficient a1 vanishes; fold/cusp formulas break down."""


class DegenerateCtilde(HarmapError):
    """Cusp curvature coefficient vanishes; the cusp seed formula breaks down."""


class CoincidentPoints(HarmapError):
    """Interpolation nodes coincide."""


class PathBlocked(HarmapError):
    """Scan path could not be routed around cusps / multiple caustic points."""
