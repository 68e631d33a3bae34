"""Exception hierarchy shared by all phasecraft modules."""


class PhasecraftError(Exception):
    """Base class for all library errors."""


# --- Lie algebra / group construction ---------------------------------------

class NotClosed(PhasecraftError):
    """Commutators of the given matrices leave their span."""


class Degenerate(PhasecraftError):
    """Basis matrices are linearly dependent."""


class Overflow(PhasecraftError):
    """Matrix argument too large for a trustworthy exponential."""


class Singular(PhasecraftError):
    """A matrix that must be invertible is (numerically) singular."""


class SingularMetric(Singular):
    """A bilinear form that must be invertible is singular."""


# --- Poisson machinery -------------------------------------------------------

class DimensionMismatch(PhasecraftError):
    """Operands live on phase spaces of different dimensions."""


class ChartSingular(PhasecraftError):
    """Point sits on the polar axis where the angle chart is undefined."""


class OriginOrbit(PhasecraftError):
    """Point is the zero-dimensional orbit at the origin."""


# --- cocycle calculus ---------------------------------------------------------

class DegreeOverflow(PhasecraftError):
    """Coboundary of a top-degree form requested."""


class NotSubalgebra(PhasecraftError):
    """Null space of the two-form is not closed under the bracket."""


# --- rigid / affine dynamics --------------------------------------------------

class NoConvergence(PhasecraftError):
    """Implicit solver failed to reach tolerance."""


class NoPotential(PhasecraftError):
    """Torque requested for a model without a potential."""


class ModelMismatch(PhasecraftError):
    """Energy routine called with an inertia model of the wrong kind."""


class OrientationReversed(PhasecraftError):
    """Configuration matrix has negative determinant."""


class SingularConfiguration(PhasecraftError):
    """Deformation invariants collided; lattice terms blow up."""


# --- ensembles -----------------------------------------------------------------

class EmptyShell(PhasecraftError):
    """No Monte Carlo sample hit the shell."""


class NotNormalized(PhasecraftError):
    """Probability vector does not sum to one."""


# --- grid transforms ------------------------------------------------------------

class GridTooCoarse(PhasecraftError):
    """Signal leaks into the outer spectral window; transform would alias."""


class GridMismatch(PhasecraftError):
    """Operands sampled on different phase-space grids."""


class TurningPoint(PhasecraftError):
    """Mixed-derivative determinant vanishes; WKB amplitude undefined."""


class ZeroTime(PhasecraftError):
    """Free propagator evaluated at tau = 0 (the delta limit)."""


class NoCriticalPoint(PhasecraftError):
    """Sampled function has no interior stationary point."""


# --- CLI -------------------------------------------------------------------------

class SchemaError(PhasecraftError):
    """Scenario file violates the expected schema."""


class IoError(PhasecraftError):
    """Scenario or artifact file could not be read or written."""
