"""Exception hierarchy.

Every exception carries enough context (the violated invariant and its
magnitude, or a witness) to be actionable without re-running the computation.
"""


class CtqrwError(Exception):
    """Base class for all errors raised by this package."""


class NonHermitianError(CtqrwError):
    """Matrix is not Hermitian within tolerance; carries the max defect."""

    def __init__(self, defect: float):
        self.defect = defect
        super().__init__(f"matrix is not Hermitian: max |M - M^dag| = {defect:.3e}")


class NonUnitTraceError(CtqrwError):
    """Trace differs from 1; carries the actual trace."""

    def __init__(self, trace: complex):
        self.trace = trace
        super().__init__(f"trace is {trace:.12g}, expected 1")


class NegativeEigenvalueError(CtqrwError):
    """State has an eigenvalue below tolerance; carries the magnitude."""

    def __init__(self, eigenvalue: float):
        self.eigenvalue = eigenvalue
        super().__init__(f"negative eigenvalue {eigenvalue:.3e}")


class DimMismatchError(CtqrwError):
    """Operator dimensions are inconsistent."""


class ClosureDefectError(CtqrwError):
    """Kraus closure sum C_i^dag C_i deviates from the identity."""

    def __init__(self, defect: float):
        self.defect = defect
        super().__init__(f"Kraus closure defect {defect:.3e}")


class BadWeightsError(CtqrwError):
    """Mixture weights are negative or do not sum to one."""


class NotCPError(CtqrwError):
    """Map is not completely positive; carries the Choi defect."""

    def __init__(self, cp_defect: float):
        self.cp_defect = cp_defect
        super().__init__(f"map is not completely positive: Choi min eigenvalue {cp_defect:.3e}")


class DefectiveGeneratorError(CtqrwError):
    """Generator is not diagonalizable (Jordan block detected)."""


class NotADistributionError(CtqrwError):
    """Inverted waiting-time density goes negative; carries a witness time."""

    def __init__(self, witness_t: float, value: float):
        self.witness_t = witness_t
        self.value = value
        super().__init__(f"w(t) = {value:.3e} < 0 at t = {witness_t:.6g}")


class DangerousKernelError(CtqrwError):
    """Operation requires a stochastically interpretable (safe) kernel."""


class SubordinationUnavailableError(CtqrwError):
    """Kernel admits no pointwise subordination density."""


class DomainError(CtqrwError):
    """Argument outside the supported domain."""


class GridTooCoarseError(CtqrwError):
    """Convolution self-consistency check failed on this grid."""


class TruncationError(CtqrwError):
    """Requested series tolerance unreachable with the allowed truncation."""


class UnsupportedKernelError(CtqrwError):
    """Closed forms exist only for the built-in kernel variants."""


class UnstableStepError(CtqrwError):
    """Time step exceeds the stability bound (trace drift detected)."""


class BadParametersError(CtqrwError):
    """Model parameters outside their documented ranges."""


class BadMomentsError(CtqrwError):
    """Jump-moment set is inconsistent (e.g. <|b|^2> < |<b>|^2)."""


class ConfigError(CtqrwError):
    """Experiment configuration is malformed; message names the key."""
