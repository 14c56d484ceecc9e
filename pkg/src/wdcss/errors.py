"""Error and warning types shared across the library.

Errors carry an ``exit_code`` so the CLI can map failure classes to process
exit codes without inspecting types at every call site: 1 for configuration
problems, 2 for violated math preconditions, 3 for numerical failures.
"""


class WdcssError(Exception):
    """Base class for library errors. Defaults to a math-precondition failure."""

    exit_code = 2


class ConfigError(WdcssError):
    """Invalid configuration input (bad scenario field, malformed file)."""

    exit_code = 1


class NonOrthogonalSeed(WdcssError):
    """Seed sequences are not a complementary/orthogonal pair."""


class SizeOverflow(WdcssError):
    """Requested cascade depth exceeds the supported matrix size cap."""


class IndexOutOfRange(WdcssError):
    """Block or column index outside the candidate structure."""


class DuplicateColumn(WdcssError):
    """Column selection contains repeated indices."""


class TheoremOneViolation(WdcssError):
    """Code length exceeds the pulse count; full lag cancellation impossible."""


class LagOutOfRange(WdcssError):
    """Correlation lag with no overlap for the given code length."""


class GridMismatch(WdcssError):
    """Time quantities do not land on the sampling grid."""


class UnsupportedLength(WdcssError):
    """No complementary-pair construction available for the requested length."""


class DegenerateSlice(WdcssError):
    """Sampling gate slice shorter than one sample."""


class WindowTooSmall(WdcssError):
    """Receive window cannot hold the configured echoes."""


class OutOfWindow(WdcssError):
    """Requested delay lies outside the synthesized receive window."""


class NumericalDivergence(WdcssError):
    """Filter state left the representable range (NaN/Inf covariance)."""

    exit_code = 3


class MissingReference(WdcssError):
    """Metric computation lacks the clean reference level."""


class ReplayOverrun(UserWarning):
    """Jammer replay extends past the receive window and was clipped."""


class CompensationShortfall(UserWarning):
    """Clean set shorter than the excised set; compensation span clipped."""
