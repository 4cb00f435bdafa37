"""Exception hierarchy shared by all qsonify modules.

Every domain error derives from :class:`QsonifyError` so the CLI can map
any library failure to exit code 1 with a module-tagged message.
"""


class QsonifyError(Exception):
    """Base class for all qsonify domain errors."""


class EntropyExhausted(QsonifyError):
    """A file-backed entropy source has fewer than 8 bytes left."""


class InvalidParam(QsonifyError):
    """A parameter violates an operation's precondition."""


class ModelDomain(QsonifyError):
    """Requested model is outside its validity domain (e.g. overdamped drive)."""


class InvalidBins(QsonifyError):
    """Histogram bin edges are not strictly increasing."""


class NumericalInconsistency(QsonifyError):
    """An internal consistency check failed (e.g. imaginary residue too large)."""


class DegenerateField(QsonifyError):
    """Field integral too small for the requested statistic to be defined."""


class EmptyField(QsonifyError):
    """Field holds no nodes."""


class BudgetExceeded(QsonifyError):
    """Node count exceeds the synthesis voice budget (soft limit, overridable)."""


class DegenerateAnchors(QsonifyError):
    """Quadratic-map anchors do not satisfy w_min < 0 < w_max."""


class FlatField(QsonifyError):
    """Field has no value range (max equals min)."""


class NyquistExceeded(QsonifyError):
    """A requested frequency is at or above half the sample rate (or 20 kHz cap)."""


class TooManyPartials(QsonifyError):
    """More oscillator voices requested than the renderer accepts."""


class NoConvergence(QsonifyError):
    """Self-consistency iteration hit the iteration cap.

    Carries diagnostics: the last iterate (``state``), the residuals of the
    order parameter and the mean occupation, and the iteration count.  When
    raised from a parameter sweep, ``schedule_index`` names the failing point.
    """

    def __init__(self, message, *, state=None, residual_phi=None,
                 residual_n=None, iterations=None, schedule_index=None):
        super().__init__(message)
        self.state = state
        self.residual_phi = residual_phi
        self.residual_n = residual_n
        self.iterations = iterations
        self.schedule_index = schedule_index


class RangeUnplayable(QsonifyError):
    """No octave shift brings a pitch inside the voice's playable range."""


class BadChunkCount(QsonifyError):
    """A chunk analysis does not hold exactly four chunks."""
