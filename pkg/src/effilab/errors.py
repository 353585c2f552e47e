"""Exception types shared across the package.

The CLI maps these onto process exit codes: usage problems exit 1,
numerical failures exit 2, verification failures exit 3.
"""

from __future__ import annotations

__all__ = [
    "EffilabError",
    "NumericalError",
    "BracketError",
    "SimulationError",
    "VerificationError",
]


class EffilabError(Exception):
    """Base class for package-specific failures."""


class NumericalError(EffilabError):
    """A numerical routine failed to reach its target accuracy.

    Parameters
    ----------
    message : str
        Human-readable description.
    residual : float, optional
        The achieved residual or error estimate, if one is available.
    """

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (residual estimate {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class BracketError(NumericalError):
    """Root bracketing failed; carries the range actually achieved.

    Signals an unattainable target (for instance a (u, v, n) combination
    the likelihood-ratio envelope cannot reach), not a code fault.
    """

    def __init__(self, message: str, achieved_low: float, achieved_high: float):
        super().__init__(
            f"{message}; achieved range [{achieved_low:.6g}, {achieved_high:.6g}]"
        )
        self.achieved_low = achieved_low
        self.achieved_high = achieved_high


class SimulationError(EffilabError):
    """Monte Carlo run aborted (for example, too many failed fits)."""


class VerificationError(EffilabError):
    """A verification-suite check did not hold."""
