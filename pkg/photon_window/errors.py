"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from typing import Optional


class PhotonWindowError(Exception):
    """Base class for all package errors."""


class InvalidParameter(PhotonWindowError, ValueError):
    """A parameter lies outside the domain of an operation."""


class NonPositiveFrequency(InvalidParameter):
    """The rf angular frequency used for scaling is not positive."""


class DivergentTerm(PhotonWindowError, ArithmeticError):
    """A Lorentzian term of a Bessel sum has a vanishing denominator."""


class DivergentWaitingTime(PhotonWindowError, ArithmeticError):
    """The mean waiting time for the first photon is infinite."""


class StepSizeUnderflow(PhotonWindowError, RuntimeError):
    """The adaptive integrator requested a step below its floor."""


class NoConvergence(PhotonWindowError, RuntimeError):
    """An iterative procedure did not meet its stopping criterion."""


class NoPairFound(PhotonWindowError, LookupError):
    """A maximum-minimum pair is absent where continuation should start."""


class FitWindowTooNarrow(PhotonWindowError, ValueError):
    """Too few points survive for a power-law fit."""


class ConfigParse(PhotonWindowError, ValueError):
    """A run configuration could not be parsed."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        key: Optional[str] = None,
    ) -> None:
        """Constructor.

        Args:
            message: Description of the problem.
            line: Line of the offending input, if known.
            column: Column of the offending input, if known.
            key: Offending configuration key, if known.
        """
        self.line = line
        self.column = column
        self.key = key
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
