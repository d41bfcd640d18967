"""Exception hierarchy shared by every avcp module."""


class AVCPError(Exception):
    """Base class for all errors raised by avcp."""


# operator core

class DimensionMismatch(AVCPError, ValueError):
    pass


class ScaleMismatch(AVCPError, ValueError):
    """Two operators carry different hbar scales."""


class NotHermitian(AVCPError, ValueError):
    pass


class NotUnitary(AVCPError, ValueError):
    pass


class NotNormalized(AVCPError, ValueError):
    pass


class ZeroProjection(AVCPError, RuntimeError):
    """A drawn outcome has (numerically) vanishing projection."""


# symbolic algebra

class UnknownSymbol(AVCPError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotSimple(AVCPError, ValueError):
    """A polynomial mixes symbols whose operators do not commute.

    ``witness`` holds one offending word (a tuple of symbol names).
    """

    def __init__(self, witness, message=None):
        self.witness = tuple(witness)
        if message is None:
            message = "not simple: word %s mixes non-commuting symbols" % "*".join(
                self.witness
            )
        super().__init__(message)


class NonScalarCommutator(AVCPError, ValueError):
    pass


class BindingMismatch(AVCPError, ValueError):
    """Bound operators contradict the declared commutation facts."""


class UnresolvedParameter(AVCPError, ValueError):
    """A scalar parameter has no numeric value at evaluation time."""


class ParseError(AVCPError, ValueError):
    """Malformed input. ``line`` and ``column`` are 1-based, or None when no position applies."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = "%s (line %d, column %d)" % (message, line, column or 1)
        super().__init__(message)


# representations

class InvalidSpin(AVCPError, ValueError):
    pass


class InvalidGrid(AVCPError, ValueError):
    pass


class SlotMismatch(AVCPError, ValueError):
    pass


class BoundaryLeak(AVCPError, ValueError):
    """A wavepacket is not supported in the interior of the periodic box."""


# arrangements

class InconsistentCommutation(AVCPError, ValueError):
    pass


class CopyAssignmentConflict(AVCPError, ValueError):
    """Pairwise same/different-copy rules cannot be met by any partition."""


# demos / cli

class InputsCommute(AVCPError, ValueError):
    pass


class UnknownCheckName(AVCPError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownDemo(AVCPError, KeyError):
    def __str__(self):
        return Exception.__str__(self)
