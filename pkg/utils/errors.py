"""Exception hierarchy shared by the library, the services and the CLI."""


class KummerError(Exception):
    """Base class. `reference` names the statement a failure relates to."""

    reference = ""

    def __init__(self, message="", reference=None):
        super().__init__(message)
        if reference is not None:
            self.reference = reference


class FieldMismatch(KummerError):
    pass


class DivisionByZero(KummerError, ZeroDivisionError):
    pass


class UnsupportedField(KummerError):
    pass


class FormatError(KummerError, ValueError):
    pass


class LengthMismatch(KummerError, ValueError):
    pass


class CharacteristicTwo(KummerError):
    reference = "the simplified model y^2 = 4f + h^2 needs characteristic != 2"


class RootsNotRational(KummerError):
    pass


class SingularCurve(KummerError):
    reference = "nonsingularity conditions of the characteristic-2 normal forms"


class DegreeOverflow(KummerError):
    pass


class ExhaustedRetries(KummerError):
    pass


class NoRationalWeierstrassPoint(KummerError):
    pass


class UnsupportedDivisor(KummerError):
    pass


class TwoTorsionK2Zero(KummerError):
    reference = "k'_i = k_i / k_2 normalization of the translation matrix"


class FormulaSetMissing(KummerError):
    pass


class KernelDimensionUnexpected(KummerError):
    pass


class NotInSubfield(KummerError):
    pass


class CrossCheckFailed(KummerError):
    pass


class SelfCheckFailed(KummerError):
    pass


class StaleFormulaCache(KummerError):
    pass


class ZeroOutput(KummerError):
    reference = "duplication lemma: delta(x) = 0 forces x = 0"


class AllPivotsFailed(KummerError):
    reference = "biquadratic lemma: all B_ij vanish forces x = 0 or y = 0"


class CounterexampleFound(KummerError):
    pass


class SuiteFailed(KummerError):
    pass


class DegenerateSample(KummerError):
    """A sample that cannot feed a linear system; callers draw another."""
