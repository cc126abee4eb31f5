from typing import Any, Optional


class FormRingError(Exception):
    """Base class for every failure raised by the library.

    ``details`` carries structured context (failing entry, rule, block) so
    reports can print more than the message.
    """

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.details = details


class ConfigError(FormRingError):
    def __init__(self, message: str, key: Optional[str] = None) -> None:
        super().__init__(f"config key '{key}': {message}" if key else message, key=key)
        self.key = key


# ring_core
class PresentationInvalid(FormRingError):
    pass


class GeneratorOutOfBounds(FormRingError):
    pass


class NilpotentElement(FormRingError):
    pass


class NotMaximal(FormRingError):
    pass


# forms_groups
class DimensionMismatch(FormRingError):
    pass


class NonCommutativeBase(FormRingError):
    pass


class MembershipFailure(FormRingError):
    pass


# elem_words
class IndexOutOfRange(FormRingError):
    pass


class ArgNotInLambda(FormRingError):
    pass


class NotCongruentToIdentity(FormRingError):
    pass


class NotOrthogonal(FormRingError):
    pass


class ClosingArgNotInLambda(FormRingError):
    pass


class InsufficientDivisibility(FormRingError):
    pass


class RuleGap(FormRingError):
    pass


# reduction
class CosetNotUnimodular(FormRingError):
    pass


class LengthTooShort(FormRingError):
    pass


class NotUnimodular(FormRingError):
    pass


class UnsupportedSize(FormRingError):
    pass


class NotIsotropic(FormRingError):
    pass


class IdealNotInRadical(FormRingError):
    pass


# local_global
class CoverageGap(FormRingError):
    pass


class InsufficientDegree(FormRingError):
    pass


class CertificationFailure(FormRingError):
    pass


class NotComaximal(FormRingError):
    pass


class TelescopeMismatch(FormRingError):
    pass


class InsufficientCongruenceLevel(FormRingError):
    pass


class LevelTooLow(FormRingError):
    pass
