"""
Error Module
Exception hierarchy shared by every ShareChain component
"""


class ShareChainError(Exception):
    """Base class for all ShareChain errors"""


# =============================================================================
# Field arithmetic
# =============================================================================
class FieldError(ShareChainError):
    pass


class CompositeModulus(FieldError):
    pass


class ModulusTooSmall(FieldError):
    pass


class FieldMismatch(FieldError):
    pass


class ZeroInverse(FieldError):
    pass


class UndefinedPower(FieldError):
    pass


# =============================================================================
# Polynomials
# =============================================================================
class PolynomialError(ShareChainError):
    pass


class DuplicateNode(PolynomialError):
    pass


class WrongCount(PolynomialError):
    pass


# =============================================================================
# Two-level scheme
# =============================================================================
class SchemeError(ShareChainError):
    pass


class ThresholdInvalid(SchemeError):
    pass


class DuplicateKey(SchemeError):
    pass


class ZeroKey(SchemeError):
    pass


class TooManyParticipants(SchemeError):
    pass


class UnknownKey(SchemeError):
    pass


class GateViolation(SchemeError):
    """An f-share was read before the system released it"""


# =============================================================================
# Multisecret scheme
# =============================================================================
class MultiSecretError(ShareChainError):
    pass


class LengthMismatch(MultiSecretError):
    pass


class MessageBitsInvalid(MultiSecretError):
    pass


class ThresholdTooLarge(MultiSecretError):
    pass


# =============================================================================
# Protocol simulation
# =============================================================================
class ProtocolError(ShareChainError):
    pass


class ConfigInvalid(ProtocolError):
    """Invalid session or scenario configuration, optionally tied to a config line"""

    def __init__(self, message: str, line: int = None, field: str = None):
        self.detail = message
        self.line = line
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"{prefix}{message}")


class ModeUnavailable(ProtocolError):
    pass


# =============================================================================
# Chain
# =============================================================================
class ChainError(ShareChainError):
    pass


class NoTransactions(ChainError):
    pass


class CommitteeCollapse(ChainError):
    pass


class FieldTooSmall(ChainError):
    pass


class BalanceMismatch(ChainError):
    pass


class EmptyBlock(ChainError):
    pass


class DifficultyTooHigh(ChainError):
    pass


class OrphanParent(ChainError):
    pass


class InvalidPoW(ChainError):
    pass


class MerkleMismatch(ChainError):
    pass


class InvalidHeight(ChainError):
    pass


class UnvalidatedSecret(ChainError):
    pass


class CorruptStore(ChainError):
    pass


class StoreNotFound(CorruptStore):
    pass


# =============================================================================
# Command line
# =============================================================================
class CliError(ShareChainError):
    pass


class SelfCheckFailed(CliError):
    pass


class UnknownExample(CliError):
    pass
