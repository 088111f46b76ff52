"""Exception hierarchy shared by every kernel module."""


class CinftyError(Exception):
    """Base class for all kernel errors."""


class ExprSyntaxError(CinftyError, ValueError):
    """Malformed expression text."""


class NonSmoothConstruct(ExprSyntaxError):
    """Division, log, sqrt or a fractional power in expression text."""


class VariableOutOfRange(CinftyError, ValueError):
    pass


class ArityMismatch(CinftyError, ValueError):
    pass


class IndexOutOfRange(CinftyError, IndexError):
    pass


class RelationNotInMaximalIdeal(CinftyError, ValueError):
    pass


class ZeroAlgebra(CinftyError, ValueError):
    pass


class AlgebraMismatch(CinftyError, ValueError):
    pass


class RingMismatch(CinftyError, ValueError):
    pass


class ChainMismatch(CinftyError, ValueError):
    pass


class SourceMismatch(CinftyError, ValueError):
    pass


class UnsupportedRepresentative(CinftyError, ValueError):
    pass


class NotAPoint(CinftyError, ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotAMorphism(CinftyError, ValueError):
    def __init__(self, message, relation_index=None, witness=None):
        super().__init__(message)
        self.relation_index = relation_index
        self.witness = witness


class MorphismFalsified(CinftyError, ValueError):
    pass


class NameClash(CinftyError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "name clash"
