# -*- coding: utf-8 -*-
""" Exceptions raised by the constructions. All of them are ValueError or RuntimeError subclasses so callers
    that only care about "bad input" versus "search gave up" can catch the built-in bases. """


class SchemaError(ValueError):
    """An instance file does not match the expected JSON layout."""


class LengthMismatchError(ValueError):
    """pair_code received components of different lengths."""


class AcceptanceError(ValueError):
    """A node or tuple is not accepted by the tree or condition it is applied to."""

    def __init__(self, message: str, coordinate: int = None):
        super().__init__(message)
        self.coordinate = coordinate


class ModulusError(ValueError):
    """A code produced less output than its declared modulus promises."""


class CoherenceError(ValueError):
    """A prefix is not an initial segment of any encoding g_{h,z}."""


class CertificateError(ValueError):
    """A supplied eventual-difference certificate is contradicted by direct evaluation."""

    def __init__(self, message: str, witness: tuple = None):
        super().__init__(message)
        self.witness = witness


class DominationError(ValueError):
    """The block function g* does not dominate the sequence m_k."""

    def __init__(self, message: str, witness: tuple = None):
        super().__init__(message)
        self.witness = witness


class SearchCapExhausted(RuntimeError):
    """The fusion search reached its depth cap without finding an admissible extension.

    This is the finite symptom of the catch hypothesis failing for the supplied code and family.
    """

    def __init__(self, message: str, tuple_=None, stage: int = None, depth: int = None, greedy_stage: int = None):
        super().__init__(message)
        self.tuple = tuple_
        self.stage = stage
        self.depth = depth
        self.greedy_stage = greedy_stage
