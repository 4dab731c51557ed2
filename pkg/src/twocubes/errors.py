"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid configuration (e.g. precision below 53 bits)."""


class UnsupportedPrimeError(ValueError):
    """Prime outside the p = 2, 5 mod 9 family, or modulus of the wrong shape."""


class LatticePointError(ArithmeticError):
    """Evaluation requested on a lattice point (pole)."""


class PrecisionError(ArithmeticError):
    """Result could not be certified at the working precision; retry higher."""


class CertificationError(RuntimeError):
    """A cross-check that must hold failed (oracle pin, sign consistency...)."""
