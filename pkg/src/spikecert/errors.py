"""Shared exception types for certificate handling and certification."""


class CertificateError(ValueError):
    """Certificate file is malformed or violates a schema invariant."""


class CertificationError(ValueError):
    """A certified bound could not be established (this is a verdict, not a bug)."""
