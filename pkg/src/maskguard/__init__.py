"""maskguard: masking-based backdoor detection and purification for code models."""

__version__ = "0.1.0"
