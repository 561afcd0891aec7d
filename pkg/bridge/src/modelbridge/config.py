"""Service configuration."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_MASK_TOKEN = "<mask>"


@dataclass(frozen=True)
class BridgeConfig:
    """Which models to serve and how.

    Model fields accept "builtin" for the seeded miniature models or a
    filesystem path to a checkpoint saved by models.save_model.  The reported
    mask_token always equals the infiller tokenizer's mask token; the store
    enforces that at load time.
    """

    classifier: str = "builtin"
    generator: str = "builtin"
    infiller: str = "builtin"
    device: str = "cpu"
    mask_token: str = DEFAULT_MASK_TOKEN
    max_length: int = 256
    port: int = 8200
    seed: int = 0

    def __post_init__(self):
        if not self.mask_token:
            raise ValueError("mask_token must be non-empty")
        if self.max_length < 8:
            raise ValueError("max_length must be at least 8, got %d" % self.max_length)
        if not (0 < self.port < 65536):
            raise ValueError("port must lie in (0, 65536), got %d" % self.port)
