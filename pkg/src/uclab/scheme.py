"""The (Gen, Enc, Dec) interface shared by every scheme in the package."""
from __future__ import annotations

import abc
from typing import Any

import numpy as np


class ConfigError(ValueError):
    """A scheme stack or experiment configuration is inconsistent."""


class Scheme(abc.ABC):
    """Symmetric encryption scheme.

    ``dec`` may be randomized (quantum measurement); ``dec_distribution``
    returns the exact output distribution where the scheme can compute it.
    """

    name: str = "scheme"
    message_length: int = 1
    normal_form: bool = False
    pure: bool = False

    @abc.abstractmethod
    def gen(self, rng: np.random.Generator) -> tuple[Any, Any]: ...

    @abc.abstractmethod
    def enc(self, ek: Any, m: str, rng: np.random.Generator) -> Any: ...

    @abc.abstractmethod
    def dec(self, dk: Any, ct: Any, rng: np.random.Generator | None = None) -> str: ...

    def dec_distribution(self, dk: Any, ct: Any) -> dict[str, float]:
        return {self.dec(dk, ct, None): 1.0}

    def check_message(self, m: str) -> None:
        if len(m) != self.message_length or set(m) - {"0", "1"}:
            raise ValueError(f"{self.name}: message must be a {self.message_length}-bit string, got {m!r}")

    def describe(self) -> dict:
        return {"name": self.name, "message_length": self.message_length, "normal_form": self.normal_form}


class PureScheme(Scheme):
    """Enc is ``E_ek |m, r, 0>`` for sampled classical randomness ``r``."""

    pure = True

    @abc.abstractmethod
    def sample_randomness(self, rng: np.random.Generator) -> Any: ...

    @abc.abstractmethod
    def enc_with(self, ek: Any, m: str, r: Any) -> Any: ...

    def enc(self, ek, m, rng):
        return self.enc_with(ek, m, self.sample_randomness(rng))
