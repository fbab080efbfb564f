"""Toy-scale numerical laboratory for uncloneable encryption constructions.

Modules: ``qstate`` (dense state algebra), ``twirl`` (Haar twirl and the
purification channel), ``symcrypto`` (PRF and nonce SKE), ``ucbit`` (one-bit
base schemes), ``garble`` and ``dqre`` (classical and quantum randomized
encodings), ``compilers`` (expansion, normal form, identical-copy),
``games`` (security-game harness) and ``cli``.
"""
from importlib.resources import files

__version__ = "0.1.0"


def data_path(name: str):
    """Path of a data file shipped with the package."""
    return files(__name__) / "data" / name
