"""Toolkit for machine-readable smartwatch privacy policies.

The package covers the whole lifecycle of a policy instance: the typed
in-memory model (`ppmkit.model`), the textual ``.ppm`` instance language
(`ppmkit.parser`, `ppmkit.printer`, `ppmkit.jsonio`), semantic validation
(`ppmkit.rules`), cross-policy analysis (`ppmkit.analysis`), a versioned
on-disk store (`ppmkit.store`), an HTTP facade (`ppmkit.service`) and a
CLI (`ppmkit.cli`).
"""

from ppmkit.model import PolicyInstance

__all__ = ["PolicyInstance"]
__version__ = "0.1.0"
