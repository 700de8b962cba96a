"""Weighted Fock space numerics: rho, Bergman kernel and check suites."""

import json

from ._core import ConfigError, FockError
from ._core import config_hash as _config_hash
from ._core import kernel as _kernel
from ._core import rho as _rho
from ._core import run_suite as _run_suite
from ._core import suite_names

__all__ = ["ConfigError", "FockError", "config_hash", "kernel", "rho", "run_suite", "suite_names"]


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def rho(weight, z, L=0.0, n=257):
    """rho(z) for a weight descriptor (dict or JSON text)."""
    return _rho(_text(weight), complex(z), L, n)


def kernel(config, pairs):
    """[(K(z, zeta), K rho(z) rho(zeta) e^{-phi(z)-phi(zeta)})] for each (z, zeta)."""
    return _kernel(_text(config), [(complex(a), complex(b)) for a, b in pairs])


def run_suite(config, suite):
    """Report dict with checks, tables and artifacts."""
    return json.loads(_run_suite(_text(config), suite))


def config_hash(config):
    return _config_hash(_text(config))
