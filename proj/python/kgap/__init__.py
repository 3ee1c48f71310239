"""Collision operator checks, spectra and perturbative dynamics.

Configs are plain dicts with the same flat keys as the JSON config files.
"""

import json as _json

from . import _kgap
from ._kgap import SCHEMA, NumericalAbort, maxwellian, nodes, suite_names

__all__ = [
    "SCHEMA",
    "NumericalAbort",
    "collide",
    "collision",
    "config",
    "evolve",
    "maxwellian",
    "nodes",
    "spectrum",
    "suite_names",
    "verify",
]


def _text(cfg):
    return _json.dumps(cfg or {})


def config(cfg=None):
    """Validated config with every default filled in."""
    return _json.loads(_kgap.normalize_config(_text(cfg)))


def verify(suite="all", cfg=None):
    """Run a verification suite; returns the report envelope as a dict."""
    return _json.loads(_kgap.run_suite(suite, _text(cfg)))


def collide(cfg=None):
    return _json.loads(_kgap.collide(_text(cfg)))


def collision(f, g, cfg=None):
    return _kgap.collision(f, g, _text(cfg))


def spectrum(cfg=None):
    out = _kgap.spectrum(_text(cfg))
    out["reports"] = _json.loads(out["reports"])
    return out


def evolve(cfg=None):
    out = _kgap.evolve(_text(cfg))
    out["summary"] = _json.loads(out["summary"])
    out["reports"] = _json.loads(out["reports"])
    if "picard" in out:
        out["picard"] = _json.loads(out["picard"])
    return out
