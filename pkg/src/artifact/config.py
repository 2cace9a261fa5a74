"""Canonical job descriptions and their hashes."""

import hashlib
import json

import numpy as np

CODE_VERSION = "0.1.0"


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, complex):
        return {"re": repr(value.real), "im": repr(value.imag)}
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (np.floating, np.integer)):
        return _plain(value.item())
    return value


def canonical(config):
    """Deterministic JSON text for a nested config of plain values."""
    return json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))


def config_hash(config):
    return hashlib.sha256(canonical(config).encode()).hexdigest()[:16]


def array_digest(values):
    arr = np.ascontiguousarray(np.asarray(values, dtype=float))
    return hashlib.sha256(arr.tobytes()).hexdigest()[:16]


def spec_description(spec):
    return {
        "name": spec.name,
        "alpha": spec.alpha,
        "beta": spec.beta,
        "C1": spec.C1,
        "rho": spec.rho,
        "poles": [(p.location, p.residue, p.order, p.leading) for p in spec.poles],
        "closed_form": spec.closed_form is not None,
    }


def num(x):
    """Shortest round-tripping text for a real number (numpy scalars included)."""
    return repr(float(x) + 0.0)  # + 0.0 folds -0.0 into 0.0
