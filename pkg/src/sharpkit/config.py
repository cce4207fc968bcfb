"""Central tolerance record shared by every module.

The defaults can be overridden process-wide through the ``SHARPKIT_TOL``
environment variable, which holds a JSON object of field overrides, e.g.
``SHARPKIT_TOL='{"gap": 1e-9, "max_iter": 300}'``.
"""

from __future__ import annotations

import dataclasses
import json
import os


@dataclasses.dataclass(frozen=True)
class Tolerances:
    gap: float = 1e-8          # relative duality gap accepted as "optimal"
    feas: float = 1e-8         # primal residual accepted as "optimal"
    margin: float = 1e-7       # strict separation required for an infeasibility verdict
    feasible: float = 1e-9     # phase-1 violation at or below which a problem is feasible
    psd: float = 1e-9          # PSD test, relative to the largest eigenvalue magnitude
    completeness: float = 1e-9
    hermitian: float = 1e-8    # larger asymmetry is rejected instead of symmetrized
    sharp: float = 1e-7
    classify: float = 1e-8
    witness_margin: float = 1e-8
    convert_residual: float = 1e-7
    max_iter: int = 200

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)


def from_env(env: dict | None = None) -> Tolerances:
    env = os.environ if env is None else env
    raw = env.get("SHARPKIT_TOL")
    if not raw:
        return Tolerances()
    overrides = json.loads(raw)
    if not isinstance(overrides, dict):
        raise ValueError("SHARPKIT_TOL must hold a JSON object")
    known = {f.name for f in dataclasses.fields(Tolerances)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown tolerance fields: {sorted(unknown)}")
    return Tolerances(**overrides)


DEFAULT = from_env()
