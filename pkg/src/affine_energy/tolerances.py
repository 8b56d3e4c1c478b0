"""Centralized tolerance ladder.

Deterministic-quadrature checks get 1-1.5%, mixed grid/quadrature paths
2-3%, heavy-tailed (truncated) families 5%, Monte Carlo paths 3% with fixed
seeds.  ``tolerance_for`` applies per-run overrides and a global scale.
"""

LADDER = {
    "deterministic": 0.01,
    "body": 0.015,
    "mixed": 0.02,
    "wide": 0.03,
    "mc": 0.03,
    "heavy_tail": 0.05,
}

KIND_CLASS = {
    "affine_sobolev_p": "heavy_tail",
    "morrey": "wide",
    "gn_i": "wide",
    "gn_ii": "wide",
    "logsob": "wide",
    "affine_sobolev_bv": "body",
    "petty_product": "deterministic",
    "busemann_petty": "deterministic",
}


def tolerance_for(kind: str, scale: float = 1.0, override: float | None = None) -> float:
    if override is not None:
        return override * scale
    return LADDER[KIND_CLASS.get(kind, "mixed")] * scale
