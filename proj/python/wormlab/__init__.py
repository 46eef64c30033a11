"""Worm-domain boundary analysis: geometry, boundary ODE spectra, Mellin
transforms and empirical estimate constants."""

import json as _json

from ._wormlab import (
    ConfigError,
    NumericalError,
    OdeCoefficients,
    WormConfig,
    alpha_coefficient,
    bound_5_1_point,
    config_hash,
    count_zeros,
    derive_seed,
    dirichlet_sigma_min,
    exceptional_sobolev,
    lambda_conjugation_symbol,
    lemma2_check,
    lemma2_sweep,
    levi_coefficients,
    locate_zeros,
    mellin_at,
    mellin_defects,
    mellin_nodes,
    pseudoconvexity_scan,
    q_cutoff_profile,
    shoot,
)
from ._wormlab import load_config as _load_config_text

__version__ = "0.1.0"


def load_config(path, overrides=()):
    """Resolved configuration as a dict; overrides are "dotted.path=value"."""
    return _json.loads(_load_config_text(str(path), list(overrides)))
