"""Band-resolved photon correlations of light scattered by a strongly driven atomic chain."""

__version__ = "0.1.0"

from .params import (  # noqa: E402
    Band,
    ChainGeometry,
    DressedParams,
    InvalidParameterError,
    collective_coupling,
    detection_phase,
    generalized_rabi,
    mixing_angle,
    secular_regime_check,
)
from .correlations import (  # noqa: E402
    csi,
    fringe_period_ratio,
    g2_chain,
    g2_strong_central_single_detector,
    g2_two_atom,
    g2_weak_field,
    phi,
)

__all__ = [
    "Band",
    "ChainGeometry",
    "DressedParams",
    "InvalidParameterError",
    "collective_coupling",
    "csi",
    "detection_phase",
    "fringe_period_ratio",
    "g2_chain",
    "g2_strong_central_single_detector",
    "g2_two_atom",
    "g2_weak_field",
    "generalized_rabi",
    "mixing_angle",
    "phi",
    "secular_regime_check",
]
