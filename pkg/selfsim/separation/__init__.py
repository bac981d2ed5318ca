from selfsim.separation.certify import SeparationCert, certify_ssc, lambda_floor, radius_range
from selfsim.separation.open_set import (
    Membership,
    OpenSetPredicate,
    attractor_distance,
    ball_in_open_set,
    sosc_open_set,
)

__all__ = [
    "SeparationCert", "certify_ssc", "lambda_floor", "radius_range", "Membership", "OpenSetPredicate",
    "attractor_distance", "ball_in_open_set", "sosc_open_set",
]
