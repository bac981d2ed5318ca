from selfsim.measure.blowup import (
    BlowupCheck,
    IdentityReport,
    blowup,
    check_blowup,
    cylinder_union_identity_check,
)
from selfsim.measure.evaluate import MeasureBound, ball_measure, box_measure, interval_measure

__all__ = [
    "BlowupCheck", "IdentityReport", "blowup", "check_blowup", "cylinder_union_identity_check",
    "MeasureBound", "ball_measure", "box_measure", "interval_measure",
]
