"""Explanation-consistency scoring (C-Score) for CAM heatmaps."""

from ._cscore import (
    METHODS,
    InputError,
    bilinear_resize,
    class_cscore,
    cli_main,
    compose,
    form_gold_list,
    minmax_normalize,
    ms_gradcam_pp,
    pairwise_matrix,
    power_emphasis,
    score_manifest,
    soft_iou,
)

__all__ = [
    "METHODS",
    "InputError",
    "bilinear_resize",
    "class_cscore",
    "cli_main",
    "compose",
    "form_gold_list",
    "minmax_normalize",
    "ms_gradcam_pp",
    "pairwise_matrix",
    "power_emphasis",
    "score_manifest",
    "soft_iou",
]
