from selfsim.core.ifs import (
    IFS,
    CylinderNode,
    attractor_sample,
    compose,
    cylinder,
    hull_interval,
    ifs_distance,
    invariant_ball,
)
from selfsim.core.loader import dump_ifs, ifs_hash, load_ifs, parse_ifs
from selfsim.core.similitude import Ball, Similitude, Word, iter_words, parse_word, validate_word
from selfsim.core.tree import CylinderTree, Frontier, cylinder_tree

__all__ = [
    "IFS", "CylinderNode", "attractor_sample", "compose", "cylinder", "hull_interval",
    "ifs_distance", "invariant_ball", "dump_ifs", "ifs_hash", "load_ifs", "parse_ifs",
    "Ball", "Similitude", "Word", "iter_words", "parse_word", "validate_word",
    "CylinderTree", "Frontier", "cylinder_tree",
]
