"""Atomic diagrams, Borel codes and reductions from Cantor space to countable structures."""
from __future__ import annotations

from .diagrams import DiagramPrefix, StructureStream, decode, encode, eval_staged
from .formulas import (
    FiniteStructure, Formula, Level, PrenexForm, Vocabulary, classify, eval_finite,
    parse_formula, prenex, to_text,
)
from .pointclasses import MatrixPoint, UPPoint, canonical_set, member_up, verdict_prefix
from .transducers import Transducer, check_monotone, check_productive, compose, run

__version__ = "0.1.0"
