"""Text in and out: the ``.kbx`` reader, generated model parsers, printers."""

from .dsl import parse_definition
from .grammar import model_to_cell, parse_model, parse_pattern, read_model
from .printer import print_definition, print_model, print_pattern

__all__ = [
    "model_to_cell",
    "parse_definition",
    "parse_model",
    "parse_pattern",
    "print_definition",
    "print_model",
    "print_pattern",
    "read_model",
]
