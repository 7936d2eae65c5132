from .backward import (
    backward_rule,
    exchange_any,
    make_create_l,
    make_put_l,
    placeholder_origins,
    replay_backward,
    reverse_io,
    synthesize_backward,
)
from .defaults import DefaultsFile, apply_defaults, placeholder_sorts, read_defaults, render_template
from .forward import add_c_holder, holder_cell, make_create_r, make_put_r, synthesize_forward

__all__ = [
    "DefaultsFile",
    "add_c_holder",
    "apply_defaults",
    "backward_rule",
    "exchange_any",
    "holder_cell",
    "make_create_l",
    "make_create_r",
    "make_put_l",
    "make_put_r",
    "placeholder_origins",
    "placeholder_sorts",
    "read_defaults",
    "render_template",
    "replay_backward",
    "reverse_io",
    "synthesize_backward",
    "synthesize_forward",
]
