"""KBX: bidirectional model transformations synthesized from one
unidirectional rewrite definition.

Typical use::

    from kbx.corpus import load_definition, synthesize_pair, read_models
    from kbx.sync import sync_forward

    ux = load_definition("corpus/traffic/traffic.kbx")
    fwd, bwd = synthesize_pair(ux, open("corpus/traffic/traffic.kbxd").read())
    m, n = read_models(ux, source_text, target_text)
    result = sync_forward(fwd, bwd, m, n)
"""

__version__ = "0.1.0"
