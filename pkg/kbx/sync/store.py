"""ComplementsStore: the complements map kept next to a target model.

The store for ``model.txt`` lives in ``model.txt.kbxc`` (suffix
configurable) as the canonical text of one ground map term.  ``sync``
loads it before extracting complements and saves the updated map after.
A single ``threading.Lock`` guards file writes so parallel bench cases
can share one instance.
"""

from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Optional

from ..errors import TermError
from ..sexpr import read_term
from ..terms import DOT_MAP, Term, canonical, is_ground, make_map, map_items

logger = logging.getLogger(__name__)

DEFAULT_SUFFIX = ".kbxc"


def sidecar_path(target: Path, suffix: str = DEFAULT_SUFFIX) -> Path:
    target = Path(target)
    return target.with_name(target.name + suffix)


def normalize_store(term: Term) -> Term:
    """A ground map in canonical order; ``.Map`` for the empty store."""
    items = map_items(term)
    if items is None or not is_ground(term):
        raise TermError(f"a complements store must be a ground map, got {canonical(term)}")
    return make_map(items) if items else DOT_MAP


class ComplementsStore:
    def __init__(self, suffix: str = DEFAULT_SUFFIX) -> None:
        self.suffix = suffix
        self._lock = threading.Lock()

    def path_for(self, target: Path) -> Path:
        return sidecar_path(target, self.suffix)

    def load(self, target: Path, path: Optional[Path] = None) -> Term:
        """The store for ``target``; ``.Map`` when no sidecar exists yet."""
        path = Path(path) if path is not None else self.path_for(target)
        if not path.exists():
            logger.debug("no store at %s, starting empty", path)
            return DOT_MAP
        store = normalize_store(read_term(path.read_text(encoding="utf-8")))
        logger.info("loaded store %s (%d entries)", path, len(map_items(store)))
        return store

    def save(self, target: Path, store: Term, path: Optional[Path] = None) -> Path:
        path = Path(path) if path is not None else self.path_for(target)
        store = normalize_store(store)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(canonical(store) + "\n", encoding="utf-8")
        logger.info("wrote store %s", path)
        return path
