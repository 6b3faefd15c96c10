"""Vocabulary surgery and offline distillation toolkit."""

try:
    from ._vsrg import *  # noqa: F401,F403  (installed package layout)
    from ._vsrg import __version__  # noqa: F401
except ImportError:  # pragma: no cover - in-tree builds put _vsrg on PYTHONPATH
    from _vsrg import *  # noqa: F401,F403
    from _vsrg import __version__  # noqa: F401
