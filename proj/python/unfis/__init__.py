"""UNFIS: neuro-fuzzy classification with embedded feature selection.

Everything lives in the compiled extension; this package just re-exports it
under a stable name.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __version__  # noqa: F401
except ImportError:  # pragma: no cover - build-tree layouts
    from _core import *  # type: ignore # noqa: F401,F403
    from _core import __version__  # type: ignore # noqa: F401
