"""Figure renderers over radium-lab CSV results."""

__version__ = "0.1.0"

from .figures import FIGURE_IDS, FigureSpec, render  # noqa: F401
