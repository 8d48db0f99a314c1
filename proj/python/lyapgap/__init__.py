"""Singular value gaps of noisy matrix products.

Thin re-export of the compiled core. In an installed wheel the extension
lives inside this package; in a build tree it sits at the top level next to
the package directory, hence the fallback.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc
except ImportError:
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc

__doc__ = _core_doc or __doc__
__version__ = "0.1.0"
