"""Energy benchmarking of image classifiers on edge-device profiles."""

try:
    from ._edgebench import *  # noqa: F401,F403
except ImportError:  # in-tree build: the extension sits next to this package, not inside it
    from _edgebench import *  # noqa: F401,F403
