try:
    from ._spherebispec import *  # noqa: F401,F403
except ImportError:  # in-tree build: extension sits on sys.path directly
    from _spherebispec import *  # noqa: F401,F403
