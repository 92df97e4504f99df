"""Exception hierarchy shared by every module.

Each error records the module that raised it so the command line can
report ``<module>: <cause>`` on a single line.
"""


class CesaroError(Exception):
    module = "cesaro"

    def __init__(self, message, *, module=None):
        super().__init__(message)
        if module is not None:
            self.module = module


class InvalidArgument(CesaroError, ValueError):
    """A caller supplied an argument outside the documented domain."""
