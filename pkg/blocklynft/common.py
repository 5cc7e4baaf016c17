"""
Low-level blocklynft functionality common to all modules.

Any code that is potentially common to all blocklynft sub-commands
should live in this module. This module should never depend on any
other blocklynft module.
"""

from __future__ import annotations

import hashlib
import math
import os

try:
    from blocklynft.version import BLOCKLYNFT_VERSION_STRING
except ImportError:
    # version.py is written by setuptools_scm at build time
    BLOCKLYNFT_VERSION_STRING = "0+unknown"


class BlocklyNftError(RuntimeError):
    """
    Root of every error blocklynft raises on purpose.

    'case' is a short kebab-case name identifying which of the documented
    failure cases occurred; the HTTP layer and the CLI report it verbatim.
    """

    case = "error"

    def __init__(self, message, case=None):
        super(BlocklyNftError, self).__init__(message)
        if case is not None:
            self.case = case


def render_value(value):
    """
    Text rendering of a runtime value: integral numbers without a decimal
    point, other numbers as the shortest round-trip decimal, text verbatim,
    booleans as true/false and unit (None) as the empty string.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isfinite(value) and value.is_integer():
            return str(int(value))
        return repr(value)
    return str(value)


def is_number(value):
    # bool is an int subclass; it is never a number here
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def is_finite_number(value):
    """A number that is neither NaN nor infinite and fits a float."""
    if not is_number(value):
        return False
    try:
        return math.isfinite(value)
    except OverflowError:
        return False


def sha256_hex(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def data_file(name):
    """Path of a sample file bundled with the package."""
    return os.path.join(DATA_DIR, name)


def search_up_for_file(path):
    """
    Search up the file tree for a file matching the base name of the path provided.

    Returns either the path to the file found or None if search fails.
    """
    path = os.path.abspath(path)
    filename = os.path.basename(path)
    dir = os.path.dirname(path)
    while not os.path.exists(os.path.join(dir, filename)):
        newdir = os.path.dirname(dir)
        if newdir == dir:
            return None
        dir = newdir
    return os.path.abspath(os.path.join(dir, filename))


class Serialized(dict, object):
    """
    A base class for serialized objects.  Regular attributes are stored in the inherited dictionary
    and will be serialized. Class variables will be handled normally and are not serialized.
    """

    def __getattr__(self, name):
        if name in self:
            return self[name]
        else:
            raise AttributeError("object has no attribute '%s'" % name)

    def __setattr__(self, name, value):
        if name in self.__class__.__dict__:
            self.__dict__[name] = value
        else:
            self[name] = value

    def copy(self):
        """
        Intercept attempts to copy like a dict, need to preserve leaf class
        instead of letting dict.copy() return a simple dict.
        """
        return self.__class__(self)
