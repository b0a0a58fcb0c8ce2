"""Facial expression classification from active-patch shape and texture features."""

from ._backend import BACKEND

__version__ = "0.1.0"
