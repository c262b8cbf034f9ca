"""Exception types raised across the package."""

import numpy as np


class MvicadError(Exception):
    """Base class for all package errors."""


class ShapeError(MvicadError, ValueError):
    """Array dimensions do not agree.

    Parameters
    ----------
    axis : str
        Name of the mismatched axis (e.g. ``"sources"``, ``"samples"``).
    """

    def __init__(self, message, axis=None):
        super().__init__(message)
        self.axis = axis


class ParameterError(MvicadError, ValueError):
    """A scalar parameter is outside its admissible range."""


class SingularMatrixError(MvicadError, np.linalg.LinAlgError):
    """An unmixing matrix (or covariance) is singular."""

    def __init__(self, message, view=None):
        super().__init__(message)
        self.view = view


class DatasetError(MvicadError):
    """Base class for on-disk dataset problems."""


class ManifestError(DatasetError):
    """The manifest is missing keys or holds invalid values."""


class MissingFileError(DatasetError, FileNotFoundError):
    pass


class SizeMismatchError(DatasetError):
    pass


class NonFiniteError(DatasetError):
    pass
