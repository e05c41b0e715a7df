# -*- coding: utf-8 -*-
"""Exceptions raised by subrad."""


class SubradError(Exception):
    pass


class ConfigError(SubradError):
    """Invalid run configuration, ``path`` is the dotted field name."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f'{path}: {message}'
        super().__init__(message)


class SingularSpacingError(SubradError):
    pass


class SpectrumError(SubradError):
    def __init__(self, message, realization_index=None):
        self.realization_index = realization_index
        if realization_index is not None:
            message = f'realization {realization_index}: {message}'
        super().__init__(message)


class DataError(SubradError):
    pass


class EnsembleError(SubradError):
    pass


class CollapseError(SubradError):
    pass
