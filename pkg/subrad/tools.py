# -*- coding: utf-8 -*-
"""Developer utilities for pinning the BLAS thread count so that parallel
ensembles reproduce serial ones bit for bit. Not meant for general use.
"""

import ctypes
import glob
import os
import re
import subprocess
import sys
import warnings

MKL = 'mkl'
OBLAS = 'openblas'
CBLAS = 'cblas'  # could be either, decided by the symbols it exports


class BLAS:
    """BLAS library handle identified by its thread getter/setter."""

    def __init__(self, cdll):

        self.cdll = cdll
        self.kind = None

        for kind, getter, setter in (
            (MKL, 'MKL_Get_Max_Threads', 'MKL_Set_Num_Threads'),
            (OBLAS, 'openblas_get_num_threads', 'openblas_set_num_threads'),
        ):
            try:
                self.get_n_threads = getattr(cdll, getter)
                self.set_n_threads = getattr(cdll, setter)
                self.kind = kind
            except AttributeError:
                continue
            break

        if self.kind is None:
            raise NotImplementedError(
                f'BLAS must be {MKL} or {OBLAS} in {str(cdll)}'
            )

    def __repr__(self):
        name = 'MKL' if self.kind == MKL else 'OpenBLAS'
        return f'{name} @ {self.get_n_threads()} threads'


def _multiarray_path(numpy_module):
    # numpy >= 2 moved the extension modules to numpy/_core
    for sub in ('_core', 'core'):
        found = glob.glob(
            os.path.join(
                numpy_module.__path__[0], sub, '_multiarray_umath*.so'
            )
        )
        if found:
            return found[0]
    return None


def _bundled_blas_paths(numpy_module):
    # wheels ship OpenBLAS next to the package, e.g. numpy.libs/
    parent = os.path.dirname(numpy_module.__path__[0])
    return sorted(
        glob.glob(os.path.join(parent, 'numpy*.libs', '*openblas*.so*'))
    )


def get_blas_osys(numpy_module, osys):
    """Locate the BLAS linked into numpy with ldd (linux) or otool (darwin).

    Returns
    -------
    blas : BLAS or None
        None if no MKL or OpenBLAS library could be identified
    """

    if osys == 'linux':
        pattern = r'^\t.*{}.* => (?P<path>.*) \(0x.*$'
        command = ['ldd']
    elif osys == 'darwin':
        # conda mkl shows up as @rpath, older builds as @loader_path
        pattern = r'^\t@.*path/(?P<path>.*{}.*) \(.*\)$'
        command = ['otool', '-L']
    else:
        raise ValueError(f'get_blas_osys() does not support osys={osys}')

    multiarray = _multiarray_path(numpy_module)
    if multiarray is None:
        return None

    try:
        result = subprocess.run(
            args=command + [multiarray],
            check=True,
            stdout=subprocess.PIPE,
            universal_newlines=True,
        )
    except (OSError, subprocess.CalledProcessError):
        result = None

    paths = []
    if result is not None:
        for kind in (MKL, OBLAS, CBLAS):
            match = re.search(
                pattern.format(kind), result.stdout, flags=re.MULTILINE
            )
            if match:
                paths.append(match.groupdict()['path'])
    paths.extend(_bundled_blas_paths(numpy_module))

    for path in paths:
        try:
            return BLAS(ctypes.CDLL(path))
        except (OSError, NotImplementedError):
            continue
    return None


def get_blas(numpy_module):
    """Return BLAS object or None if neither MKL nor OpenBLAS is found."""

    if sys.platform.startswith('linux'):
        return get_blas_osys(numpy_module, 'linux')
    elif sys.platform == 'darwin':
        return get_blas_osys(numpy_module, 'darwin')

    warnings.warn(
        f'Searching for BLAS libraries on {sys.platform} is not supported.'
    )


class single_threaded:
    """Context manager running BLAS on one thread, restoring it on exit."""

    def __init__(self, numpy_module):
        self.blas = get_blas(numpy_module)

    def __enter__(self):
        if self.blas is not None:
            self.old_n_threads = self.blas.get_n_threads()
            self.blas.set_n_threads(1)
        else:
            warnings.warn(
                'No MKL/OpenBLAS found, assuming NumPy is single-threaded.'
            )
        return self

    def __exit__(self, *args):
        if self.blas is not None:
            self.blas.set_n_threads(self.old_n_threads)
            if self.blas.get_n_threads() != self.old_n_threads:
                raise RuntimeError(
                    f'Failed to reset {self.blas.kind} '
                    f'to {self.old_n_threads} threads (previous value).'
                )


def init_worker():
    """Pool initializer: one BLAS thread per worker process."""
    import numpy

    blas = get_blas(numpy)
    if blas is not None:
        blas.set_n_threads(1)
