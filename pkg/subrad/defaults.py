# -*- coding: utf-8 -*-
"""Default values for chain parameters, grids, targets and analysis
thresholds. Every value here can be overridden in the run config."""

import numpy as np

#: phase per lattice spacing, phi = k0 * d
PHI = 0.5 * np.pi

#: single-qubit decay rate
GAMMA = 1.0

#: lattice spacing of the ordered chain
SPACING = 1.0

#: master seed of the disorder ensemble
MASTER_SEED = 20240611

#: spacing phases closer than this to a multiple of pi are singular
POLE_GUARD = 1e-9

#: modes with |k_est - phi| below this are superradiant
SUPERRADIANT_WINDOW = 0.05 * np.pi

#: modes with k_est this close to 0 or pi are strong subradiant
BAND_EDGE_WINDOW = 0.05 * np.pi

#: chain sizes 25, 50, ..., 400
N_GRID = list(range(25, 401, 25))

#: disorder strengths, log-spaced on [0.02, 0.8]
W_GRID = [float(w) for w in np.round(np.geomspace(0.02, 0.8, 12), 6)]

#: realizations per (N, W) cell
N_REALIZATIONS = 1000

#: abort a cell when more than this fraction of realizations fail
MAX_FAILED_FRACTION = 0.01

#: environment variable consulted for the worker count
WORKERS_ENV = 'SUBRAD_WORKERS'

#: mode targets as (kind, k, selector)
TARGETS = [
    ('band_edge_low', None, 'nearest_omega'),
    ('fixed_k', 0.75 * np.pi, 'nearest_omega'),
]

# data collapse
WC_BOX = (-0.05, 0.1)
NU_BOX = (0.5, 3.0)
COLLAPSE_GRID = 41
N_BOOTSTRAP = 100
COLLAPSE_COST_THRESHOLD = 1.0

#: master curves overlap when the RMS of ln y after rescaling is below this
OVERLAP_RMS_THRESHOLD = 0.1

# localization
EDGE_FRACTION = 0.05
MIN_CENTER_SAMPLES = 500
BIC_MARGIN = 10.0
CENTER_ESTIMATOR = 'argmax'

#: saturated cells for the xi / xi_phi comparison have N >= factor * N_c
SATURATION_FACTOR = 2.0

#: version of the CSV/JSON output layout
FORMAT_VERSION = 1
