"""Support functions for synthetic data generation."""

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence


def point_generator(seed, point_index, stream=None):
    """PCG64 stream for one ROI point, independent of every other point.

    The stream is derived with SeedSequence(entropy=seed,
    spawn_key=(point_index,)), so any point can be regenerated alone.
    A `stream` number appends to the spawn key for auxiliary draws.
    """

    key = (point_index,) if stream is None else (point_index, stream)
    return Generator(PCG64(SeedSequence(entropy=seed, spawn_key=key)))


def random_distribution(rng, size, concentration=1.0):
    """One draw from a symmetric Dirichlet."""

    return rng.dirichlet(np.full(size, concentration))


def random_rows(rng, size, concentration=1.0):
    """A size x size row-stochastic matrix with Dirichlet rows."""

    return rng.dirichlet(np.full(size, concentration), size=size)
