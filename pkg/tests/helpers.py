"""Utilities shared by the test modules."""

import math

import numpy as np


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_complex_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def reference_cfi_three_photon(phi):
    """Sum-over-outcomes Fisher information of the three-photon tritter
    fringes, in the closed trigonometric form used for verification."""
    s3, c3 = np.sin(3 * phi / 2), np.cos(3 * phi / 2)
    r3 = math.sqrt(3.0)
    num1 = 2 * s3**2 * (r3 * np.sin(phi / 2) + np.cos(phi / 2) + 2 * c3) ** 2
    den1 = (
        -6 * r3 * np.sin(phi)
        + 3 * np.cos(2 * phi)
        + 4 * np.cos(3 * phi)
        + 6 * (r3 * np.sin(phi) + 1) * np.cos(phi)
        + 14
    )
    num2 = (
        np.sin(phi)
        + np.sin(2 * phi)
        - 4 * np.sin(3 * phi)
        + r3 * np.cos(phi)
        - r3 * np.cos(2 * phi)
    ) ** 2
    den2 = (
        12 * r3 * np.sin(phi)
        - 6 * r3 * np.sin(2 * phi)
        - 12 * np.cos(phi)
        - 6 * np.cos(2 * phi)
        + 16 * np.cos(3 * phi)
        + 29
    )
    return (16 / 9) * (3 * c3**2 + num1 / den1 + num2 / den2)
