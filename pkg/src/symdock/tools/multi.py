import numpy as np


def multirotation(psi):
    """Stack of planar-motion rotation matrices ``R(psi)``.

    Args:
        psi: Scalar or 1-D array of ``k`` headings.

    Returns:
        A ``3 x 3`` matrix for scalar input, a ``k x 3 x 3`` array otherwise.
    """
    psi = np.asarray(psi, dtype=float)
    c, s = np.cos(psi), np.sin(psi)
    zero, one = np.zeros_like(psi), np.ones_like(psi)
    R = np.stack(
        [
            np.stack([c, -s, zero], axis=-1),
            np.stack([s, c, zero], axis=-1),
            np.stack([zero, zero, one], axis=-1),
        ],
        axis=-2,
    )
    return R


def multiapply(A, x):
    """Apply a stack of matrices to a stack of vectors.

    Args:
        A: ``k x n x m`` array.
        x: ``k x m`` array.

    Returns:
        The ``k x n`` array of products ``A[i] @ x[i]``.
    """
    return np.einsum("...ij,...j->...i", A, x)


def rotate_planar(psi, points):
    """Rotate 2-D points by headings.

    Args:
        psi: Array of headings with shape ``(...)``.
        points: Array of shape ``(..., n, 2)`` or ``(n, 2)``.

    Returns:
        Array of shape ``(..., n, 2)``.
    """
    psi = np.asarray(psi, dtype=float)[..., np.newaxis]
    c, s = np.cos(psi), np.sin(psi)
    x, y = points[..., 0], points[..., 1]
    return np.stack([c * x - s * y, s * x + c * y], axis=-1)
