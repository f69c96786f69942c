"""
Spatial correlation of the fluid antenna ports (Jakes' model) and the
eigenvalue based effective-branch model.

The port correlation uses the ordinary Bessel function of the first kind J_0,
which is what Jakes' model prescribes, even where the literature calls it the
"modified" Bessel function.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special

from ..exceptions import DecompositionError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorrelationModel:
    """
    Jakes matrix with its eigendecomposition.

    Attributes
    ----------
    matrix : np.ndarray
        N×N correlation matrix J.
    eigenvalues : np.ndarray
        All N eigenvalues, non-increasing, clamped at zero.
    eigenvectors : np.ndarray
        Columns ordered like ``eigenvalues``; used by the physical port
        simulation only.
    n_eff : int
        Number of eigenvalues above ``rank_tol * eigenvalues[0]``.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_eff: int

    @property
    def lambdas(self):
        """Eigenvalues of the effective branches."""
        return self.eigenvalues[: self.n_eff]

    @property
    def lambda_sum(self):
        return float(np.sum(self.lambdas))

    @property
    def n_ports(self):
        return self.matrix.shape[0]


def bessel_j0(x):
    """Bessel function of the first kind of order zero."""
    return scipy.special.j0(x)


def build_jakes(geom):
    """
    Toeplitz correlation matrix J_{m,n} = J_0(2πW(m-n)/(N-1)).

    Parameters
    ----------
    geom : :py:class:`~fas_uav_relay.systemConfig.FasGeometry`

    Returns
    -------
    np.ndarray
        Shape (N, N). The 1×1 identity for a single port.
    """
    n = geom.n_ports
    if n == 1:
        return np.ones((1, 1))
    offsets = np.arange(n) * 2 * np.pi * geom.aperture / (n - 1)
    return scipy.linalg.toeplitz(bessel_j0(offsets))


def eigen_model(J, rank_tol=1e-9):
    """
    Eigendecomposition of a symmetric correlation matrix.

    Parameters
    ----------
    J : np.ndarray
    rank_tol : float, default: 1e-9
        Relative threshold, eigenvalues at or below ``rank_tol * λ_1`` do not
        count as effective branches.

    Returns
    -------
    :py:class:`CorrelationModel`

    Raises
    ------
    DecompositionError
        If the eigensolver does not converge or J contains non-finite entries.
    """
    J = np.asarray(J, dtype="float64")
    if J.shape == (1, 1):
        return CorrelationModel(
            matrix=J, eigenvalues=np.ones(1), eigenvectors=np.ones((1, 1)), n_eff=1
        )
    if not np.all(np.isfinite(J)):
        raise DecompositionError("decomposition failed: matrix has non-finite entries")
    try:
        values, vectors = np.linalg.eigh(J)
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"decomposition failed: {e}")

    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    if values[-1] < -rank_tol * values[0]:
        log.warning(
            f"Correlation matrix is not positive semi-definite, smallest "
            f"eigenvalue {values[-1]:.3e} is clamped to zero"
        )
    values = np.clip(values, 0.0, None)
    n_eff = int(np.sum(values > rank_tol * values[0]))
    log.debug(f"Eigenvalues {np.array2string(values, precision=6)}, N_eff={n_eff}")
    return CorrelationModel(
        matrix=J, eigenvalues=values, eigenvectors=vectors, n_eff=n_eff
    )


def correlation_model(geom):
    """Jakes matrix of ``geom`` and its eigen model in one call."""
    return eigen_model(build_jakes(geom), rank_tol=geom.rank_tol)
