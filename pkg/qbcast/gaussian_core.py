"""
Covariance-matrix calculus for zero-mean Gaussian states.

Conventions:
    - Quadratures are ordered xxpp: (x_1, ..., x_n, p_1, ..., p_n).
    - Vacuum variance is 1, so a thermal mode with N mean photons has v = 2N + 1.
    - Omega = [[0, I], [-I, 0]] is the symplectic form in this ordering.

States are plain `numpy.ndarray` covariance matrices; transforms are 2n x 2n
real matrices acting as gamma -> S gamma S^T. Classical homodyne outcomes are
carried as `ClassicalGaussian` records with labelled variables.

Functions:
    - `g_function(x)`: Entropy in bits of a thermal mode with x mean photons.
    - `vacuum(n)`, `thermal(N)`, `tmsv_covariance(n_s)`: State constructors.
    - `beam_splitter`, `phase_rotation`, `passive_transform`: Symplectic transforms.
    - `apply_symplectic`, `partial_trace`, `permute_modes`, `direct_sum`, `append_vacuum`: State algebra.
    - `symplectic_eigenvalues`, `von_neumann_entropy`: Spectral quantities.
    - `homodyne_condition`, `heterodyne_as_loss`, `homodyne_outcomes`: Measurements.
    - `gaussian_differential_entropy`, `mutual_information`, `estimate_mutual_information`: Classical information.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import block_diag

from .utility import ParameterError, UnphysicalStateError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-10
PHYSICAL_TOL = 1e-6
PSD_TOL = 1e-10
PI_E = np.pi * np.e

Modes = Union[int, Sequence[int]]


@dataclass(frozen=True)
class ClassicalGaussian:
    """Zero-mean jointly Gaussian real variables, e.g. homodyne outcomes X, Y, Z."""
    covariance: np.ndarray
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if cov.shape[0] != cov.shape[1]:
            raise ParameterError(f"Covariance must be square, got shape {cov.shape}")
        if not np.allclose(cov, cov.T, atol=SYMMETRY_TOL * max(1.0, np.abs(cov).max())):
            raise ParameterError("Classical covariance must be symmetric")
        cov = (cov + cov.T) / 2
        if np.linalg.eigvalsh(cov).min() < -PSD_TOL * max(1.0, np.abs(cov).max()):
            raise ParameterError("Classical covariance must be positive semidefinite")
        labels = tuple(self.labels) or tuple(f"v{i}" for i in range(cov.shape[0]))
        if len(labels) != cov.shape[0]:
            raise ParameterError(f"Expected {cov.shape[0]} labels, got {len(labels)}")
        object.__setattr__(self, 'covariance', cov)
        object.__setattr__(self, 'labels', labels)

    @property
    def n_vars(self) -> int:
        return self.covariance.shape[0]

    def index(self, names: Union[str, int, Sequence[Union[str, int]]]) -> List[int]:
        if isinstance(names, (str, int, np.integer)):
            names = [names]
        out = []
        for name in names:
            if isinstance(name, (int, np.integer)):
                if not 0 <= name < self.n_vars:
                    raise ParameterError(f"Variable index {name} out of range")
                out.append(int(name))
            elif name in self.labels:
                out.append(self.labels.index(name))
            else:
                raise ParameterError(f"Unknown variable '{name}', expected one of {self.labels}")
        return out

    def marginal(self, names) -> "ClassicalGaussian":
        idx = self.index(names)
        return ClassicalGaussian(self.covariance[np.ix_(idx, idx)], tuple(self.labels[i] for i in idx))


def g_function(x: float) -> float:
    """
    Von Neumann entropy in bits of a thermal state with mean photon number `x`.

    g(x) = (x + 1) log2(x + 1) - x log2(x), written as log2(1 + x) + x log2(1 + 1/x)
    so that large x does not cancel catastrophically.

    Raises:
        ParameterError: If x is negative.
    """
    x = float(x)
    if x < 0 or np.isnan(x):
        raise ParameterError(f"g(x) is defined for x >= 0, got {x}")
    if x == 0:
        return 0.0
    if np.isinf(x):
        return np.inf
    return float((np.log1p(x) + x * np.log1p(1.0 / x)) / np.log(2))


def symplectic_form(n_modes: int) -> np.ndarray:
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def n_modes_of(gamma: np.ndarray) -> int:
    return np.shape(gamma)[0] // 2


def quadrature_indices(modes: Modes, n_modes: int) -> np.ndarray:
    """Row indices of the x then p quadratures of `modes` in an xxpp matrix."""
    modes = _mode_list(modes, n_modes)
    return np.array(modes + [n_modes + k for k in modes], dtype=int)


def validate_covariance(gamma) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1] or gamma.shape[0] % 2:
        raise ParameterError(f"Covariance must be a square 2n x 2n matrix, got shape {gamma.shape}")
    scale = max(1.0, np.abs(gamma).max())
    if not np.allclose(gamma, gamma.T, atol=SYMMETRY_TOL * scale, rtol=0):
        raise ParameterError("Covariance matrix is not symmetric")
    return (gamma + gamma.T) / 2


def is_symplectic(S, tol: float = SYMPLECTIC_TOL) -> bool:
    S = np.asarray(S, dtype=float)
    omega = symplectic_form(n_modes_of(S))
    return bool(np.allclose(S @ omega @ S.T, omega, atol=tol, rtol=0))


def vacuum(n_modes: int = 1) -> np.ndarray:
    if n_modes < 1:
        raise ParameterError(f"Mode count must be positive, got {n_modes}")
    return np.eye(2 * n_modes)


def thermal(mean_photons: Union[float, Sequence[float]]) -> np.ndarray:
    """Product of thermal modes; one mode per entry of `mean_photons`."""
    n = np.atleast_1d(np.asarray(mean_photons, dtype=float))
    if np.any(n < 0):
        raise ParameterError(f"Mean photon numbers must be nonnegative, got {n.tolist()}")
    v = 2 * n + 1
    return np.diag(np.concatenate([v, v]))


def tmsv_covariance(n_s: float) -> np.ndarray:
    """
    Two-mode squeezed vacuum with `n_s` mean photons per arm.

    Returns:
        np.ndarray: 4x4 matrix, diagonal blocks v I, x-x correlation +sqrt(v^2 - 1)
        and p-p correlation -sqrt(v^2 - 1), with v = 2 n_s + 1.
    """
    n_s = float(n_s)
    if n_s < 0:
        raise ParameterError(f"Mean photon number must be nonnegative, got {n_s}")
    v = 2 * n_s + 1
    c = 2 * np.sqrt(n_s * (n_s + 1))  # sqrt(v^2 - 1) without cancellation
    return np.array([
        [v, c, 0, 0],
        [c, v, 0, 0],
        [0, 0, v, -c],
        [0, 0, -c, v],
    ])


def beam_splitter(transmittance: float, mode_i: int, mode_j: int, n_modes: int) -> np.ndarray:
    """
    Beam splitter mixing `mode_i` and `mode_j` with cos(theta) = sqrt(transmittance).

    x_i -> sqrt(eta) x_i + sqrt(1 - eta) x_j
    x_j -> -sqrt(1 - eta) x_i + sqrt(eta) x_j
    and identically for the p quadratures. At eta = 0 the modes are swapped up to a sign.
    """
    if not 0 <= transmittance <= 1:
        raise ParameterError(f"Transmittance must lie in [0, 1], got {transmittance}")
    if mode_i == mode_j:
        raise ParameterError(f"Beam splitter needs two distinct modes, got {mode_i} twice")
    _mode_list([mode_i, mode_j], n_modes)
    t, r = np.sqrt(transmittance), np.sqrt(1 - transmittance)
    S = np.eye(2 * n_modes)
    for offset in (0, n_modes):
        i, j = mode_i + offset, mode_j + offset
        S[i, i], S[i, j] = t, r
        S[j, i], S[j, j] = -r, t
    return S


def phase_rotation(phi: float, mode: int, n_modes: int) -> np.ndarray:
    """Phase shift a -> exp(i phi) a on one mode."""
    _mode_list(mode, n_modes)
    c, s = np.cos(phi), np.sin(phi)
    S = np.eye(2 * n_modes)
    x, p = mode, mode + n_modes
    S[x, x], S[x, p] = c, -s
    S[p, x], S[p, p] = s, c
    return S


def passive_transform(unitary) -> np.ndarray:
    """
    Symplectic image of a passive interferometer U acting on annihilation operators.

    Raises:
        ParameterError: If U is not square.
    """
    U = np.asarray(unitary, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ParameterError(f"Interferometer matrix must be square, got shape {U.shape}")
    return np.block([[U.real, -U.imag], [U.imag, U.real]])


def apply_symplectic(S, gamma) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    gamma = validate_covariance(gamma)
    if S.shape != gamma.shape:
        raise ParameterError(f"Transform shape {S.shape} does not match covariance shape {gamma.shape}")
    out = S @ gamma @ S.T
    return (out + out.T) / 2


def partial_trace(gamma, keep_modes: Modes) -> np.ndarray:
    """Reduced covariance on `keep_modes`, in the order given."""
    gamma = validate_covariance(gamma)
    idx = quadrature_indices(keep_modes, n_modes_of(gamma))
    if idx.size == 0:
        raise ParameterError("At least one mode must be kept")
    return gamma[np.ix_(idx, idx)]


def permute_modes(gamma, order: Sequence[int]) -> np.ndarray:
    """Reorders modes so that new mode k is old mode order[k]."""
    n = n_modes_of(gamma)
    if sorted(order) != list(range(n)):
        raise ParameterError(f"{list(order)} is not a permutation of {n} modes")
    return partial_trace(gamma, order)


def to_xpxp(gamma) -> np.ndarray:
    n = n_modes_of(gamma)
    order = np.ravel(np.column_stack([np.arange(n), np.arange(n) + n]))
    return np.asarray(gamma)[np.ix_(order, order)]


def from_xpxp(gamma) -> np.ndarray:
    n = n_modes_of(gamma)
    order = np.concatenate([np.arange(0, 2 * n, 2), np.arange(1, 2 * n, 2)])
    return np.asarray(gamma)[np.ix_(order, order)]


def direct_sum(*gammas) -> np.ndarray:
    """Tensor product of Gaussian states; modes of the first argument come first."""
    if not gammas:
        raise ParameterError("direct_sum needs at least one covariance")
    return from_xpxp(block_diag(*[to_xpxp(validate_covariance(g)) for g in gammas]))


def append_vacuum(gamma, count: int = 1) -> np.ndarray:
    if count == 0:
        return validate_covariance(gamma)
    return direct_sum(gamma, vacuum(count))


def symplectic_eigenvalues(gamma) -> np.ndarray:
    """
    Symplectic spectrum, sorted ascending and clipped at 1.

    The moduli of the eigenvalues of i Omega gamma are read off the Hermitian
    matrix i R Omega R with R = gamma^(1/2), which has the same spectrum.

    Raises:
        UnphysicalStateError: If gamma is not positive definite or any eigenvalue is below 1 - 1e-6.
    """
    gamma = validate_covariance(gamma)
    n = n_modes_of(gamma)
    w, V = np.linalg.eigh(gamma)
    if w.min() <= 0:
        raise UnphysicalStateError(f"Covariance is not positive definite: smallest eigenvalue {w.min():.3g}")
    R = (V * np.sqrt(w)) @ V.T
    spectrum = np.sort(np.abs(np.linalg.eigvalsh(1j * (R @ symplectic_form(n) @ R))))
    nu = spectrum.reshape(n, 2).mean(axis=1)
    if nu.min() < 1 - PHYSICAL_TOL:
        raise UnphysicalStateError(f"Covariance violates the uncertainty principle: smallest symplectic eigenvalue {nu.min():.3g} < 1")
    if nu.min() < 1:
        logger.debug("symplectic_eigenvalues: clipping %.3g up to 1", nu.min())
    return np.maximum(nu, 1.0)


def von_neumann_entropy(gamma) -> float:
    return float(sum(g_function((nu - 1) / 2) for nu in symplectic_eigenvalues(gamma)))


def homodyne_condition(gamma, measured_mode: int, quadrature: str = 'x') -> np.ndarray:
    """
    Covariance of the unmeasured modes after an ideal homodyne measurement.

    The infinitely squeezed limit keeps only the measured quadrature of the
    measured mode: A - C C^T / B with B its variance and C its correlations.

    Raises:
        ParameterError: If the quadrature is unknown, the mode is invalid or B <= 0.
    """
    gamma = validate_covariance(gamma)
    n = n_modes_of(gamma)
    if quadrature not in ('x', 'p'):
        raise ParameterError(f"Quadrature must be 'x' or 'p', got '{quadrature}'")
    _mode_list(measured_mode, n)
    if n < 2:
        raise ParameterError("Homodyne conditioning needs at least one unmeasured mode")
    rest = quadrature_indices([k for k in range(n) if k != measured_mode], n)
    q = measured_mode if quadrature == 'x' else measured_mode + n
    B = gamma[q, q]
    if B <= 0:
        raise ParameterError(f"Measured quadrature variance must be positive, got {B}")
    A = gamma[np.ix_(rest, rest)]
    C = gamma[rest, q][:, None]
    return A - (C @ C.T) / B


def heterodyne_as_loss(gamma, mode: int) -> np.ndarray:
    """50% loss on `mode` from a vacuum ancilla; a homodyne on the result models heterodyne."""
    gamma = validate_covariance(gamma)
    n = n_modes_of(gamma)
    _mode_list(mode, n)
    extended = append_vacuum(gamma)
    out = apply_symplectic(beam_splitter(0.5, mode, n, n + 1), extended)
    return partial_trace(out, list(range(n)))


def homodyne_outcomes(gamma, modes: Modes, quadrature: str = 'x', labels: Sequence[str] = ()) -> ClassicalGaussian:
    """Joint distribution of ideal homodyne outcomes on `modes`."""
    gamma = validate_covariance(gamma)
    n = n_modes_of(gamma)
    if quadrature not in ('x', 'p'):
        raise ParameterError(f"Quadrature must be 'x' or 'p', got '{quadrature}'")
    idx = np.array(_mode_list(modes, n)) + (0 if quadrature == 'x' else n)
    return ClassicalGaussian(gamma[np.ix_(idx, idx)], tuple(labels))


def gaussian_differential_entropy(c: ClassicalGaussian, scale: float = PI_E) -> float:
    """
    1/2 log2(scale^n det Sigma) in bits. The default scale pi*e counts each
    homodyne outcome against vacuum; mutual informations do not depend on it.

    Raises:
        ParameterError: If the covariance is singular.
    """
    sign, logdet = np.linalg.slogdet(c.covariance)
    if sign <= 0 or not np.isfinite(logdet):
        raise ParameterError(f"Differential entropy needs a positive-definite covariance over {c.labels}")
    return float(0.5 * (c.n_vars * np.log2(scale) + logdet / np.log(2)))


def mutual_information(c: ClassicalGaussian, a, b, given=(), scale: float = PI_E) -> float:
    """I(a; b | given) in bits from the entropy chain H(aG) + H(bG) - H(G) - H(abG)."""
    a, b, g = c.index(a), c.index(b), c.index(given) if given else []

    def h(idx):
        return gaussian_differential_entropy(c.marginal(idx), scale) if idx else 0.0

    return h(a + g) + h(b + g) - h(g) - h(a + b + g)


def estimate_mutual_information(c: ClassicalGaussian, a, b, n_samples: int = 1_000_000, seed: int = 0) -> float:
    """Plug-in estimate of I(a; b) from samples drawn from `c`, used as a sampling oracle."""
    rng = np.random.default_rng(seed)
    samples = rng.multivariate_normal(np.zeros(c.n_vars), c.covariance, size=n_samples, method='cholesky')
    empirical = ClassicalGaussian(np.cov(samples, rowvar=False), c.labels)
    return mutual_information(empirical, a, b)


def thermal_weights(n_s: float, count: int) -> np.ndarray:
    """lambda_k = n_s^k / (n_s + 1)^(k + 1) for k < count."""
    if n_s < 0:
        raise ParameterError(f"Mean photon number must be nonnegative, got {n_s}")
    k = np.arange(count)
    if n_s == 0:
        return (k == 0).astype(float)
    return np.exp(k * np.log(n_s) - (k + 1) * np.log1p(n_s))


def _mode_list(modes: Modes, n_modes: int) -> List[int]:
    if isinstance(modes, (int, np.integer)):
        modes = [modes]
    modes = [int(k) for k in modes]
    for k in modes:
        if not 0 <= k < n_modes:
            raise ParameterError(f"Mode {k} out of range for {n_modes} modes")
    if len(set(modes)) != len(modes):
        raise ParameterError(f"Repeated modes in {modes}")
    return modes
