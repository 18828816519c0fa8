"""Three-mode linearized optomechanical model.

Two cavity modes ``a1`` and ``a2`` couple to one mechanical mode ``b`` with
beam-splitter couplings ``g1`` and ``g2``.  In the interaction picture, and
when the mechanical frequency is resonant with both red detunings
(``omega_m == -delta1 == -delta2``), the mode amplitudes ``A = [a1, b, a2]``
obey the linear equation ``i dA/dt = N(t) A`` with the dynamic matrix::

    N = [[-i k1/2,  g1,        0      ],
         [ g1,     -i gamma/2, g2     ],
         [ 0,       g2,       -i k2/2 ]]

Units throughout the package: rates and couplings in rad/us, time in us.

Eigenvalues of the undamped matrix are ``{-g0, 0, +g0}`` with
``g0 = sqrt(g1**2 + g2**2)``.  Some published treatments quote ``+-g0/sqrt(2)``
for the bright pair; the characteristic polynomial ``-lam (lam**2 - g0**2)``
gives ``+-g0``, which is what is implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateCouplingError,
    InvalidArgumentError,
    UnsupportedConfigurationError,
)

UNIFORM_RTOL = 1e-12
RESONANCE_RTOL = 1e-9


def angular_rate(frequency_hz: float) -> float:
    """Convert an ordinary frequency in Hz to an angular rate in rad/us.

    ``angular_rate(35e3)`` is the rate ``2*pi*35 kHz`` expressed in rad/us.
    """
    return 2.0 * math.pi * frequency_hz * 1e-6


def _check_finite(**values):
    for name, v in values.items():
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class SystemParams:
    """Damping rates of the two cavities and the mechanical mode (rad/us)."""

    kappa1: float = 0.0
    kappa2: float = 0.0
    gamma: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "gamma"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidArgumentError(f"{name} must be finite and >= 0, got {v!r}")

    @classmethod
    def uniform(cls, kappa: float) -> "SystemParams":
        return cls(kappa, kappa, kappa)

    def uniform_damping(self) -> bool:
        rates = (self.kappa1, self.kappa2, self.gamma)
        scale = max(rates)
        if scale == 0.0:
            return True
        return max(rates) - min(rates) <= UNIFORM_RTOL * scale

    @property
    def kappa(self) -> float:
        """Common damping rate; only meaningful when ``uniform_damping()``."""
        if not self.uniform_damping():
            raise UnsupportedConfigurationError(
                "damping is not uniform; no single kappa is defined")
        return self.gamma


@dataclass(frozen=True)
class LabFrameParams:
    """Detunings and mechanical frequency of the lab-frame Hamiltonian.

    Only used to check that the interaction-picture model applies.
    """

    delta1: float
    delta2: float
    omega_m: float

    def resonance_ok(self) -> bool:
        scale = max(abs(self.omega_m), abs(self.delta1), abs(self.delta2))
        if scale == 0.0:
            return True
        tol = RESONANCE_RTOL * scale
        return (abs(self.omega_m + self.delta1) <= tol
                and abs(self.omega_m + self.delta2) <= tol)


@dataclass(frozen=True)
class ModeState:
    a1: complex
    b: complex
    a2: complex

    @classmethod
    def from_array(cls, v) -> "ModeState":
        v = np.asarray(v, dtype=complex)
        return cls(complex(v[0]), complex(v[1]), complex(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.b, self.a2], dtype=complex)

    def populations(self) -> tuple[float, float, float]:
        return (abs(self.a1) ** 2, abs(self.b) ** 2, abs(self.a2) ** 2)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues and unit eigenvectors (``eigenvectors[k]`` pairs with
    ``eigenvalues[k]``), sorted by ascending real part then imaginary part."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def residual(self, matrix) -> float:
        m = np.asarray(matrix)
        return max(np.linalg.norm(m @ v - lam * v)
                   for lam, v in zip(self.eigenvalues, self.eigenvectors))


def build_dynamic_matrix(params: SystemParams, g1, g2) -> np.ndarray:
    """Dynamic matrix for scalar couplings, or a stack ``(n, 3, 3)`` when
    ``g1`` and ``g2`` are arrays of equal shape."""
    _check_finite(g1=g1, g2=g2)
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    g1, g2 = np.broadcast_arrays(g1, g2)
    m = np.zeros(g1.shape + (3, 3), dtype=complex)
    m[..., 0, 0] = -0.5j * params.kappa1
    m[..., 1, 1] = -0.5j * params.gamma
    m[..., 2, 2] = -0.5j * params.kappa2
    m[..., 0, 1] = m[..., 1, 0] = g1
    m[..., 1, 2] = m[..., 2, 1] = g2
    return m


def _g0(g1, g2) -> float:
    _check_finite(g1=g1, g2=g2)
    g0 = math.hypot(g1, g2)
    if g0 == 0.0:
        raise DegenerateCouplingError("g1 = g2 = 0: dark and bright modes are undefined")
    return g0


def dark_mode(g1: float, g2: float) -> np.ndarray:
    """Zero-energy eigenvector ``[-g2/g0, 0, g1/g0]`` with no mechanical part."""
    g0 = _g0(g1, g2)
    return np.array([-g2 / g0, 0.0, g1 / g0], dtype=complex)


def bright_modes(g1: float, g2: float) -> tuple[np.ndarray, np.ndarray]:
    """Bright pair ``([g1/g0, +1, g2/g0]/sqrt2, [g1/g0, -1, g2/g0]/sqrt2)``,
    eigenvectors for ``+g0`` and ``-g0`` respectively."""
    g0 = _g0(g1, g2)
    s = 1.0 / math.sqrt(2.0)
    plus = np.array([g1 / g0 * s, s, g2 / g0 * s], dtype=complex)
    minus = np.array([g1 / g0 * s, -s, g2 / g0 * s], dtype=complex)
    return plus, minus


def eigensystem_undamped(g1: float, g2: float) -> EigenSystem:
    g0 = _g0(g1, g2)
    plus, minus = bright_modes(g1, g2)
    return EigenSystem(
        eigenvalues=np.array([-g0, 0.0, g0], dtype=complex),
        eigenvectors=np.array([minus, dark_mode(g1, g2), plus]),
    )


def eigensystem_damped_uniform(g1: float, g2: float, kappa) -> EigenSystem:
    """Closed-form eigensystem when ``kappa1 == kappa2 == gamma == kappa``.

    ``kappa`` may be a float or a :class:`SystemParams`; non-uniform params
    raise, pointing at :func:`eigensystem_numeric`.  Uniform damping only
    shifts every eigenvalue by ``-i kappa/2``; the eigenvectors are the
    undamped ones.
    """
    if isinstance(kappa, SystemParams):
        if not kappa.uniform_damping():
            raise UnsupportedConfigurationError(
                "closed-form eigensystem needs kappa1 == kappa2 == gamma; "
                "use eigensystem_numeric(build_dynamic_matrix(...)) instead")
        kappa = kappa.gamma
    if not math.isfinite(kappa) or kappa < 0:
        raise InvalidArgumentError(f"kappa must be finite and >= 0, got {kappa!r}")
    base = eigensystem_undamped(g1, g2)
    return EigenSystem(base.eigenvalues - 0.5j * kappa, base.eigenvectors)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    scale = np.max(np.abs(v))
    for c in v:
        if abs(c) > 1e-12 * scale:
            return v * (abs(c) / c)
    return v


def eigensystem_numeric(matrix) -> EigenSystem:
    """Generic eigensolve of any 3x3 matrix.

    Vectors are unit-normalized with their first non-negligible component made
    real and positive.
    """
    m = np.asarray(matrix, dtype=complex)
    vals, vecs = np.linalg.eig(m)
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    vecs = np.array([_fix_phase(vecs[:, k]) for k in order])
    return EigenSystem(vals, vecs)


@dataclass(frozen=True)
class ExperimentalPreset:
    params: SystemParams
    coupling: float
    omega_m: float


def preset_experimental(kappa_cavity: float | None = None) -> ExperimentalPreset:
    """Parameters of a realistic device (rad/us).

    Mechanical damping 2pi x 35 kHz, coupling 2pi x 910 kHz, mechanical
    frequency 2pi x 3.68 GHz.  No cavity linewidth is known for this device, so
    both cavity rates default to the mechanical rate, which keeps damping
    uniform.
    """
    gamma = angular_rate(35e3)
    kc = gamma if kappa_cavity is None else kappa_cavity
    params = SystemParams(kc, kc, gamma, metadata={
        "omega_m": angular_rate(3.68e9),
        "cavity_frequency": angular_rate(195e12),
        "cavity_kappa_source": "default: equal to gamma" if kappa_cavity is None else "user",
    })
    return ExperimentalPreset(params=params, coupling=angular_rate(910e3),
                              omega_m=angular_rate(3.68e9))
