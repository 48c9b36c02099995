"""Narrowband far-field snapshot simulation with non-Gaussian sources.

Phase convention: ``a_n(theta) = exp(-1j * pi * p_n * sin(theta))`` with
positions in half-wavelength units. The same sign is used by the
fourth-order lag model and by the MUSIC steering vectors.
"""

from __future__ import annotations

import dataclasses
import enum
from typing import Sequence

import numpy as np

from .coarray import SensorArray
from .metrics import CouplingModel, coupling_matrix


class Modulation(str, enum.Enum):
    QPSK = "QPSK"
    BPSK = "BPSK"

    @classmethod
    def parse(cls, value) -> "Modulation":
        return value if isinstance(value, cls) else cls(str(value).upper())


@dataclasses.dataclass(frozen=True)
class SourceConfig:
    angles: tuple[float, ...]
    modulation: Modulation = Modulation.QPSK
    power: tuple[float, ...] | None = None

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "modulation", Modulation.parse(self.modulation))
        if not angles:
            raise ValueError("need at least one source")
        if len(set(angles)) != len(angles):
            raise ValueError("source angles must be distinct")
        if any(not -90 < a < 90 for a in angles):
            raise ValueError("source angles must lie in (-90, 90) degrees")
        power = self.power
        if power is None:
            power = (1.0,) * len(angles)
        power = tuple(float(x) for x in power)
        if len(power) != len(angles) or any(x <= 0 for x in power):
            raise ValueError("need one positive power per source")
        object.__setattr__(self, "power", power)

    @property
    def D(self) -> int:
        return len(self.angles)


@dataclasses.dataclass(frozen=True)
class SimScenario:
    """Array, noise level, snapshot count, optional coupling and seed.

    ``seed`` may be an int or a :class:`numpy.random.SeedSequence`.
    ``snr_db=inf`` disables noise.
    """

    array: SensorArray
    snr_db: float
    snapshots: int
    coupling: CouplingModel | None = None
    seed: int | np.random.SeedSequence = 0

    def __post_init__(self):
        if self.snapshots < 1:
            raise ValueError("need at least one snapshot")


def steering_vector(P: SensorArray, theta_deg: float) -> np.ndarray:
    if not -90 < theta_deg < 90:
        raise ValueError("angle must lie in (-90, 90) degrees")
    return np.exp(-1j * np.pi * P.as_array() * np.sin(np.deg2rad(theta_deg)))


def steering_matrix(P: SensorArray, angles_deg: Sequence[float]) -> np.ndarray:
    s = np.sin(np.deg2rad(np.asarray(angles_deg, dtype=float)))
    return np.exp(-1j * np.pi * np.outer(P.as_array(), s))


def source_kurtosis(modulation) -> float:
    """Fourth-order cumulant ``cum(s, s, s*, s*)`` of the unit-power constellation."""
    modulation = Modulation.parse(modulation)
    return {Modulation.QPSK: -1.0, Modulation.BPSK: -2.0}[modulation]


def draw_symbols(rng: np.random.Generator, modulation, shape) -> np.ndarray:
    """Unit-power constellation symbols drawn uniformly."""
    modulation = Modulation.parse(modulation)
    if modulation is Modulation.BPSK:
        return (2.0 * rng.integers(0, 2, size=shape) - 1.0).astype(complex)
    bits = rng.integers(0, 2, size=(2, *shape))
    return ((2.0 * bits[0] - 1.0) + 1j * (2.0 * bits[1] - 1.0)) / np.sqrt(2.0)


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_snapshots(scenario: SimScenario, sources: SourceConfig) -> np.ndarray:
    """N x K snapshot matrix ``C A s(t) + v(t)``.

    Symbols are drawn first, then noise, so scenarios sharing a seed and
    differing only in SNR see the same symbols and the same normalized noise.
    """
    rng = np.random.default_rng(scenario.seed)
    P = scenario.array
    K = scenario.snapshots
    S = draw_symbols(rng, sources.modulation, (sources.D, K))
    S *= np.sqrt(np.asarray(sources.power))[:, None]
    A = steering_matrix(P, sources.angles)
    if scenario.coupling is not None:
        A = coupling_matrix(P, scenario.coupling) @ A
    X = A @ S
    noise = complex_gaussian(rng, (len(P), K))
    if np.isfinite(scenario.snr_db):
        X += np.sqrt(10.0 ** (-scenario.snr_db / 10.0)) * noise
    return X
