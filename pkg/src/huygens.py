#!/usr/bin/env python3
"""
ModLoc - modular localization numerical laboratory
Copyright (C) 2026 Jefferson Richards

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU Affero General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU Affero General Public License for more details.

You should have received a copy of the GNU Affero General Public License
along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""

"""
Support laws of the wave equation in two space dimensions

Kernels
    Delta_+(x) = (1/2 pi) int d^2p / |p| e^{-eps |p|} e^{-i p.x}
               = 1 / sqrt(|x|^2 - (x0 - i eps)^2)          (principal branch)
    Delta_0 = Im Delta_+ (odd, supported in the light cone)
    Delta_0' = Re Delta_+ (even, supported outside the light cone)

Time-axis Hilbert transform: FFT along x0, multiply by -i sign(nu) with nu the
FFT frequency, zero and Nyquist frequencies removed. With this multiplier
h(cos) = sin and h(Delta_0) = Delta_0'.

Solutions F = h * Delta_+ are synthesized on a uniform radial cone grid with
spacing 2 pi / T, so F is exactly periodic on the time window of length T and
h(Im F) = Re F holds to rounding. Im F vanishes on the spacelike complement of
the source region and Re F on its timelike complement.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from src.errors import SupportViolation
from src.modular_net import DoubleCone23
from src.wigner_reps import ConeGrid23

logger = logging.getLogger(__name__)

# fixed by delta_plus_oracle: the measure d^2p / (2 pi |p|) gives unit coefficient
KERNEL_NORMALIZATION = 1.0
SUPPORT_TOLERANCE = 1e-6
# relative leakage at roundoff; refinement cannot halve it further
ROUNDOFF_LEAKAGE = 1e-10


def delta_plus(x: np.ndarray, eps: float) -> np.ndarray:
    """Regulated two-point kernel at points x (..., 3)"""
    if eps <= 0:
        raise ValueError("regulator must be positive")
    x = np.asarray(x, dtype=float)
    radius2 = x[..., 1] ** 2 + x[..., 2] ** 2
    return KERNEL_NORMALIZATION / np.sqrt(radius2 - (x[..., 0] - 1j * eps) ** 2)


def delta_zero(x: np.ndarray, eps: float) -> np.ndarray:
    return np.imag(delta_plus(x, eps))


def delta_zero_prime(x: np.ndarray, eps: float) -> np.ndarray:
    return np.real(delta_plus(x, eps))


def delta_plus_oracle(x: Sequence[float], eps: float, limit: int = 400) -> complex:
    """int_0^inf J0(k |x|) exp(-k (eps + i x0)) dk by quadrature"""
    x0, rho = float(x[0]), float(np.hypot(x[1], x[2]))
    real = integrate.quad(lambda k: special.j0(k * rho) * np.exp(-eps * k) * np.cos(k * x0), 0, np.inf, limit=limit)[0]
    imag = integrate.quad(lambda k: -special.j0(k * rho) * np.exp(-eps * k) * np.sin(k * x0), 0, np.inf, limit=limit)[0]
    return complex(real, imag)


def hilbert_time(F: np.ndarray, axis: int = 0) -> np.ndarray:
    """Multiplier -i sign(nu) along the time axis"""
    F = np.asarray(F)
    n = F.shape[axis]
    multiplier = -1j * np.sign(np.fft.fftfreq(n))
    if n % 2 == 0:
        multiplier[n // 2] = 0.0
    shape = [1] * F.ndim
    shape[axis] = n
    out = np.fft.ifft(np.fft.fft(F, axis=axis) * multiplier.reshape(shape), axis=axis)
    return out.real if np.isrealobj(F) else out


@dataclass
class SpacetimeGrid23:
    """Periodic time window of length t_period times a square spatial box

    The matching cone grid has radial spacing 2 pi / t_period so that every
    synthesized solution is periodic on the window.
    """
    n_t: int = 256
    t_period: float = 16.0
    n_x: int = 32
    half_width: float = 3.0
    r_max: float = 36.0
    n_theta: int = 256

    def __post_init__(self):
        if self.n_t < 2 or self.n_t & (self.n_t - 1):
            raise ValueError("time axis length must be a power of two")
        if self.t_period <= 0 or self.half_width <= 0 or self.r_max <= 0:
            raise ValueError("extents must be positive")
        if self.n_x < 3:
            raise ValueError("spatial grid too small")
        if self.n_radial >= self.n_t // 2:
            raise ValueError("radial frequencies exceed the time Nyquist limit")
        if self.t_period / 2 < np.sqrt(2) * self.half_width:
            logger.warning("time window shorter than the box diagonal; periodic images reach the box")

    @property
    def dt(self) -> float:
        return self.t_period / self.n_t

    @property
    def dx(self) -> float:
        return 2 * self.half_width / (self.n_x - 1)

    @property
    def times(self) -> np.ndarray:
        return -self.t_period / 2 + self.dt * np.arange(self.n_t)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_x)

    @property
    def n_radial(self) -> int:
        return int(round(self.r_max * self.t_period / (2 * np.pi)))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.n_t, self.n_x, self.n_x

    @property
    def points(self) -> np.ndarray:
        t, x, y = np.meshgrid(self.times, self.xs, self.xs, indexing="ij")
        return np.stack([t, x, y], axis=-1)

    def cone_grid(self) -> ConeGrid23:
        n_r = self.n_radial
        return ConeGrid23(n_r=n_r, n_theta=self.n_theta, spacing="uniform", r_max=n_r * 2 * np.pi / self.t_period)

    def refined(self) -> "SpacetimeGrid23":
        """Halve the spatial step and double the time window at the same dt

        The spatial nodes of the coarse grid stay nodes of the fine one; the
        radial quadrature doubles with the window and periodic images move out.
        """
        return SpacetimeGrid23(n_t=2 * self.n_t, t_period=2 * self.t_period, n_x=2 * self.n_x - 1,
                               half_width=self.half_width, r_max=self.r_max, n_theta=self.n_theta)

    def describe(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class GaussianSource:
    """h(x) = amplitude (d/dx0)^order exp(-|x - center|_E^2 / 2 sigma^2)"""
    sigma: float = 0.12
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    order: int = 1
    amplitude: float = 1.0

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if self.order not in (0, 1):
            raise ValueError("source order must be 0 or 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def value(self, x: np.ndarray) -> np.ndarray:
        y = np.asarray(x, dtype=float) - self.center
        gaussian = self.amplitude * np.exp(-np.sum(y ** 2, axis=-1) / (2 * self.sigma ** 2))
        return gaussian if self.order == 0 else -y[..., 0] / self.sigma ** 2 * gaussian

    def fourier(self, p: np.ndarray) -> np.ndarray:
        """int h(y) exp(i p.y) dy with the Minkowski product"""
        p = np.asarray(p, dtype=float)
        euclidean = np.sum(p ** 2, axis=-1)
        shift = p[..., 0] * self.center[0] - p[..., 1] * self.center[1] - p[..., 2] * self.center[2]
        value = (self.amplitude * (2 * np.pi * self.sigma ** 2) ** 1.5
                 * np.exp(-self.sigma ** 2 * euclidean / 2) * np.exp(1j * shift))
        return value if self.order == 0 else -1j * p[..., 0] * value

    def reflected(self) -> "GaussianSource":
        """x -> -x about the origin"""
        sign = 1.0 if self.order == 0 else -1.0
        return GaussianSource(sigma=self.sigma, center=-self.center, order=self.order, amplitude=sign * self.amplitude)

    def support_leakage(self, region: DoubleCone23, samples: int = 48) -> float:
        """sup |h| on and just outside the region boundary, relative to sup |h|"""
        s = np.linspace(0.0, 1.0, samples)
        phi = 2 * np.pi * np.arange(samples) / samples
        shells = []
        for scale in (1.0, 1.1, 1.3):
            reach = scale * region.radius
            t = np.concatenate([reach * (1 - s), -reach * (1 - s)])
            rho = np.concatenate([reach * s, reach * s])
            ring = np.stack([np.repeat(t, samples), np.outer(rho, np.cos(phi)).ravel(),
                             np.outer(rho, np.sin(phi)).ravel()], axis=-1)
            shells.append(ring + region.center)
        outside = np.max(np.abs(self.value(np.vstack(shells))))
        peak_offset = np.array([self.sigma, 0.0, 0.0]) if self.order == 1 else np.zeros(3)
        peak = abs(float(self.value(self.center + peak_offset)))
        return float(outside / peak) if peak > 0 else 0.0


@dataclass
class ConeAmplitude:
    """F(x) = sum_j w_j a(p_j) exp(-i p_j.x) on a cone grid"""
    grid: ConeGrid23
    a: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=complex).reshape(self.grid.n_r, self.grid.n_theta)

    @property
    def weighted(self) -> np.ndarray:
        return self.grid.weights * self.a

    def evaluate(self, x: np.ndarray, chunk: int = 64) -> np.ndarray:
        """Complex solution F at points x (..., 3)"""
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 3)
        p = self.grid.momenta.reshape(-1, 3)
        coefficients = self.weighted.ravel()
        out = np.empty(flat.shape[0], dtype=complex)
        for start in range(0, flat.shape[0], chunk):
            block = flat[start:start + chunk]
            phase = np.outer(block[:, 0], p[:, 0]) - np.outer(block[:, 1], p[:, 1]) - np.outer(block[:, 2], p[:, 2])
            out[start:start + chunk] = np.exp(-1j * phase) @ coefficients
        return out.reshape(x.shape[:-1])

    def real_solution(self, x: np.ndarray) -> np.ndarray:
        """f = F + conj(F)"""
        return 2 * np.real(self.evaluate(x))

    def on_grid(self, st: SpacetimeGrid23) -> np.ndarray:
        """F on the spacetime grid, shape (n_t, n_x, n_x)"""
        X, Y = np.meshgrid(st.xs, st.xs, indexing="ij")
        cos_t, sin_t = np.cos(self.grid.theta), np.sin(self.grid.theta)
        projected = np.outer(X.ravel(), cos_t) + np.outer(Y.ravel(), sin_t)
        weighted = self.weighted
        spatial = np.empty((self.grid.n_r, X.size), dtype=complex)
        for j, r in enumerate(self.grid.r):
            spatial[j] = np.exp(1j * r * projected) @ weighted[j]
        temporal = np.exp(-1j * np.outer(st.times, self.grid.r))
        return (temporal @ spatial).reshape(st.shape)


@dataclass
class SupportReport:
    grid: Dict[str, Any]
    region: Dict[str, Any]
    leakage_spacelike: float
    leakage_timelike: float
    residual_wave: float
    hilbert_identity: float = 0.0
    refinement: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        return path


def save_grid_function(stem: Path, st: SpacetimeGrid23, values: np.ndarray) -> Tuple[Path, Path]:
    """JSON header plus little-endian float64 samples in C order"""
    stem = Path(stem)
    header_path, data_path = stem.with_suffix(".json"), stem.with_suffix(".bin")
    header = {"grid": st.describe(), "shape": list(values.shape), "dtype": "<f8", "axes": ["x0", "x1", "x2"]}
    header_path.write_text(json.dumps(header, indent=2), encoding="utf-8")
    np.asarray(values, dtype="<f8").tofile(data_path)
    return header_path, data_path


def load_grid_function(stem: Path) -> Tuple[SpacetimeGrid23, np.ndarray]:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text(encoding="utf-8"))
    values = np.fromfile(stem.with_suffix(".bin"), dtype="<f8").reshape(header["shape"])
    return SpacetimeGrid23(**header["grid"]), values


def synth_commutator_solution(source: GaussianSource, region: DoubleCone23,
                              grid: ConeGrid23) -> ConeAmplitude:
    """Cone amplitude of F = h * Delta_+ for a source supported in the region"""
    leakage = source.support_leakage(region)
    if leakage > SUPPORT_TOLERANCE:
        raise SupportViolation("source is not supported in the double cone",
                               {"leakage": leakage, "radius": region.radius})
    a = KERNEL_NORMALIZATION / (2 * np.pi) * source.fourier(grid.momenta)
    logger.debug("synthesized %d cone modes, max |a| = %.3e", a.size, float(np.max(np.abs(a))))
    return ConeAmplitude(grid=grid, a=a)


def _relative_sup(values: np.ndarray, mask: np.ndarray, scale: float) -> float:
    if scale <= 0 or not np.any(mask):
        return 0.0
    return float(np.max(np.abs(values[mask])) / scale)


def complement_masks(st: SpacetimeGrid23, region: DoubleCone23, factor: float = 2.0,
                     guard: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray, float]:
    """Spacelike and timelike complements of the enlarged region, minus a guard band"""
    guard = 2 * max(st.dx, st.dt) if guard is None else guard
    reach = factor * region.radius
    y = st.points - region.center
    rho = np.hypot(y[..., 1], y[..., 2])
    spacelike = rho > reach + np.abs(y[..., 0]) + guard
    timelike = np.abs(y[..., 0]) > reach + rho + guard
    return spacelike, timelike, guard


def wave_residual(F: ConeAmplitude, points: np.ndarray, h: float) -> float:
    """|box_h F| / |F| on sample points with centered second differences"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    center = F.evaluate(points)
    signs = np.array([1.0, -1.0, -1.0])
    box = np.zeros_like(center)
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        second = (F.evaluate(points + step) - 2 * center + F.evaluate(points - step)) / h ** 2
        box += signs[axis] * second
    norm = np.linalg.norm(center)
    return float(np.linalg.norm(box) / norm) if norm > 0 else 0.0


def default_sample_points(region: DoubleCone23) -> np.ndarray:
    offsets = np.array([[0.3, 0.5, -0.2], [1.0, 1.5, 0.5], [-0.5, 0.1, 1.2], [2.0, -0.4, 0.3]])
    return region.center + region.radius * offsets


def verify_huygens(F: ConeAmplitude, region: DoubleCone23, st: SpacetimeGrid23,
                   factor: float = 2.0, residual_step: Optional[float] = None,
                   guard: Optional[float] = None) -> SupportReport:
    """Leakage of Im F into the spacelike and of h(Im F) = Re F into the timelike complement"""
    field_values = F.on_grid(st)
    imaginary = field_values.imag
    transformed = hilbert_time(imaginary, axis=0)
    scale = float(np.max(np.abs(field_values)))
    identity = float(np.max(np.abs(transformed - field_values.real)) / scale) if scale > 0 else 0.0
    spacelike, timelike, guard = complement_masks(st, region, factor, guard)
    report = SupportReport(
        grid=st.describe(),
        region={"center": region.center.tolist(), "radius": region.radius, "checked_radius": factor * region.radius,
                "guard": guard},
        leakage_spacelike=_relative_sup(imaginary, spacelike, float(np.max(np.abs(imaginary)))),
        leakage_timelike=_relative_sup(transformed, timelike, float(np.max(np.abs(transformed)))),
        residual_wave=wave_residual(F, default_sample_points(region), residual_step or min(st.dx, st.dt) / 4),
        hilbert_identity=identity,
    )
    logger.info("huygens leakage: spacelike %.2e, timelike %.2e (T=%.1f)",
                report.leakage_spacelike, report.leakage_timelike, st.t_period)
    return report


def huygens_refinement(source: GaussianSource, region: DoubleCone23, st: SpacetimeGrid23,
                       levels: int = 2) -> Tuple[list, Dict[str, float]]:
    """Reports on successively refined grids plus the last leakage ratios

    Every level uses the guard band of the coarsest grid so the complements
    compared across levels are the same sets. The last report carries a
    refinement section naming any leakage exempted from halving because it
    already sits at roundoff.
    """
    reports = []
    guard = 2 * max(st.dx, st.dt)
    for _ in range(levels):
        F = synth_commutator_solution(source, region, st.cone_grid())
        reports.append(verify_huygens(F, region, st, guard=guard))
        st = st.refined()
    ratios, refinement = {}, {"floor": ROUNDOFF_LEAKAGE, "required_ratio": 0.5}
    for key in ("leakage_spacelike", "leakage_timelike"):
        coarse, fine = getattr(reports[-2], key), getattr(reports[-1], key)
        ratios[key] = fine / coarse if coarse > 0 else 0.0
        label = key.split("_", 1)[1]
        refinement[f"{label}_ratio"] = ratios[key]
        refinement[f"{label}_at_roundoff"] = bool(fine <= ROUNDOFF_LEAKAGE)
        refinement[f"{label}_converged"] = leakage_converged(coarse, fine)
    reports[-1].refinement = refinement
    if refinement["timelike_at_roundoff"] or refinement["spacelike_at_roundoff"]:
        logger.info("leakage at roundoff exempted from halving: %s", refinement)
    return reports, ratios


def leakage_converged(coarse: float, fine: float, ratio: float = 0.5, floor: float = ROUNDOFF_LEAKAGE) -> bool:
    """Reduced by ratio under refinement, or already at roundoff"""
    return bool(fine <= ratio * coarse or fine <= floor)


def kernel_hilbert_deviation(st: SpacetimeGrid23, eps: float = 0.25,
                             spatial: Sequence[Sequence[float]] = ((0.0, 0.0), (0.5, 0.0), (0.3, -0.4))) -> float:
    """|h(Delta_0) - Delta_0'| / |Delta_0'| on the central half of the time window"""
    t = st.times
    central = np.abs(t) <= st.t_period / 4
    worst = 0.0
    for x1, x2 in spatial:
        x = np.stack([t, np.full_like(t, x1), np.full_like(t, x2)], axis=-1)
        transformed = hilbert_time(delta_zero(x, eps))
        reference = delta_zero_prime(x, eps)
        deviation = np.max(np.abs(transformed - reference)[central]) / np.max(np.abs(reference))
        worst = max(worst, float(deviation))
    return worst
