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
Massless little groups and induced representations

Two models live here. The E(2) little group of a lightlike vector in 3+1
dimensions is kept at the level of its 2x2 matrices and of the circle
representations V_kappa. In 2+1 dimensions the little group is the
parabolic subgroup fixing q = (1, 0, 1) and the induced representation
U_{kappa,z} is realized on a momentum grid on the forward cone.

Cone amplitudes are stored in Hilbert coordinates psi = sqrt(w) phi, where
w are the quadrature weights of the invariant measure dp/|p| = dr dtheta,
so the grid inner product is the plain complex dot product.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import polar

from src.errors import IncompatibleStep, OffCone, OffGrid, SectionSingular

logger = logging.getLogger(__name__)

METRIC = np.diag([1.0, -1.0, -1.0])
REFERENCE_MOMENTUM = np.array([1.0, 0.0, 1.0])

# Lorentz generators of SO(2,1): boosts along x1 and x2, rotation in the (x1, x2) plane
BOOST_X1 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
BOOST_X2 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
ROTATION = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
# nilpotent generator of the stabilizer of q
PARABOLIC = BOOST_X1 + ROTATION


# ---------------------------------------------------------------------------
# E(2) little group (3+1 dimensions)
# ---------------------------------------------------------------------------

@dataclass
class E2Element:
    """[[u, z], [0, conj(u)]] with |u| = 1"""
    u: complex
    z: complex

    def __post_init__(self):
        if abs(abs(self.u) - 1.0) > 1e-12:
            raise ValueError(f"|u| must be 1, got {abs(self.u)}")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.u, self.z], [0.0, np.conj(self.u)]], dtype=complex)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "E2Element":
        if abs(matrix[1, 0]) > 1e-12 or abs(matrix[1, 1] - np.conj(matrix[0, 0])) > 1e-12:
            raise ValueError("matrix is not in the E(2) form")
        return cls(u=complex(matrix[0, 0]), z=complex(matrix[0, 1]))

    def __matmul__(self, other: "E2Element") -> "E2Element":
        return E2Element.from_matrix(self.matrix @ other.matrix)

    def allclose(self, other: "E2Element", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, other.matrix, atol=atol, rtol=0.0))


def tau(z: complex) -> E2Element:
    return E2Element(u=1.0, z=complex(z))


def alpha(t: float) -> np.ndarray:
    """Boost along the reference direction as an SL(2,C) matrix"""
    return np.diag([np.exp(t / 2), np.exp(-t / 2)]).astype(complex)


def e2_boost_conjugation(t: float, z: complex) -> E2Element:
    """alpha(t) tau(z) alpha(-t), which is tau(e^t z)"""
    return E2Element.from_matrix(alpha(t) @ tau(z).matrix @ alpha(-t))


@dataclass
class CircleRepVk:
    """Representation V_kappa of the E(2) cover on functions of the circle, sampled at N angles"""
    kappa: float
    N: int
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.epsilon not in (0.0, 0.5):
            raise ValueError("statistics label must be 0 or 1/2")
        self.theta = 2 * np.pi * np.arange(self.N) / self.N

    def translation(self, z: complex) -> np.ndarray:
        phases = self.kappa * np.real(np.conj(z) * np.exp(1j * self.theta))
        return np.diag(np.exp(1j * phases))

    def translation_generator(self, direction: complex = 1.0) -> np.ndarray:
        """X with translation(s * direction) = exp(i s X)"""
        direction = direction / abs(direction)
        return np.diag(self.kappa * np.real(np.conj(direction) * np.exp(1j * self.theta)))

    def rotation(self, k: int) -> np.ndarray:
        """Rotation by 2 pi k / N; a full turn acts by exp(2 pi i epsilon)"""
        turns = k // self.N
        return np.exp(2j * np.pi * self.epsilon * turns) * np.roll(np.eye(self.N), k, axis=0)

    def covariance_deviation(self, k: int, z: complex) -> float:
        """R T(z) R^-1 against T(e^{i phi} z)"""
        R = self.rotation(k)
        lhs = R @ self.translation(z) @ R.conj().T
        rhs = self.translation(np.exp(2j * np.pi * k / self.N) * z)
        return float(np.max(np.abs(lhs - rhs)))


def vk_translation_spectrum(rep: CircleRepVk, direction: complex = 1.0) -> List[float]:
    return sorted(np.linalg.eigvalsh(rep.translation_generator(direction)).tolist())


def vk_dilation_rescale(rep: CircleRepVk, t: float) -> CircleRepVk:
    """V_kappa composed with the dilation automorphism, restricted to E(2)

    The automorphism acts on the little group by tau(z) -> tau(e^{-t} z); the
    translation generator of the pulled-back representation is read off and
    its spectral radius gives the new kappa.
    """
    shrunk = e2_boost_conjugation(-t, 1.0).z
    generator = rep.kappa * np.real(np.conj(shrunk) * np.exp(1j * rep.theta))
    return CircleRepVk(kappa=float(np.max(np.abs(generator))), N=rep.N, epsilon=rep.epsilon)


def vk_rescale_deviation(rep: CircleRepVk, t: float, samples: Sequence[complex]) -> float:
    """Pulled-back translations of V_kappa against translations of V_{e^-t kappa}"""
    target = CircleRepVk(kappa=np.exp(-t) * rep.kappa, N=rep.N, epsilon=rep.epsilon)
    deviation = 0.0
    for z in samples:
        pulled = rep.translation(e2_boost_conjugation(-t, z).z)
        deviation = max(deviation, float(np.max(np.abs(pulled - target.translation(z)))))
    return deviation


# ---------------------------------------------------------------------------
# 2+1 dimensional geometry
# ---------------------------------------------------------------------------

def minkowski(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 0] - a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]


def boost_x1(t: float) -> np.ndarray:
    c, s = np.cosh(t), np.sinh(t)
    return np.array([[c, s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def boost_x2(t: float) -> np.ndarray:
    c, s = np.cosh(t), np.sinh(t)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def rotation(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def parabolic(c: float) -> np.ndarray:
    """exp(c N) for the nilpotent stabilizer generator N"""
    return np.eye(3) + c * PARABOLIC + 0.5 * c * c * (PARABOLIC @ PARABOLIC)


def lorentz_inverse(A: np.ndarray) -> np.ndarray:
    return METRIC @ np.swapaxes(A, -1, -2) @ METRIC


def cone_coordinates(p: np.ndarray, tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
    """(log r, theta) of forward-cone momenta; raises OffCone off the open cone"""
    p = np.asarray(p, dtype=float)
    p0 = p[..., 0]
    if np.any(p0 <= 0):
        raise OffCone("momentum is not future pointing", {"min_p0": float(np.min(p0))})
    if np.any(np.abs(minkowski(p, p)) > tol * p0 ** 2):
        raise OffCone("momentum is not lightlike", {"max_mass_shell": float(np.max(np.abs(minkowski(p, p))))})
    return np.log(p0), np.mod(np.arctan2(p[..., 2], p[..., 1]), 2 * np.pi)


def section_matrices(u: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """B_p = R(theta - pi/2) exp(u K2), batched; B_p q = p"""
    u, theta = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(theta, dtype=float))
    ch, sh = np.cosh(u), np.sinh(u)
    ct, st = np.cos(theta), np.sin(theta)
    B = np.zeros(u.shape + (3, 3))
    B[..., 0, 0], B[..., 0, 2] = ch, sh
    B[..., 1, 0], B[..., 1, 1], B[..., 1, 2] = ct * sh, st, ct * ch
    B[..., 2, 0], B[..., 2, 1], B[..., 2, 2] = st * sh, -ct, st * ch
    return B


def section(p: np.ndarray) -> np.ndarray:
    u, theta = cone_coordinates(p)
    return section_matrices(u, theta)


@dataclass
class LittleGroupElement23:
    """Parabolic parameter c of an element of the stabilizer of q"""
    c: float
    residual: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        return parabolic(self.c)


def cocycle_values(A: np.ndarray, momenta: np.ndarray) -> np.ndarray:
    """c(A, p) for a batch of cone momenta"""
    u, theta = cone_coordinates(momenta)
    pulled = np.einsum("ij,...j->...i", lorentz_inverse(A), momenta)
    if not np.all(np.isfinite(pulled)) or np.any(pulled[..., 0] <= 0):
        raise SectionSingular("pulled-back momentum left the section chart")
    u_b, theta_b = cone_coordinates(pulled, tol=1e-8)
    first_column = np.stack([np.cosh(u_b), np.cos(theta_b) * np.sinh(u_b), np.sin(theta_b) * np.sinh(u_b)], -1)
    # row 1 of B_p^-1 is (0, sin theta, -cos theta)
    row = np.stack([np.zeros_like(theta), np.sin(theta), -np.cos(theta)], -1)
    return np.einsum("...i,ij,...j->...", row, A, first_column)


def little_group_decompose(A: np.ndarray, p: np.ndarray) -> LittleGroupElement23:
    """W(A, p) = B_p^-1 A B_{A^-1 p} and its parabolic parameter"""
    A = np.asarray(A, dtype=float)
    p = np.asarray(p, dtype=float)
    u, theta = cone_coordinates(p)
    pulled = lorentz_inverse(A) @ p
    if not np.all(np.isfinite(pulled)) or pulled[0] <= 0:
        raise SectionSingular("pulled-back momentum left the section chart", {"pulled": pulled.tolist()})
    u_b, theta_b = cone_coordinates(pulled, tol=1e-8)
    W = lorentz_inverse(section_matrices(u, theta)) @ A @ section_matrices(u_b, theta_b)
    residual = float(np.linalg.norm(W @ REFERENCE_MOMENTUM - REFERENCE_MOMENTUM))
    if residual > 1e-10 * max(1.0, np.linalg.norm(A)):
        raise SectionSingular("little group element does not fix q", {"residual": residual})
    return LittleGroupElement23(c=float(W[1, 0]), residual=residual)


def rotation_angle(A: np.ndarray) -> Optional[float]:
    """Angle in [0, 2 pi) of a pure spatial rotation, None for anything else"""
    A = np.asarray(A, dtype=float)
    if not np.allclose(A[0], [1.0, 0.0, 0.0], atol=1e-12) or not np.allclose(A[:, 0], [1.0, 0.0, 0.0], atol=1e-12):
        return None
    angle = float(np.mod(np.arctan2(A[2, 1], A[1, 1]), 2 * np.pi))
    return 0.0 if angle > 2 * np.pi - 1e-12 else angle


def rotation_part(A: np.ndarray) -> float:
    """Angle in [0, 2 pi) of R in the Cartan decomposition A = R B (B a pure boost)"""
    R, _ = polar(np.asarray(A, dtype=float), side="right")
    angle = float(np.mod(np.arctan2(R[2, 1], R[1, 1]), 2 * np.pi))
    return 0.0 if angle > 2 * np.pi - 1e-12 else angle


@dataclass
class PoincareElement23:
    """(a, A) with an integer count of full rotations for the center character

    The lift of A is R(2 pi turns + phi) B for the Cartan decomposition A = R(phi) B,
    phi in [0, 2 pi). Cartan angles of a product differ from the sum by less
    than pi, so products carry full turns by rounding.
    """
    a: np.ndarray = field(default_factory=lambda: np.zeros(3))
    A: np.ndarray = field(default_factory=lambda: np.eye(3))
    turns: int = 0

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.A = np.asarray(self.A, dtype=float)

    def __matmul__(self, other: "PoincareElement23") -> "PoincareElement23":
        A = self.A @ other.A
        carry = (rotation_part(self.A) + rotation_part(other.A) - rotation_part(A)) / (2 * np.pi)
        turns = self.turns + other.turns + int(round(carry))
        return PoincareElement23(self.a + self.A @ other.a, A, turns)

    def inverse(self) -> "PoincareElement23":
        A_inv = lorentz_inverse(self.A)
        turns = -self.turns
        if rotation_part(self.A) > 0.0:
            turns -= 1
        return PoincareElement23(-A_inv @ self.a, A_inv, turns)

    @classmethod
    def translation(cls, a: Sequence[float]) -> "PoincareElement23":
        return cls(a=np.asarray(a, dtype=float))

    @classmethod
    def lorentz(cls, A: np.ndarray) -> "PoincareElement23":
        return cls(A=A)

    @classmethod
    def rotation(cls, phi: float) -> "PoincareElement23":
        return cls(A=rotation(phi), turns=int(np.floor(phi / (2 * np.pi))))


# ---------------------------------------------------------------------------
# Momentum grid and induced representation
# ---------------------------------------------------------------------------

@dataclass
class ConeGrid23:
    """Momentum grid on the forward light cone

    Log spacing: r_i = r_min rho^i, weights r_i du dtheta.
    Uniform spacing: r_i = i dr for i = 1..n_r, weights dr dtheta (no p = 0 node).
    """
    n_r: int
    n_theta: int
    u_min: float = -3.0
    u_max: float = 3.0
    spacing: str = "log"
    r_max: float = 30.0

    def __post_init__(self):
        if self.n_r < 2 or self.n_theta < 3:
            raise ValueError("grid too small")
        if self.spacing not in ("log", "uniform"):
            raise ValueError(f"unknown radial spacing {self.spacing!r}")
        self.theta = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        self.dtheta = 2 * np.pi / self.n_theta
        if self.spacing == "log":
            self.u = np.linspace(self.u_min, self.u_max, self.n_r)
            self.du = (self.u_max - self.u_min) / (self.n_r - 1)
            self.r = np.exp(self.u)
            radial_weight = self.r * self.du
        else:
            self.dr = self.r_max / self.n_r
            self.r = self.dr * np.arange(1, self.n_r + 1)
            self.u = np.log(self.r)
            self.du = None
            radial_weight = np.full(self.n_r, self.dr)
        self.weights = np.outer(radial_weight, np.full(self.n_theta, self.dtheta))
        self.sqrt_weights = np.sqrt(self.weights)

    @property
    def size(self) -> int:
        return self.n_r * self.n_theta

    @property
    def ratio(self) -> float:
        return float(np.exp(self.du)) if self.spacing == "log" else float("nan")

    @property
    def momenta(self) -> np.ndarray:
        r = self.r[:, None]
        return np.stack([r * np.ones(self.n_theta), r * np.cos(self.theta), r * np.sin(self.theta)], -1)

    def describe(self) -> Dict[str, Any]:
        return {"n_r": self.n_r, "n_theta": self.n_theta, "u_min": self.u_min, "u_max": self.u_max,
                "spacing": self.spacing, "r_max": self.r_max}

    def refined(self, factor: int = 2) -> "ConeGrid23":
        return ConeGrid23(n_r=factor * (self.n_r - 1) + 1 if self.spacing == "log" else factor * self.n_r,
                          n_theta=factor * self.n_theta, u_min=self.u_min, u_max=self.u_max,
                          spacing=self.spacing, r_max=self.r_max)

    def to_hilbert(self, phi: np.ndarray) -> np.ndarray:
        return (self.sqrt_weights * phi).ravel()

    def from_hilbert(self, psi: np.ndarray) -> np.ndarray:
        return psi.reshape(self.n_r, self.n_theta) / self.sqrt_weights

    def gaussian_bump(self, u0: float = 0.0, theta0: float = np.pi / 2, width: float = 0.5,
                      phase: float = 0.0) -> np.ndarray:
        """Normalized smooth amplitude (Hilbert coordinates) localized near (u0, theta0)"""
        dtheta = np.angle(np.exp(1j * (self.theta - theta0)))
        profile = np.exp(-((self.u[:, None] - u0) ** 2 + dtheta[None, :] ** 2) / (2 * width ** 2))
        psi = (profile * np.exp(1j * phase * self.u[:, None])).astype(complex).ravel()
        return psi / np.linalg.norm(psi)


def save_amplitudes(stem: Path, grid: ConeGrid23, psi: np.ndarray) -> Tuple[Path, Path]:
    """JSON grid header plus little-endian float64 (re, im) pairs"""
    stem = Path(stem)
    header_path, data_path = stem.with_suffix(".json"), stem.with_suffix(".bin")
    header = {"grid": grid.describe(), "length": int(psi.size), "dtype": "<f8", "layout": "re,im pairs"}
    header_path.write_text(json.dumps(header, indent=2), encoding="utf-8")
    np.column_stack([psi.real, psi.imag]).astype("<f8").tofile(data_path)
    return header_path, data_path


def load_amplitudes(stem: Path) -> Tuple[ConeGrid23, np.ndarray]:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text(encoding="utf-8"))
    pairs = np.fromfile(stem.with_suffix(".bin"), dtype="<f8").reshape(-1, 2)
    return ConeGrid23(**header["grid"]), pairs[:, 0] + 1j * pairs[:, 1]


@dataclass
class MasslessRep23:
    """U_{kappa,z} (or U_{kappa,z} + U_{-kappa,conj z} when doubled) on a cone grid

    The center character z is any unit complex number. Amplitudes are sections
    over the angle circle with f(theta - 2 pi) = z f(theta), so grid rotations
    pick up z on the samples that wrap around and a full turn acts by z.
    Real characters are kept as the floats +1 and -1.
    """
    grid: ConeGrid23
    kappa: float = 0.0
    z_center: complex = 1.0
    doubled: bool = False
    off_grid_fraction: float = 0.05

    def __post_init__(self):
        if self.grid.spacing != "log":
            raise ValueError("the induced representation needs a log-spaced radial grid")
        z = complex(self.z_center)
        if abs(abs(z) - 1.0) > 1e-12:
            raise ValueError("center character must have modulus one")
        z /= abs(z)
        self.z_center = float(np.sign(z.real)) if abs(z.imag) < 1e-12 else z
        self._momenta = self.grid.momenta

    @property
    def components(self) -> List[Tuple[float, complex]]:
        if self.doubled:
            return [(self.kappa, self.z_center), (-self.kappa, np.conj(self.z_center))]
        return [(self.kappa, self.z_center)]

    @property
    def real_center(self) -> bool:
        return isinstance(self.z_center, float)

    @property
    def dim(self) -> int:
        return self.grid.size * len(self.components)

    @property
    def twist(self) -> np.ndarray:
        """Gamma = U(2 pi), diagonal on the components"""
        return np.concatenate([np.full(self.grid.size, z) for _, z in self.components])

    def split(self, psi: np.ndarray) -> List[np.ndarray]:
        return [block.reshape(self.grid.n_r, self.grid.n_theta) for block in np.split(psi, len(self.components))]

    def cocycle_table(self, A: np.ndarray) -> np.ndarray:
        return cocycle_values(A, self._momenta)

    def translation_phases(self, a: Sequence[float]) -> np.ndarray:
        """exp(i a.p) on the full (component-stacked) grid"""
        a = np.asarray(a, dtype=float)
        phase = np.exp(1j * minkowski(np.broadcast_to(a, self._momenta.shape), self._momenta)).ravel()
        return np.tile(phase, len(self.components))

    def grid_rotation_steps(self, A: np.ndarray) -> Optional[int]:
        angle = rotation_angle(A)
        if angle is None:
            return None
        steps = angle / self.grid.dtheta
        if abs(steps - round(steps)) > 1e-9:
            return None
        return int(round(steps)) % self.grid.n_theta

    def grid_transform(self, steps: int, a: Sequence[float], X: np.ndarray, turns: int = 0) -> np.ndarray:
        """U(a) U(R(2 pi steps / N_theta)) on a vector or on the columns of a matrix"""
        X = np.asarray(X, dtype=complex)
        columns = X.reshape(len(self.components), self.grid.n_r, self.grid.n_theta, -1)
        k = steps % self.grid.n_theta
        moved = np.roll(columns, k, axis=2)
        for c, (_, z) in enumerate(self.components):
            if k:
                moved[c, :, :k, :] *= z
            moved[c] *= z ** turns
        moved = moved.reshape(self.dim, -1) * self.translation_phases(a)[:, None]
        return moved.reshape(X.shape)

    def _pullback(self, amplitude: np.ndarray, A: np.ndarray, z: complex = 1.0) -> np.ndarray:
        """phi(A^-1 p) by bilinear interpolation in (log r, theta), zero off the radial range

        The pulled-back angle is lifted to the sheet closest to theta - phi, phi
        the rotation part of A; every 2 pi of lift multiplies by conj(z).
        """
        grid = self.grid
        pulled = np.einsum("ij,...j->...i", lorentz_inverse(A), self._momenta)
        u_b, theta_b = cone_coordinates(pulled, tol=1e-8)
        target = grid.theta[None, :] - rotation_part(A)
        lift = np.round((target - theta_b) / (2 * np.pi)).astype(int)
        fu = (u_b - grid.u_min) / grid.du
        ft = theta_b / grid.dtheta
        i0 = np.floor(fu).astype(int)
        j0 = np.floor(ft).astype(int) % grid.n_theta
        j1 = (j0 + 1) % grid.n_theta
        # f(2 pi) = conj(z) f(0)
        wrap = np.where(j1 == 0, np.conj(z), 1.0)
        su, st = fu - np.floor(fu), ft - np.floor(ft)
        inside = (i0 >= 0) & (i0 <= grid.n_r - 1) & ((i0 < grid.n_r - 1) | (su < 1e-12))
        i0c = np.clip(i0, 0, grid.n_r - 1)
        i1c = np.clip(i0 + 1, 0, grid.n_r - 1)
        value = ((1 - su) * (1 - st) * amplitude[i0c, j0] + (1 - su) * st * wrap * amplitude[i0c, j1]
                 + su * (1 - st) * amplitude[i1c, j0] + su * st * wrap * amplitude[i1c, j1])
        if z != 1.0:
            value = value * np.conj(z) ** lift
        return np.where(inside, value, 0.0)

    def apply(self, g: PoincareElement23, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        steps = self.grid_rotation_steps(g.A)
        if steps is not None:
            return self.grid_transform(steps, g.a, psi, g.turns)
        grid = self.grid
        translation_phase = self.translation_phases(g.a)[:grid.size].reshape(grid.n_r, grid.n_theta)
        cocycle = self.cocycle_table(g.A) if self.kappa != 0.0 else None
        blocks = []
        for (kappa, z), block in zip(self.components, self.split(psi)):
            moved = grid.sqrt_weights * self._pullback(block / grid.sqrt_weights, g.A, z)
            phase = translation_phase * z ** g.turns
            if cocycle is not None:
                phase = phase * np.exp(1j * kappa * cocycle)
            blocks.append((phase * moved).ravel())
        out = np.concatenate(blocks)
        norm_in = np.linalg.norm(psi)
        lost = 1.0 - (np.linalg.norm(out) / norm_in) ** 2 if norm_in > 0 else 0.0
        if lost > self.off_grid_fraction:
            raise OffGrid("pulled-back amplitude left the radial range", {"lost_fraction": float(lost)})
        return out

    def dilation_apply(self, t: float, psi: np.ndarray, allow_interpolation: bool = False) -> np.ndarray:
        """(D(t) phi)(p) = e^{t/2} phi(e^t p); an index shift in Hilbert coordinates"""
        if self.kappa != 0.0:
            raise ValueError("dilations are symmetries only at kappa = 0")
        steps = t / self.grid.du
        shift = int(round(steps))
        if abs(steps - shift) > 1e-9:
            if not allow_interpolation:
                raise IncompatibleStep("dilation is not a multiple of the radial step",
                                       {"t": t, "step": self.grid.du})
            logger.warning("dilation by %.4g is off the radial lattice, interpolating", t)
            return self._interpolated_dilation(t, psi)
        blocks = []
        for block in self.split(np.asarray(psi, dtype=complex)):
            moved = np.zeros_like(block)
            if shift >= 0:
                moved[:self.grid.n_r - shift] = block[shift:]
            else:
                moved[-shift:] = block[:self.grid.n_r + shift]
            blocks.append(moved.ravel())
        return np.concatenate(blocks)

    def _interpolated_dilation(self, t: float, psi: np.ndarray) -> np.ndarray:
        grid = self.grid
        fu = (grid.u + t - grid.u_min) / grid.du
        blocks = []
        for block in self.split(np.asarray(psi, dtype=complex)):
            phi = block / grid.sqrt_weights
            values = np.empty_like(phi)
            for j in range(grid.n_theta):
                values[:, j] = (np.interp(fu, np.arange(grid.n_r), phi[:, j].real, left=0.0, right=0.0)
                                + 1j * np.interp(fu, np.arange(grid.n_r), phi[:, j].imag, left=0.0, right=0.0))
            blocks.append((grid.sqrt_weights * np.exp(t / 2) * values).ravel())
        return np.concatenate(blocks)


def rep_apply(rep: MasslessRep23, a: Sequence[float], A: np.ndarray, phi: np.ndarray, turns: int = 0) -> np.ndarray:
    return rep.apply(PoincareElement23(a=np.asarray(a, dtype=float), A=A, turns=turns), phi)


def dilation_apply(rep: MasslessRep23, t: float, phi: np.ndarray) -> np.ndarray:
    return rep.dilation_apply(t, phi)


def group_law_residual(rep: MasslessRep23, g1: PoincareElement23, g2: PoincareElement23,
                       psi: np.ndarray) -> float:
    lhs = rep.apply(g1, rep.apply(g2, psi))
    rhs = rep.apply(g1 @ g2, psi)
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(psi))


def unitarity_residual(rep: MasslessRep23, g: PoincareElement23, psi: np.ndarray) -> float:
    return float(abs(np.linalg.norm(rep.apply(g, psi)) - np.linalg.norm(psi)) / np.linalg.norm(psi))


def dilation_covariance_residual(rep: MasslessRep23, steps: int, a: Sequence[float], psi: np.ndarray) -> float:
    """D(t) U(a) D(-t) against U(e^t a) on the rows that stay on the grid"""
    t = steps * rep.grid.du
    a = np.asarray(a, dtype=float)
    lhs = rep.dilation_apply(t, rep.apply(PoincareElement23.translation(a), rep.dilation_apply(-t, psi)))
    rhs = rep.apply(PoincareElement23.translation(np.exp(t) * a), psi)
    keep = slice(abs(steps), rep.grid.n_r - abs(steps))
    lhs_blocks = [block[keep] for block in rep.split(lhs)]
    rhs_blocks = [block[keep] for block in rep.split(rhs)]
    return float(max(np.max(np.abs(x - y)) for x, y in zip(lhs_blocks, rhs_blocks)))


def dilated_cocycle_deviation(rep: MasslessRep23, steps: int, A: np.ndarray) -> float:
    """kappa c(A, e^t p) against (e^-t kappa) c(A, p) on the grid, t = steps * du"""
    if steps <= 0:
        raise ValueError("use a positive number of radial steps")
    t = steps * rep.grid.du
    table = rep.cocycle_table(A)
    kappa_prime = np.exp(-t) * rep.kappa
    lhs = rep.kappa * table[steps:]
    rhs = kappa_prime * table[:-steps]
    return float(np.max(np.abs(lhs - rhs)))


def cocycle_frame(rep: MasslessRep23, elements: Dict[str, np.ndarray]) -> pd.DataFrame:
    """Cocycle tables in long form with columns i, j, A-id, c"""
    frames = []
    for name, A in elements.items():
        table = rep.cocycle_table(A)
        i, j = np.meshgrid(np.arange(rep.grid.n_r), np.arange(rep.grid.n_theta), indexing="ij")
        frames.append(pd.DataFrame({"i": i.ravel(), "j": j.ravel(), "A-id": name, "c": table.ravel()}))
    return pd.concat(frames, ignore_index=True)
