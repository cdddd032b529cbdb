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
Bisognano-Wichmann net of standard subspaces on wedges

The wedge subspace H(W) is the fixed-point space of S_W = J_W Delta_W^{1/2},
where Delta_W^{it} = U(Lambda_W(-2 pi t)) and J_W is an antiunitary edge
reflection. On a cone grid Delta_W = exp(-2 pi K_W) with K_W the boost
generator; its spectrum is truncated to |2 pi k| <= cutoff and every wedge
subspace lives in the truncated space.

The standard wedge is W0 = {x1 > |x0|}. Other wedges are a + R(phi) W0 with
phi a grid angle, so their data are obtained from W0 by exact grid transforms.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import LinearOperator, eigsh, expm_multiply

from src.errors import CutoffTooAggressive, EmptyFamily, IncompatibleStep, KNotInvariant, NoPCT, NotEdgeDirection
from src.subspace_core import (
    AntiLinearMap, ModularData, RealSubspace, TolerancePolicy, classify, containment_defect,
    principal_angles, subspace_distance, subspace_from_tomita, symplectic_complement, tensor,
    tomita_from_subspace, verify_tensor_meet,
)
from src.wigner_reps import MasslessRep23, PoincareElement23, boost_x1, rotation

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF = 20.0
# reflection of W0: flips x0 and x1
EDGE_REFLECTION = np.diag([-1.0, -1.0, 1.0])


@dataclass
class Wedge23:
    """a + R(angle) W0"""
    angle: float = 0.0
    a: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.angle = float(np.mod(self.angle, 2 * np.pi))
        if self.angle > 2 * np.pi - 1e-12:
            self.angle = 0.0
        self.a = np.asarray(self.a, dtype=float)

    @property
    def direction(self) -> np.ndarray:
        return np.array([np.cos(self.angle), np.sin(self.angle)])

    @property
    def edge_direction(self) -> np.ndarray:
        """Future lightlike vector x with U(tx) H(W) inside H(W) for t >= 0"""
        return np.concatenate([[1.0], self.direction])

    def contains(self, x: np.ndarray, closure: bool = False, tol: float = 1e-12) -> np.ndarray:
        y = np.atleast_2d(np.asarray(x, dtype=float)) - self.a
        depth = y[:, 1:] @ self.direction - np.abs(y[:, 0])
        return depth >= -tol if closure else depth > tol

    def contains_wedge(self, other: "Wedge23") -> bool:
        if abs(np.angle(np.exp(1j * (other.angle - self.angle)))) > 1e-12:
            return False
        return bool(self.contains(other.a, closure=True)[0])

    def grid_steps(self, n_theta: int) -> int:
        steps = self.angle / (2 * np.pi / n_theta)
        if abs(steps - round(steps)) > 1e-9:
            raise IncompatibleStep("wedge angle is not a grid angle", {"angle": self.angle, "n_theta": n_theta})
        return int(round(steps)) % n_theta

    @property
    def placement(self) -> PoincareElement23:
        return PoincareElement23(a=self.a, A=rotation(self.angle))

    def boost(self, t: float) -> PoincareElement23:
        """Lambda_W(t) = g Lambda_W0(t) g^-1"""
        g = self.placement
        return g @ PoincareElement23.lorentz(boost_x1(t)) @ g.inverse()

    def reflection(self) -> Tuple[np.ndarray, np.ndarray]:
        """j_W as x -> M x + b"""
        R = rotation(self.angle)
        M = R @ EDGE_REFLECTION @ R.T
        return M, self.a - M @ self.a

    def causal_complement(self) -> "Wedge23":
        return Wedge23(angle=self.angle + np.pi, a=self.a)

    def moved(self, angle: float, b: Sequence[float]) -> "Wedge23":
        """(b, R(angle)) applied to the wedge"""
        return Wedge23(angle=self.angle + angle, a=np.asarray(b, dtype=float) + rotation(angle) @ self.a)

    def describe(self) -> Dict[str, Any]:
        return {"angle": self.angle, "a": self.a.tolist()}


def boost_preserves_wedge(W: Wedge23, times: Sequence[float] = (-1.0, 0.3, 2.0), samples: int = 16) -> bool:
    """Lambda_W(t) maps sampled points of W (and of its boundary) into the closure of W"""
    rng = np.random.default_rng(0)
    y0 = rng.uniform(-1.0, 1.0, samples)
    along = np.abs(y0) + rng.uniform(0.0, 2.0, samples)
    edge = rng.uniform(-2.0, 2.0, samples)
    n = W.direction
    n_perp = np.array([-n[1], n[0]])
    points = np.column_stack([y0, along[:, None] * n + edge[:, None] * n_perp]) + W.a
    for t in times:
        g = W.boost(t)
        moved = points @ g.A.T + g.a
        if not np.all(W.contains(moved, closure=True, tol=1e-9)):
            return False
    return True


@dataclass
class DoubleCone23:
    """{x : |x0 - c0| + |x - c| < r}"""
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radius: float = 1.0

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def extreme_points(self, n_equator: int = 16) -> np.ndarray:
        c, r = self.center, self.radius
        apexes = [c + [r, 0.0, 0.0], c - [r, 0.0, 0.0]]
        phi = 2 * np.pi * np.arange(n_equator) / n_equator
        equator = c + r * np.column_stack([np.zeros(n_equator), np.cos(phi), np.sin(phi)])
        return np.vstack([apexes, equator])

    def wedge_family(self, m: int = 4, offset: float = 0.0) -> List[Wedge23]:
        """m wedges with edges tangent to the cone, directions offset + 2 pi k / m"""
        if m < 1:
            raise EmptyFamily("a wedge family needs at least one wedge")
        wedges = []
        for k in range(m):
            angle = offset + 2 * np.pi * k / m
            shift = np.concatenate([[0.0], self.radius * np.array([np.cos(angle), np.sin(angle)])])
            wedge = Wedge23(angle=angle, a=self.center - shift)
            if not np.all(wedge.contains(self.extreme_points(), closure=True, tol=1e-9)):
                raise ValueError(f"wedge {k} does not contain the double cone")
            wedges.append(wedge)
        return wedges


@dataclass
class WedgeData:
    """Modular data of one wedge, in coordinates of its truncated spectral space"""
    wedge: Wedge23
    eigenvalues: np.ndarray
    spectral_basis: np.ndarray
    modular: ModularData
    subspace: RealSubspace


@dataclass
class LocalizationReport:
    kappa: float
    grid: str
    n_wedges: int
    cutoff: float
    score: float
    min_principal_angle: float
    pair_angles: Dict[str, float] = field(default_factory=dict)
    cyclicity_margins: List[float] = field(default_factory=list)
    wedges: List[Dict[str, Any]] = field(default_factory=list)

    def to_row(self) -> Dict[str, Any]:
        return {"kappa": self.kappa, "grid": self.grid, "n_wedges": self.n_wedges, "cutoff": self.cutoff,
                "score": self.score, "min_principal_angle": self.min_principal_angle}


# centered first-derivative stencils, offset -> weight (times 1/step)
STENCILS = {
    2: {1: 0.5, -1: -0.5},
    4: {1: 2.0 / 3.0, -1: -2.0 / 3.0, 2: -1.0 / 12.0, -2: 1.0 / 12.0},
}


def _centered_difference(n: int, step: float, periodic: bool, wrap: complex = 1.0,
                         order: int = 4) -> sparse.csr_matrix:
    """Antihermitian centered difference; periodic rows close the circle with f_{j+n} = conj(wrap) f_j

    Off the circle, entries that would leave [0, n) are dropped, which keeps
    the matrix antisymmetric at the cost of lower order in the edge rows.
    """
    if order not in STENCILS:
        raise ValueError(f"no centered stencil of order {order}")
    rows, cols, values = [], [], []
    j = np.arange(n)
    for offset, weight in STENCILS[order].items():
        target = j + offset
        factor = np.ones(n, dtype=complex)
        if periodic:
            factor[target >= n] = np.conj(wrap)
            factor[target < 0] = wrap
            target = target % n
            keep = np.ones(n, dtype=bool)
        else:
            keep = (target >= 0) & (target < n)
        rows.append(j[keep])
        cols.append(target[keep])
        values.append(weight * factor[keep])
    G = sparse.csr_matrix((np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return G / step


class BWNet:
    """Wedge subspaces of a massless 2+1 representation by the Bisognano-Wichmann prescription"""

    J_CANDIDATES = ("component-swap", "component-diagonal")

    def __init__(self, rep: MasslessRep23, cutoff: float = DEFAULT_CUTOFF, validation_tol: float = 1e-9,
                 stencil_order: int = 4):
        self.rep = rep
        self.cutoff = cutoff
        self.stencil_order = stencil_order
        self.validation_tol = validation_tol
        self._generator = None
        self._reflection = None
        self._spectral = None
        self._base = None
        self.j_candidate = None
        self.j_validation: Dict[str, Dict[str, float]] = {}

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def grid_label(self) -> str:
        return f"{self.rep.grid.n_r}x{self.rep.grid.n_theta}"

    @property
    def twist_unitary(self) -> np.ndarray:
        """Z = (1 + i Gamma) / (1 + i), diagonal; defined for Gamma = +-1"""
        if not self.rep.real_center:
            raise ValueError("the twist needs a real center character")
        return (1.0 + 1j * self.rep.twist) / (1.0 + 1j)

    # -- generators -------------------------------------------------------

    def _component_generator(self, kappa: float, z: complex) -> sparse.csr_matrix:
        grid = self.rep.grid
        order = self.stencil_order
        cos_t, sin_t = np.cos(grid.theta), np.sin(grid.theta)
        eye_r, eye_t = sparse.identity(grid.n_r), sparse.identity(grid.n_theta)
        G_u = sparse.kron(_centered_difference(grid.n_r, grid.du, periodic=False, order=order), eye_t)
        G_t = sparse.kron(eye_r, _centered_difference(grid.n_theta, grid.dtheta, periodic=True, wrap=z, order=order))
        flow = sparse.kron(eye_r, sparse.diags(cos_t)) @ G_u - sparse.kron(eye_r, sparse.diags(sin_t)) @ G_t
        skew = 0.5 * (flow - flow.conj().T)
        cocycle_rate = kappa * np.outer(np.exp(-grid.u), sin_t).ravel()
        return (sparse.diags(cocycle_rate) + 1j * skew).tocsr()

    def base_generator(self) -> sparse.csr_matrix:
        if self._generator is None:
            blocks = [self._component_generator(k, z) for k, z in self.rep.components]
            self._generator = sparse.block_diag(blocks, format="csr").astype(complex)
        return self._generator

    def transport_matrix(self, steps: int, a: Sequence[float]) -> sparse.csr_matrix:
        """U(a) U(R(2 pi steps / N_theta)) as a sparse permutation with phases"""
        labels = np.arange(1, self.dim + 1).astype(complex)
        moved = self.rep.grid_transform(steps, np.zeros(3), labels)
        source = np.rint(np.abs(moved)).astype(int) - 1
        values = moved / np.abs(moved) * self.rep.translation_phases(a)
        return sparse.csr_matrix((values, (np.arange(self.dim), source)), shape=(self.dim, self.dim))

    def _transport(self, W: Wedge23) -> Tuple[int, np.ndarray]:
        return W.grid_steps(self.rep.grid.n_theta), W.a

    def boost_generator(self, W: Optional[Wedge23] = None) -> sparse.csr_matrix:
        """K_W with U(Lambda_W(t)) ~ exp(i t K_W)"""
        K = self.base_generator()
        if W is None:
            return K
        T = self.transport_matrix(*self._transport(W))
        return (T @ K @ T.conj().T).tocsr()

    def hermiticity_deviation(self, W: Optional[Wedge23] = None) -> float:
        K = self.boost_generator(W)
        difference = K - K.conj().T
        return float(np.max(np.abs(difference.data))) if difference.nnz else 0.0

    def boost_residual(self, W: Wedge23, t: float, psi: np.ndarray) -> float:
        """exp(i t K_W) against the interpolated finite boost"""
        evolved = expm_multiply(1j * t * self.boost_generator(W), psi)
        exact = self.rep.apply(W.boost(t), psi)
        return float(np.linalg.norm(evolved - exact) / np.linalg.norm(psi))

    def delta_it(self, W: Wedge23, t: float, psi: np.ndarray) -> np.ndarray:
        """Delta_W^{it} psi = exp(-2 pi i t K_W) psi on the full grid space"""
        return expm_multiply(-2j * np.pi * t * self.boost_generator(W), psi)

    def bw_residual(self, W: Wedge23, t: float, psi: np.ndarray) -> float:
        """Delta_W^{it} against U(Lambda_W(-2 pi t))"""
        exact = self.rep.apply(W.boost(-2 * np.pi * t), psi)
        return float(np.linalg.norm(self.delta_it(W, t, psi) - exact) / np.linalg.norm(psi))

    # -- conjugation ------------------------------------------------------

    def _reflection_block(self, z: complex, steps: int = 0) -> sparse.csr_matrix:
        """(M psi)_{i,j} = w_j psi_{i,2s-j} for the reflection about grid angle s

        w_j is conj(z) when 2s - j wraps below zero, z when it wraps past N_theta,
        with z the center character of the source sector.
        """
        grid = self.rep.grid
        j = np.arange(grid.n_theta)
        source = 2 * steps - j
        weights = np.where(source < 0, np.conj(z), np.where(source >= grid.n_theta, z, 1.0))
        block = sparse.csr_matrix((weights, (j, source % grid.n_theta)), shape=(grid.n_theta, grid.n_theta))
        return sparse.kron(sparse.identity(grid.n_r), block, format="csr")

    def j_matrix(self, candidate: str, steps: int = 0) -> sparse.csr_matrix:
        """Matrix A of the antilinear J = A conj for the named construction"""
        blocks = [self._reflection_block(z, steps) for _, z in self.rep.components]
        if len(blocks) == 1 or candidate == "component-diagonal":
            return sparse.block_diag(blocks, format="csr").astype(complex)
        if candidate == "component-swap":
            zero = sparse.csr_matrix(blocks[0].shape)
            return sparse.bmat([[zero, blocks[1]], [blocks[0], zero]], format="csr").astype(complex)
        raise ValueError(f"unknown J construction {candidate!r}")

    def validate_j(self, A: sparse.csr_matrix, states: Sequence[np.ndarray]) -> Dict[str, float]:
        """J^2 = 1, J K J = -K and J U(g) J = U(j g j) on sample vectors"""
        K = self.base_generator()
        grid = self.rep.grid
        J = lambda v: A @ np.conj(v)
        translation = np.array([0.3, -0.2, 0.4])
        steps = max(1, grid.n_theta // 8)
        rotated = PoincareElement23.rotation(steps * grid.dtheta)
        mirrored = PoincareElement23.rotation(-steps * grid.dtheta)
        result = {"involution": 0.0, "generator": 0.0, "translation": 0.0, "rotation": 0.0}
        for psi in states:
            norm = np.linalg.norm(psi)
            result["involution"] = max(result["involution"], np.linalg.norm(J(J(psi)) - psi) / norm)
            kpsi = K @ psi
            scale = max(np.linalg.norm(kpsi), 1e-300)
            result["generator"] = max(result["generator"], np.linalg.norm(J(K @ J(psi)) + kpsi) / scale)
            lhs = J(self.rep.translation_phases(translation) * J(psi))
            rhs = self.rep.translation_phases(EDGE_REFLECTION @ translation) * psi
            result["translation"] = max(result["translation"], np.linalg.norm(lhs - rhs) / norm)
            lhs = J(self.rep.apply(rotated, J(psi)))
            rhs = self.rep.apply(mirrored, psi)
            result["rotation"] = max(result["rotation"], np.linalg.norm(lhs - rhs) / norm)
        return {key: float(value) for key, value in result.items()}

    def _choose_j(self) -> sparse.csr_matrix:
        if self.rep.kappa != 0.0 and not self.rep.doubled:
            raise NoPCT("kappa != 0 needs the doubled representation", {"kappa": self.rep.kappa})
        if not self.rep.real_center and not self.rep.doubled:
            raise NoPCT("a non-real center character needs the doubled representation",
                        {"z": str(self.rep.z_center)})
        rng = np.random.default_rng(1234)
        states = [rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim) for _ in range(3)]
        names = self.J_CANDIDATES if self.rep.doubled else ("reflection",)
        for name in names:
            A = self.j_matrix(name)
            checks = self.validate_j(A, states)
            self.j_validation[name] = checks
            if max(checks.values()) <= self.validation_tol:
                logger.info("edge conjugation: %s (max deviation %.2e)", name, max(checks.values()))
                self.j_candidate = name
                return A
            logger.info("edge conjugation %s rejected: %s", name, checks)
        raise NoPCT("no antiunitary edge conjugation passed validation", {"checks": self.j_validation})

    # -- modular data -----------------------------------------------------

    def _truncated_spectrum(self, K: sparse.csr_matrix) -> Tuple[np.ndarray, np.ndarray]:
        """Eigenpairs of a component-diagonal generator with |2 pi k| <= cutoff, block by block"""
        size = self.rep.grid.size
        values, columns = [], []
        for c in range(len(self.rep.components)):
            block = K[c * size:(c + 1) * size, c * size:(c + 1) * size].toarray()
            k, V = linalg.eigh(block)
            keep = np.abs(2 * np.pi * k) <= self.cutoff
            embedded = np.zeros((self.dim, int(keep.sum())), dtype=complex)
            embedded[c * size:(c + 1) * size] = V[:, keep]
            values.append(k[keep])
            columns.append(embedded)
        k = np.concatenate(values)
        if k.size < 0.1 * self.dim:
            raise CutoffTooAggressive("fewer than 10% of the modes survive the cutoff",
                                      {"kept": int(k.size), "dim": self.dim, "cutoff": self.cutoff})
        return k, np.hstack(columns)

    def _spectral_data(self) -> Tuple[np.ndarray, np.ndarray]:
        """Truncated eigenpairs of K_W0"""
        if self._spectral is None:
            self._spectral = self._truncated_spectrum(self.base_generator())
            logger.debug("cutoff %.1f keeps %d of %d modes", self.cutoff, self._spectral[0].size, self.dim)
        return self._spectral

    @staticmethod
    def _fixed_point_data(k: np.ndarray, V: np.ndarray, A: sparse.csr_matrix) -> Tuple[ModularData, np.ndarray]:
        """Modular data and coordinates of Fix(S) in the spectral basis V of Delta"""
        J_c = V.conj().T @ (A @ np.conj(V))
        modular = ModularData(J=AntiLinearMap(J_c), delta=np.diag(np.exp(-2 * np.pi * k)))
        # H = Delta^{-1/4} Fix(J)
        realified = AntiLinearMap(J_c).realified()
        values, vectors = linalg.eigh(0.5 * (realified + realified.T))
        fixed = vectors[:, values > 0.0]
        m = k.size
        coordinates = (fixed[:m] + 1j * fixed[m:]) * np.exp(np.pi * k / 2)[:, None]
        return modular, coordinates

    def _base_data(self) -> Tuple[ModularData, np.ndarray]:
        """Modular data and fixed-point coordinates of W0 in the spectral basis"""
        if self._base is None:
            k, V = self._spectral_data()
            self._base = self._fixed_point_data(k, V, self._choose_j())
        return self._base

    def edge_conjugation(self, W: Wedge23) -> sparse.csr_matrix:
        """Matrix of J_W = A conj built from the reflection through the edge of W

        The reflection about the grid angle of W sends theta to 2 angle - theta;
        translating the edge to a multiplies by exp(i a.p) exp(i a.p~), p~ the
        reflected momentum.
        """
        self._base_data()
        A = self.j_matrix(self.j_candidate, W.grid_steps(self.rep.grid.n_theta)).tocoo()
        phases = self.rep.translation_phases(W.a)
        return sparse.csr_matrix((A.data * phases[A.row] * phases[A.col], (A.row, A.col)), shape=A.shape)

    def direct_wedge_subspace(self, W: Wedge23) -> RealSubspace:
        """H(W) from the modular data of W itself, without transporting H(W0)"""
        k, V = self._truncated_spectrum(self.boost_generator(W))
        _, coordinates = self._fixed_point_data(k, V, self.edge_conjugation(W))
        return RealSubspace.from_vectors(V @ coordinates, TolerancePolicy.for_dim(self.dim))

    def wedge_data(self, W: Optional[Wedge23] = None) -> WedgeData:
        W = W or Wedge23()
        k, V = self._spectral_data()
        modular, coordinates = self._base_data()
        steps, a = self._transport(W)
        basis = self.rep.grid_transform(steps, a, V)
        tol = TolerancePolicy.for_dim(self.dim)
        subspace = RealSubspace.from_vectors(basis @ coordinates, tol)
        return WedgeData(wedge=W, eigenvalues=k, spectral_basis=basis, modular=modular, subspace=subspace)

    def modular_data(self, W: Optional[Wedge23] = None) -> ModularData:
        return self.wedge_data(W).modular

    def wedge_subspace(self, W: Optional[Wedge23] = None) -> RealSubspace:
        return self.wedge_data(W).subspace

    def transform(self, H: RealSubspace, angle: float, b: Sequence[float]) -> RealSubspace:
        """U(b, R(angle)) H for a grid angle"""
        steps = Wedge23(angle=angle).grid_steps(self.rep.grid.n_theta)
        return RealSubspace.from_vectors(self.rep.grid_transform(steps, b, H.basis), H.tol)

    def sample_state(self, u0: float = 0.0, theta0: float = np.pi / 2, width: float = 0.5) -> np.ndarray:
        bump = self.rep.grid.gaussian_bump(u0=u0, theta0=theta0, width=width)
        psi = np.tile(bump, len(self.rep.components))
        return psi / np.linalg.norm(psi)

    # -- net properties ---------------------------------------------------

    def fixed_point_residual(self, W: Optional[Wedge23] = None) -> float:
        """|S_W xi - xi| on the basis of H(W), in spectral coordinates"""
        data = self.wedge_data(W)
        x = data.spectral_basis.conj().T @ data.subspace.basis
        S = data.modular.S
        return float(np.max(np.abs(S.apply(x) - x)))

    def modular_invariance(self, W: Optional[Wedge23] = None, times: Sequence[float] = (0.3, 1.7)) -> float:
        data = self.wedge_data(W)
        x = data.spectral_basis.conj().T @ data.subspace.basis
        worst = 0.0
        for t in times:
            moved = data.spectral_basis @ (np.exp(-2j * np.pi * t * data.eigenvalues)[:, None] * x)
            worst = max(worst, subspace_distance(RealSubspace.from_vectors(moved, data.subspace.tol), data.subspace))
        return worst

    def covariance(self, W: Wedge23, angle: float, b: Sequence[float]) -> float:
        """U(g) H(W) against H(gW) built from the modular data of gW"""
        moved = self.transform(self.wedge_subspace(W), angle, b)
        return subspace_distance(moved, self.direct_wedge_subspace(W.moved(angle, b)))

    def twisted_duality(self, W: Optional[Wedge23] = None) -> float:
        """H(W') against Z H(W)' (complement inside the truncated space)"""
        data = self.wedge_data(W)
        complement = symplectic_complement(data.subspace, within=data.spectral_basis)
        twisted = RealSubspace.from_vectors(self.twist_unitary[:, None] * complement.basis, complement.tol)
        return subspace_distance(self.wedge_subspace(data.wedge.causal_complement()), twisted)

    def twisted_locality(self, W: Optional[Wedge23] = None) -> float:
        """How far Z H(W') sticks out of H(W)'"""
        data = self.wedge_data(W)
        complement = symplectic_complement(data.subspace, within=data.spectral_basis)
        opposite = self.wedge_subspace(data.wedge.causal_complement())
        twisted = RealSubspace.from_vectors(self.twist_unitary[:, None] * opposite.basis, opposite.tol)
        return containment_defect(complement, twisted)

    def isotony_residual(self, W: Optional[Wedge23] = None, depth: float = 0.5) -> float:
        """Containment defect of H(W + depth n) in H(W); non-zero under truncation"""
        W = W or Wedge23()
        inner = W.moved(0.0, np.concatenate([[0.0], depth * W.direction]))
        if not W.contains_wedge(inner):
            raise ValueError("shifted wedge is not inside the original one")
        return containment_defect(self.wedge_subspace(W), self.wedge_subspace(inner))

    def energy_positivity(self, direction: Sequence[float] = (1.0, 0.3, -0.2)) -> float:
        """Smallest eigenvalue of the translation generator along a future timelike direction"""
        e = np.asarray(direction, dtype=float)
        if e[0] <= np.linalg.norm(e[1:]):
            raise ValueError("direction must be future timelike")
        p = self.rep.grid.momenta
        return float(np.min(e[0] * p[..., 0] - e[1] * p[..., 1] - e[2] * p[..., 2]))

    def spectral_cyclicity_margin(self, W: Optional[Wedge23] = None) -> float:
        """Cyclicity margin of H(W) inside the truncated space"""
        data = self.wedge_data(W)
        x = data.spectral_basis.conj().T @ data.subspace.basis
        s = linalg.svdvals(x)
        return float(s[data.eigenvalues.size - 1]) if s.size >= data.eigenvalues.size else 0.0

    def property_report(self, W: Optional[Wedge23] = None, sample_time: float = 0.02) -> Dict[str, float]:
        W = W or Wedge23()
        data = self.wedge_data(W)
        psi = self.sample_state()
        report = {
            "hermiticity": self.hermiticity_deviation(W),
            "jdj_inverse": data.modular.jdj_deviation(),
            "modular_j_involution": data.modular.J.involution_deviation(),
            "fixed_points": self.fixed_point_residual(W),
            "modular_invariance": self.modular_invariance(W),
            "covariance": self.covariance(W, self.rep.grid.dtheta, [0.1, 0.2, -0.1]),
            "isotony": self.isotony_residual(W),
            "energy_positivity": self.energy_positivity(),
            "bw_residual": self.bw_residual(W, sample_time, psi),
            "cyclicity_margin": self.spectral_cyclicity_margin(W),
        }
        if self.rep.real_center:
            report["twisted_duality"] = self.twisted_duality(W)
            report["twisted_locality"] = self.twisted_locality(W)
        report.update({f"j_{key}": value for key, value in self.j_validation[self.j_candidate].items()})
        return report


@dataclass
class AbstractNet:
    """Finite family of standard subspaces given directly or through modular data"""
    subspaces: Dict[str, RealSubspace] = field(default_factory=dict)
    modular: Dict[str, ModularData] = field(default_factory=dict)

    def wedge_subspace(self, key: str) -> RealSubspace:
        if key not in self.subspaces:
            if key not in self.modular:
                raise KeyError(f"no wedge named {key!r}")
            self.subspaces[key] = subspace_from_tomita(self.modular[key])
        return self.subspaces[key]

    def modular_data(self, key: str) -> ModularData:
        if key not in self.modular:
            self.modular[key] = tomita_from_subspace(self.wedge_subspace(key))
        return self.modular[key]


def boost_generator(rep: MasslessRep23, W: Optional[Wedge23] = None) -> sparse.csr_matrix:
    return BWNet(rep).boost_generator(W)


def modular_data_bw(rep: MasslessRep23, W: Optional[Wedge23] = None, cutoff: float = DEFAULT_CUTOFF) -> ModularData:
    return BWNet(rep, cutoff=cutoff).modular_data(W)


def wedge_subspace(net: Union[BWNet, AbstractNet], W: Union[Wedge23, str, None] = None) -> RealSubspace:
    return net.wedge_subspace(W)


def family_score(subspaces: Sequence[RealSubspace]) -> float:
    """Largest eigenvalue of the mean of the real orthogonal projections"""
    if not subspaces:
        raise EmptyFamily("localization score of an empty family")
    bases = [H.real_basis for H in subspaces if H.dim > 0]
    if not bases:
        return 0.0
    m = len(subspaces)
    Q = np.hstack(bases)
    if min(Q.shape) <= 64:
        return float(min(1.0, linalg.svdvals(Q)[0] ** 2 / m))
    operator = LinearOperator((Q.shape[0], Q.shape[0]), matvec=lambda x: Q @ (Q.T @ x) / m, dtype=float)
    value = eigsh(operator, k=1, which="LA", return_eigenvectors=False)[0]
    return float(min(1.0, value))


def localization_score(net: Union[BWNet, AbstractNet], O: Union[DoubleCone23, Sequence[str]],
                       m: int = 4) -> LocalizationReport:
    if isinstance(net, BWNet):
        if not isinstance(O, DoubleCone23):
            raise TypeError("a BWNet is scored on a DoubleCone23")
        family = O.wedge_family(m)
        subspaces = [net.wedge_subspace(W) for W in family]
        margins = [net.spectral_cyclicity_margin(W) for W in family]
        kappa, grid, cutoff = net.rep.kappa, net.grid_label, net.cutoff
        descriptors = [W.describe() for W in family]
    else:
        family = list(O)
        if not family:
            raise EmptyFamily("localization score of an empty family")
        subspaces = [net.wedge_subspace(key) for key in family]
        margins = []
        kappa, grid, cutoff = 0.0, f"abstract-{subspaces[0].n}", float("nan")
        descriptors = [{"name": key} for key in family]
    score = family_score(subspaces)
    pair_angles = {}
    for i in range(len(subspaces)):
        for j in range(i + 1, len(subspaces)):
            angles = principal_angles(subspaces[i], subspaces[j])
            pair_angles[f"{i}-{j}"] = float(angles.min()) if angles.size else float("nan")
    finite = [value for value in pair_angles.values() if np.isfinite(value)]
    report = LocalizationReport(kappa=kappa, grid=grid, n_wedges=len(subspaces), cutoff=cutoff, score=score,
                                min_principal_angle=min(finite) if finite else float("nan"),
                                pair_angles=pair_angles, cyclicity_margins=margins, wedges=descriptors)
    logger.info("localization score %.4f (kappa=%s, grid=%s, %d wedges)", score, kappa, grid, len(subspaces))
    return report


def localization_trend(scores: Sequence[float]) -> Dict[str, float]:
    """Summary of scores ordered by increasing kappa

    violations counts consecutive pairs that fail to decrease strictly,
    calibration is the first score and contrast the last over the first.
    """
    if not scores:
        raise EmptyFamily("no localization scores to summarize")
    violations = sum(1 for a, b in zip(scores, scores[1:]) if not b < a)
    return {
        "score_trend": float(violations),
        "calibration": float(scores[0]),
        "contrast": float(scores[-1] / scores[0]) if scores[0] > 0 else float("nan"),
    }


def borchers_scaling_check(net: BWNet, W: Wedge23, x: Sequence[float], s_values: Sequence[float] = (0.2,),
                           t_values: Sequence[float] = (0.5,), states: Optional[Sequence[np.ndarray]] = None) -> float:
    """max |Delta^{is} U(tx) Delta^{-is} psi - U(e^{-2 pi s} t x) psi| / |psi|"""
    x = np.asarray(x, dtype=float)
    lightlike = abs(x[0] ** 2 - x[1] ** 2 - x[2] ** 2) <= 1e-12 * max(x[0] ** 2, 1.0)
    if x[0] <= 0 or not lightlike or np.linalg.norm(x[1:] / x[0] - W.direction) > 1e-9:
        raise NotEdgeDirection("translation is not along the future edge direction of the wedge",
                               {"x": x.tolist(), "edge": W.edge_direction.tolist()})
    states = states if states is not None else [net.sample_state()]
    K = net.boost_generator(W)
    worst = 0.0
    for psi in states:
        for s in s_values:
            for t in t_values:
                inner = expm_multiply(2j * np.pi * s * K, psi)
                lhs = expm_multiply(-2j * np.pi * s * K, net.rep.translation_phases(t * x) * inner)
                rhs = net.rep.translation_phases(np.exp(-2 * np.pi * s) * t * x) * psi
                worst = max(worst, float(np.linalg.norm(lhs - rhs) / np.linalg.norm(psi)))
    return worst


def counterexample_net(V: Callable[[float], np.ndarray], base: AbstractNet, key: str = "W0",
                       boosts: Sequence[float] = (0.5, 1.0, 2.0), seed: int = 0,
                       local_key: Optional[str] = None) -> Dict[str, Any]:
    """Net K (x) H(W) covariant under U_V = V (x) U but not Bisognano-Wichmann for U_V

    The base boost is U(Lambda(s)) = Delta^{-is/2pi} of the base wedge, and K is
    the real subspace of the multiplicity space. Cyclicity and separation of
    K (x) H(O) are compared with those of the base local subspace H(O), named
    by local_key (the wedge itself when omitted).
    """
    H = base.wedge_subspace(key)
    M = base.modular_data(key)
    k_dim = V(0.0).shape[0]
    K = RealSubspace.real_axis(k_dim)
    for s in boosts:
        if subspace_distance(K.transform(V(s)), K) > 1e-9:
            raise KNotInvariant("V does not preserve the real multiplicity subspace", {"boost": s})
    H_I = tensor(K, H)
    M_I = tomita_from_subspace(H_I)
    identity = np.eye(k_dim)
    expected = np.kron(identity, M.delta)
    modular = float(np.linalg.norm(M_I.delta - expected, 2) / max(1.0, np.linalg.norm(expected, 2)))

    def base_boost(s: float) -> np.ndarray:
        return M.delta_it(-s / (2 * np.pi))

    covariance_i, covariance_v, bw_internal, gaps = 0.0, 0.0, 0.0, {}
    for s in boosts:
        U_I = np.kron(identity, base_boost(s))
        U_V = np.kron(V(s), base_boost(s))
        covariance_i = max(covariance_i, subspace_distance(H_I.transform(U_I), H_I))
        covariance_v = max(covariance_v, subspace_distance(H_I.transform(U_V), H_I))
        modular_flow = M_I.delta_it(-s / (2 * np.pi))
        bw_internal = max(bw_internal, float(np.linalg.norm(modular_flow - U_I, 2)))
        gaps[s] = float(np.linalg.norm(modular_flow - U_V, 2))

    rng = np.random.default_rng(seed)
    H_family = [H, H.transform(M.delta_it(0.37))]
    K_family = [K, K.transform(np.linalg.qr(rng.standard_normal((k_dim, k_dim)))[0])]
    tensor_meet = verify_tensor_meet(H_family, K_family)

    # local subspace of the net, cyclic but possibly not separating
    H_O = base.wedge_subspace(local_key or key)
    transferred = tensor(K, H_O, require_standard=False)
    local, lifted = classify(H_O), classify(transferred)
    report = {
        "modular_operator": modular,
        "covariance_internal": covariance_i,
        "covariance_twisted": covariance_v,
        "bw_internal": bw_internal,
        "bw_gap": max(gaps.values()),
        "gaps": gaps,
        "tensor_meet": tensor_meet,
        "local_cyclic": local["cyclic"],
        "local_separating": local["separating"],
        "cyclicity_transfer": bool(not local["cyclic"] or lifted["cyclic"]),
        "separating_transfer": bool(local["separating"] == lifted["separating"]),
    }
    logger.info("counter-example: BW gap %.3f, internal BW residual %.2e", report["bw_gap"], bw_internal)
    return report
