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
Finite fermionic second quantization

The Fock space over C^n is (C^2)^{(x)n} with the Jordan-Wigner creators
    a*_j = Z (x) ... (x) Z (x) s+ (x) 1 (x) ... (x) 1,   s+ = [[0, 0], [1, 0]]
mode 0 being the most significant tensor factor. The basis vector with index
sum_{i in I} 2^(n-1-i) is a*_{i1} ... a*_{ik} Omega for i1 < ... < ik, so the
Fock basis is the wedge basis e_{i1} ^ ... ^ e_{ik} without extra signs.

Algebras are finite-dimensional *-algebras of D x D matrices, stored as an
orthonormal basis of row-major vectorizations in C^(D^2).
"""

import itertools
import json
import logging
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy import linalg

from src.errors import DimensionOverflow, NotCyclicSeparating
from src.subspace_core import (
    AntiLinearMap, ModularData, RealSubspace, TolerancePolicy, classify, join, meet,
    subspace_distance, symplectic_complement, tomita_from_subspace,
)

logger = logging.getLogger(__name__)

DEFAULT_DIM_MAX = 256
SECQUANT_MAX_MODES = 5
RANK_TOL = 1e-9

_SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def number_grading(n: int) -> np.ndarray:
    """Particle number of every Fock basis vector"""
    indices = np.arange(2 ** n)
    return np.array([bin(int(i)).count("1") for i in indices])


def parity(n: int) -> np.ndarray:
    """Gamma = (-1)^N"""
    return np.diag((-1.0) ** number_grading(n)).astype(complex)


def _subset_index(subset: Sequence[int], n: int) -> int:
    return sum(2 ** (n - 1 - i) for i in subset)


@dataclass
class TwistOperator:
    """Z = 1 on even and -i on odd particle number"""
    n: int

    @property
    def diagonal(self) -> np.ndarray:
        return np.where(number_grading(self.n) % 2 == 0, 1.0 + 0j, -1j)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)

    def conjugate(self, X: np.ndarray) -> np.ndarray:
        """Z X Z*"""
        z = self.diagonal
        return z[:, None] * X * np.conj(z)[None, :]

    def formula_deviation(self) -> float:
        """Distance to (1 + i Gamma) / (1 + i)"""
        gamma = parity(self.n)
        return float(np.max(np.abs(self.matrix - (np.eye(2 ** self.n) + 1j * gamma) / (1 + 1j))))

    def unitarity_deviation(self) -> float:
        Z = self.matrix
        return float(np.max(np.abs(Z @ Z.conj().T - np.eye(2 ** self.n))))


def z_twist(n: int) -> TwistOperator:
    return TwistOperator(n=n)


def z_conjugation_deviation(X: np.ndarray, n: int) -> float:
    """Z X Z* against i P_even X P_odd - i P_odd X P_even for odd X"""
    even = number_grading(n) % 2 == 0
    p_even = np.diag(even.astype(complex))
    p_odd = np.eye(2 ** n) - p_even
    oddness = float(np.max(np.abs(p_even @ X @ p_even + p_odd @ X @ p_odd)))
    expected = 1j * p_even @ X @ p_odd - 1j * p_odd @ X @ p_even
    return max(oddness, float(np.max(np.abs(z_twist(n).conjugate(X) - expected))))


@dataclass
class FermiFock:
    """Fermionic Fock space over C^n in the Jordan-Wigner realization"""
    n: int
    dim_max: int = DEFAULT_DIM_MAX
    _creators: List[np.ndarray] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("mode count must be non-negative")
        if 2 ** self.n > self.dim_max:
            raise DimensionOverflow("Fock space too large", {"n": self.n, "dim": 2 ** self.n, "dim_max": self.dim_max})
        eye = np.eye(2, dtype=complex)
        for j in range(self.n):
            factors = [_SIGMA_Z] * j + [_SIGMA_PLUS] + [eye] * (self.n - j - 1)
            self._creators.append(reduce(np.kron, factors))

    @property
    def dim(self) -> int:
        return 2 ** self.n

    @property
    def vacuum(self) -> np.ndarray:
        omega = np.zeros(self.dim, dtype=complex)
        omega[0] = 1.0
        return omega

    def creation(self, j: int) -> np.ndarray:
        return self._creators[j]

    def annihilation(self, j: int) -> np.ndarray:
        return self._creators[j].conj().T

    def _check(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=complex).reshape(-1)
        if xi.shape[0] != self.n:
            raise ValueError(f"one-particle vector has length {xi.shape[0]}, expected {self.n}")
        return xi

    def a_dag(self, xi: np.ndarray) -> np.ndarray:
        xi = self._check(xi)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for j, c in enumerate(xi):
            if c != 0:
                out += c * self._creators[j]
        return out

    def a(self, xi: np.ndarray) -> np.ndarray:
        """Annihilator, anti-linear in xi"""
        return self.a_dag(xi).conj().T

    def field(self, xi: np.ndarray) -> np.ndarray:
        """Psi(xi) = a(xi) + a*(xi)"""
        creator = self.a_dag(xi)
        return creator + creator.conj().T

    def number_operator(self) -> np.ndarray:
        return np.diag(number_grading(self.n).astype(complex))

    def car_residual(self, xi: np.ndarray, eta: np.ndarray) -> float:
        """|| {Psi(xi), Psi(eta)} - 2 Re<xi, eta> ||"""
        f, g = self.field(xi), self.field(eta)
        expected = 2 * np.real(np.vdot(self._check(xi), self._check(eta))) * np.eye(self.dim)
        return float(np.linalg.norm(f @ g + g @ f - expected, 2))

    def canonical_residual(self) -> float:
        """Largest CAR defect over the creators"""
        worst = 0.0
        eye = np.eye(self.dim)
        for i in range(self.n):
            for j in range(self.n):
                ci, cj = self._creators[i], self._creators[j]
                worst = max(worst, float(np.max(np.abs(ci @ cj + cj @ ci))))
                anti = ci.conj().T @ cj + cj @ ci.conj().T
                worst = max(worst, float(np.max(np.abs(anti - (i == j) * eye))))
        return worst


def fermi_field(xi: np.ndarray, fock: Optional[FermiFock] = None) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    fock = fock or FermiFock(n=xi.shape[0])
    return fock.field(xi)


# Second quantization

def gamma_minus(T: Union[np.ndarray, AntiLinearMap]) -> Union[np.ndarray, AntiLinearMap]:
    """Lift to the antisymmetric Fock space: entry (J, I) is det T[J, I]

    An AntiLinearMap A conj lifts to Gamma(A) conj, since the wedge basis is
    conjugation fixed.
    """
    if isinstance(T, AntiLinearMap):
        return AntiLinearMap(gamma_minus(T.matrix))
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    out[0, 0] = 1.0
    for k in range(1, n + 1):
        subsets = list(itertools.combinations(range(n), k))
        index = [_subset_index(s, n) for s in subsets]
        for row, rows in zip(index, subsets):
            for col, cols in zip(index, subsets):
                out[row, col] = np.linalg.det(T[np.ix_(rows, cols)])
    return out


def symmetric_isometry(n: int, k: int) -> np.ndarray:
    """Orthonormal basis of Sym^k(C^n) inside the k-fold tensor power"""
    if k == 0:
        return np.ones((1, 1), dtype=complex)
    multisets = list(itertools.combinations_with_replacement(range(n), k))
    out = np.zeros((n ** k, len(multisets)), dtype=complex)
    for column, m in enumerate(multisets):
        for perm in set(itertools.permutations(m)):
            out[np.ravel_multi_index(perm, (n,) * k), column] = 1.0
        out[:, column] /= np.linalg.norm(out[:, column])
    return out


def gamma_plus(T: Union[np.ndarray, AntiLinearMap], max_particles: int) -> Union[np.ndarray, AntiLinearMap]:
    """Bose lift on the symmetric Fock space truncated at max_particles"""
    if isinstance(T, AntiLinearMap):
        return AntiLinearMap(gamma_plus(T.matrix, max_particles))
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    blocks = []
    for k in range(max_particles + 1):
        V = symmetric_isometry(n, k)
        power = reduce(np.kron, [T] * k, np.ones((1, 1), dtype=complex))
        blocks.append(V.conj().T @ power @ V)
    return linalg.block_diag(*blocks)


def functoriality_deviation(S: np.ndarray, T: np.ndarray, lift=gamma_minus, **kwargs) -> float:
    """|| Gamma(S T) - Gamma(S) Gamma(T) ||"""
    return float(np.max(np.abs(lift(S @ T, **kwargs) - lift(S, **kwargs) @ lift(T, **kwargs))))


def unitarity_deviation(U: np.ndarray, lift=gamma_minus, **kwargs) -> float:
    G = lift(U, **kwargs)
    return float(np.max(np.abs(G @ G.conj().T - np.eye(G.shape[0]))))


# Matrix *-algebras

def _vec(X: np.ndarray) -> np.ndarray:
    return np.asarray(X, dtype=complex).reshape(-1)


def _extend_basis(Q: np.ndarray, candidates: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal directions of `candidates` outside span(Q)"""
    if candidates.shape[1] == 0:
        return candidates
    residual = candidates - Q @ (Q.conj().T @ candidates) if Q.shape[1] else candidates
    scale = max(1.0, float(np.max(np.linalg.norm(candidates, axis=0))))
    u, s, _ = linalg.svd(residual, full_matrices=False)
    keep = int(np.sum(s > tol * scale))
    return u[:, :keep]


@dataclass
class MatrixStarAlgebra:
    """*-algebra of D x D matrices with a Hilbert-Schmidt orthonormal basis"""
    D: int
    vectors: np.ndarray
    generators: List[np.ndarray] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def matrices(self) -> List[np.ndarray]:
        return [self.vectors[:, k].reshape(self.D, self.D) for k in range(self.dim)]

    def contains(self, X: np.ndarray) -> float:
        """Distance of X from the algebra, relative to ||X||"""
        v = _vec(X)
        norm = np.linalg.norm(v)
        if norm == 0:
            return 0.0
        return float(np.linalg.norm(v - self.vectors @ (self.vectors.conj().T @ v)) / norm)

    def identity_defect(self) -> float:
        return self.contains(np.eye(self.D))

    def closure_deviation(self, samples: int = 64, seed: int = 0) -> float:
        """Products and adjoints of sampled elements stay in the algebra"""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            c = rng.standard_normal((2, self.dim)) + 1j * rng.standard_normal((2, self.dim))
            x = (self.vectors @ c[0]).reshape(self.D, self.D)
            y = (self.vectors @ c[1]).reshape(self.D, self.D)
            worst = max(worst, self.contains(x @ y), self.contains(x.conj().T))
        return worst

    def is_trivial(self) -> bool:
        return self.dim == 1 and self.identity_defect() < 1e-9


def _check_generators(generators: Sequence[np.ndarray], D: Optional[int], dim_max: int) -> int:
    sizes = {np.asarray(g).shape for g in generators}
    if D is not None:
        sizes.add((D, D))
    if len(sizes) != 1 or any(len(s) != 2 or s[0] != s[1] for s in sizes):
        raise ValueError(f"generators must be square matrices of one size, got {sorted(sizes)}")
    D = sizes.pop()[0]
    if D > dim_max:
        raise DimensionOverflow("ambient dimension above the configured maximum", {"D": D, "dim_max": dim_max})
    return D


def generate_algebra(generators: Sequence[np.ndarray], D: Optional[int] = None,
                     dim_max: int = DEFAULT_DIM_MAX, tol: float = RANK_TOL) -> MatrixStarAlgebra:
    """Unital *-algebra generated by the given matrices

    The span of 1 and the generators (with adjoints) is closed under left
    multiplication by generators until the dimension stops growing.
    """
    D = _check_generators(generators, D, dim_max)
    gens = [np.asarray(g, dtype=complex) for g in generators]
    gens = gens + [g.conj().T for g in gens]
    Q = _extend_basis(np.zeros((D * D, 0), dtype=complex), _vec(np.eye(D))[:, None], tol)
    frontier = _extend_basis(Q, np.column_stack([_vec(g) for g in gens]) if gens else np.zeros((D * D, 0)), tol)
    Q = np.hstack([Q, frontier])
    rounds = 0
    while frontier.shape[1] and gens:
        products = [_vec(g @ frontier[:, k].reshape(D, D)) for g in gens for k in range(frontier.shape[1])]
        frontier = _extend_basis(Q, np.column_stack(products), tol)
        Q = np.hstack([Q, frontier])
        rounds += 1
    logger.debug("generated algebra of dimension %d in M_%d after %d rounds", Q.shape[1], D, rounds)
    return MatrixStarAlgebra(D=D, vectors=Q, generators=list(generators))


def commutant(A: MatrixStarAlgebra, tol: float = RANK_TOL) -> MatrixStarAlgebra:
    """Null space of X -> [X, g] over generators and their adjoints"""
    D = A.D
    gens = A.generators or A.matrices()
    eye = np.eye(D)
    gram = np.zeros((D * D, D * D), dtype=complex)
    for g in gens:
        for h in (g, g.conj().T):
            # row-major vec(h X - X h) = (h (x) 1 - 1 (x) h^T) vec(X)
            M = np.kron(h, eye) - np.kron(eye, h.T)
            gram += M.conj().T @ M
    values, vectors = linalg.eigh(gram)
    scale = max(1.0, float(values[-1]))
    Q = vectors[:, values <= tol * scale]
    logger.debug("commutant of a %d-dimensional algebra has dimension %d", A.dim, Q.shape[1])
    return MatrixStarAlgebra(D=D, vectors=Q, generators=[Q[:, k].reshape(D, D) for k in range(Q.shape[1])])


def algebra_meet(A: MatrixStarAlgebra, B: MatrixStarAlgebra, tol: float = 1e-8) -> MatrixStarAlgebra:
    u, s, _ = linalg.svd(A.vectors.conj().T @ B.vectors)
    shared = int(np.sum(s > 1.0 - tol))
    Q = A.vectors @ u[:, :shared]
    return MatrixStarAlgebra(D=A.D, vectors=Q, generators=[Q[:, k].reshape(A.D, A.D) for k in range(shared)])


def algebra_join(A: MatrixStarAlgebra, B: MatrixStarAlgebra) -> MatrixStarAlgebra:
    return generate_algebra(list(A.generators) + list(B.generators), D=A.D, dim_max=max(A.D, DEFAULT_DIM_MAX))


def algebra_deviation(A: MatrixStarAlgebra, B: MatrixStarAlgebra) -> float:
    """Mutual span containment; a dimension mismatch counts as 1"""
    if A.D != B.D:
        raise ValueError("algebras act on different spaces")

    def defect(P, Q):
        if Q.shape[1] == 0:
            return 0.0
        return float(np.linalg.norm(Q - P @ (P.conj().T @ Q), 2))

    deviation = max(defect(A.vectors, B.vectors), defect(B.vectors, A.vectors))
    if A.dim != B.dim:
        deviation = max(deviation, 1.0)
    return deviation


def bicommutant_deviation(A: MatrixStarAlgebra) -> float:
    return algebra_deviation(commutant(commutant(A)), A)


# Field algebras and vacuum modular data

def field_algebra(H: RealSubspace, fock: Optional[FermiFock] = None) -> MatrixStarAlgebra:
    """R_-(H), generated by Psi(xi) for xi in H"""
    fock = fock or FermiFock(n=H.n)
    generators = [fock.field(xi) for xi in H.basis.T]
    return generate_algebra(generators, D=fock.dim, dim_max=fock.dim_max)


def vacuum_tomita(A: MatrixStarAlgebra, omega: np.ndarray, tol: float = RANK_TOL) -> ModularData:
    """Polar decomposition of S: x Omega -> x* Omega"""
    omega = np.asarray(omega, dtype=complex).reshape(-1)
    elements = A.matrices()
    if A.dim != A.D:
        raise NotCyclicSeparating("algebra dimension differs from the space dimension",
                                  {"algebra_dim": A.dim, "space_dim": A.D})
    V = np.column_stack([x @ omega for x in elements])
    W = np.column_stack([x.conj().T @ omega for x in elements])
    s = linalg.svdvals(V)
    if s[-1] <= tol * max(s[0], 1.0):
        raise NotCyclicSeparating("vector is not cyclic and separating", {"smallest_singular_value": float(s[-1])})
    s_matrix = W @ np.conj(linalg.inv(V))
    # S = U P conj = U conj(conj(P)) so Delta^1/2 = conj(P)
    u, p = linalg.polar(s_matrix, side="right")
    half = np.conj(p)
    logger.debug("vacuum tomita data for D=%d, cond(V)=%.3e", A.D, s[0] / s[-1])
    return ModularData(J=AntiLinearMap(u), delta=half @ half)


def self_adjoint_vacuum_span(A: MatrixStarAlgebra, omega: np.ndarray) -> RealSubspace:
    """Real span of x Omega over self-adjoint x in A"""
    omega = np.asarray(omega, dtype=complex).reshape(-1)
    vectors = []
    for x in A.matrices():
        vectors.append((x + x.conj().T) @ omega / 2)
        vectors.append((x - x.conj().T) @ omega / 2j)
    return RealSubspace.from_vectors(np.column_stack(vectors))


# Decomposition of a general closed real subspace

@dataclass
class SubspaceDecomposition:
    """C^n = H_{-1} + H_0 + H_1 with H_1 = H cap iH and H_{-1} = (H + iH)^perp"""
    H: RealSubspace
    complex_part: np.ndarray
    null_part: np.ndarray
    standard_space: np.ndarray
    standard_part: RealSubspace

    def dims(self) -> Dict[str, int]:
        return {
            "complex_part": self.complex_part.shape[1],
            "null_part": self.null_part.shape[1],
            "standard_space": self.standard_space.shape[1],
        }

    def standard_in_space(self) -> bool:
        if self.standard_space.shape[1] == 0:
            return True
        coordinates = RealSubspace(basis=self.standard_space.conj().T @ self.standard_part.basis)
        return classify(coordinates)["standard"]

    def reconstruction_deviation(self) -> float:
        h1 = RealSubspace(basis=np.hstack([self.complex_part, 1j * self.complex_part]))
        return subspace_distance(join(h1, self.standard_part), self.H)


def _complex_orth(vectors: np.ndarray) -> np.ndarray:
    if vectors.shape[1] == 0:
        return vectors.astype(complex)
    return linalg.orth(vectors, rcond=RANK_TOL)


def _complement_in(span: np.ndarray, part: np.ndarray) -> np.ndarray:
    if part.shape[1] == 0 or span.shape[1] == 0:
        return span
    coefficients = linalg.null_space(part.conj().T @ span, rcond=RANK_TOL)
    return span @ coefficients


def decompose_subspace(H: RealSubspace) -> SubspaceDecomposition:
    n = H.n
    complex_part = _complex_orth(meet(H, RealSubspace(basis=1j * H.basis, tol=H.tol)).basis)
    span = _complex_orth(H.basis)
    null_part = _complement_in(np.eye(n, dtype=complex), span)
    standard_space = _complement_in(span, complex_part)
    standard_part = meet(H, RealSubspace(basis=np.hstack([standard_space, 1j * standard_space]), tol=H.tol))
    return SubspaceDecomposition(H=H, complex_part=complex_part, null_part=null_part,
                                 standard_space=standard_space, standard_part=standard_part)


# Second quantization identities

@dataclass
class SecquantReport:
    n: int
    seed: Optional[int]
    deviations: Dict[str, float]
    decomposition: Dict[str, int]

    def max_deviation(self) -> float:
        return max(self.deviations.values()) if self.deviations else 0.0

    def to_records(self) -> List[Dict[str, Any]]:
        return [{"identity": name, "deviation": float(value), "n": self.n, "seed": self.seed}
                for name, value in self.deviations.items()]

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_records(), indent=2))
        return path


def _relative(X: np.ndarray, Y: np.ndarray) -> float:
    return float(np.linalg.norm(X - Y, 2) / max(1.0, np.linalg.norm(Y, 2)))


def _twisted_field_algebra(H: RealSubspace, fock: FermiFock) -> MatrixStarAlgebra:
    """Z R_-(i H') Z*"""
    twist = z_twist(fock.n)
    i_complement = RealSubspace(basis=1j * symplectic_complement(H).basis, tol=H.tol)
    generators = [twist.conjugate(fock.field(xi)) for xi in i_complement.basis.T]
    return generate_algebra(generators, D=fock.dim, dim_max=fock.dim_max)


def reversed_product_deviation(S_minus: AntiLinearMap, H: RealSubspace, fock: FermiFock,
                               rng: np.random.Generator, samples: int = 6, max_length: int = 3) -> float:
    """S Psi(xi_1)...Psi(xi_k) Omega = Psi(xi_k)...Psi(xi_1) Omega for xi_j in H"""
    worst = 0.0
    for _ in range(samples):
        length = int(rng.integers(1, max_length + 1))
        fields = [fock.field(H.basis @ rng.standard_normal(H.dim)) for _ in range(length)]
        forward = reduce(np.matmul, fields) @ fock.vacuum
        backward = reduce(np.matmul, fields[::-1]) @ fock.vacuum
        scale = max(1.0, float(np.linalg.norm(backward)))
        worst = max(worst, float(np.linalg.norm(S_minus.apply(forward) - backward)) / scale)
    return worst


def verify_secquant(H: RealSubspace, families: Optional[Sequence[Sequence[RealSubspace]]] = None,
                    seed: Optional[int] = None, max_modes: int = SECQUANT_MAX_MODES) -> SecquantReport:
    """Second quantization identities for R_-(H) with the vacuum

    Standard H: S, J, Delta of the vacuum against Z Gamma(i S_H), Z Gamma(i J_H),
    Gamma(Delta_H), plus the reversed-product law. Every H: the twisted
    commutant R_-(H)' = Z R_-(iH') Z* and the bicommutant. Families: the join
    and meet laws.
    """
    if H.n > max_modes:
        raise DimensionOverflow("too many modes for the second quantization checks",
                                {"n": H.n, "max_modes": max_modes})
    fock = FermiFock(n=H.n)
    twist = z_twist(H.n).matrix
    algebra = field_algebra(H, fock)
    deviations: Dict[str, float] = {}

    if classify(H)["standard"]:
        one_particle = tomita_from_subspace(H)
        vacuum = vacuum_tomita(algebra, fock.vacuum)
        S_formula = AntiLinearMap(twist @ gamma_minus(1j * one_particle.S.matrix))
        J_formula = twist @ gamma_minus(1j * one_particle.J.matrix)
        deviations["tomita_S"] = _relative(vacuum.S.matrix, S_formula.matrix)
        deviations["tomita_J"] = _relative(vacuum.J.matrix, J_formula)
        deviations["tomita_delta"] = _relative(vacuum.delta, gamma_minus(one_particle.delta))
        rng = np.random.default_rng(seed)
        deviations["reversed_product"] = reversed_product_deviation(S_formula, H, fock, rng)

    deviations["twisted_commutant"] = algebra_deviation(commutant(algebra), _twisted_field_algebra(H, fock))
    deviations["bicommutant"] = bicommutant_deviation(algebra)

    decomposition = decompose_subspace(H)
    deviations["decomposition"] = decomposition.reconstruction_deviation()

    for family in families or ():
        if not family:
            continue
        algebras = [field_algebra(K, fock) for K in family]
        joined = field_algebra(reduce(join, family), fock)
        met = field_algebra(reduce(meet, family), fock)
        deviations["join"] = max(deviations.get("join", 0.0),
                                 algebra_deviation(joined, reduce(algebra_join, algebras)))
        deviations["meet"] = max(deviations.get("meet", 0.0),
                                 algebra_deviation(met, reduce(algebra_meet, algebras)))

    report = SecquantReport(n=H.n, seed=seed, deviations=deviations, decomposition=decomposition.dims())
    logger.info("second quantization checks for n=%d: max deviation %.3e", H.n, report.max_deviation())
    return report
