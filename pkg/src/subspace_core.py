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
Standard subspace algebra for ModLoc

Real-linear subspaces of C^n are stored by a basis that is orthonormal for
Re<.,.>. Every real-linear question is answered on the realified space R^2n,
where xi = x + iy is the column [x; y] and Re<xi, eta> is the dot product.
The inner product is conjugate-linear in the first argument throughout.
"""

import json
import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from src.errors import AmbientMismatch, InvalidModularData, NotInvariant, NotStandard

logger = logging.getLogger(__name__)

DEFAULT_TIMES = (0.3, 1.7)


@dataclass
class TolerancePolicy:
    """Absolute tolerance and relative SVD rank threshold"""
    abs_tol: float
    rank_tol: float = 1e-8

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rank_tol <= 0:
            raise ValueError("tolerances must be positive")

    @classmethod
    def for_dim(cls, n: int) -> "TolerancePolicy":
        return cls(abs_tol=1e-10 * max(n, 1))

    def to_dict(self) -> Dict[str, float]:
        return {"abs_tol": self.abs_tol, "rank_tol": self.rank_tol}


def realify(vectors: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts: (n, d) complex -> (2n, d) real"""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    return np.vstack([vectors.real, vectors.imag])


def complexify(columns: np.ndarray) -> np.ndarray:
    """Inverse of realify"""
    n = columns.shape[0] // 2
    return columns[:n] + 1j * columns[n:]


def _orthonormal_columns(columns: np.ndarray, rank_tol: float) -> np.ndarray:
    if columns.shape[1] == 0:
        return np.zeros((columns.shape[0], 0))
    u, s, _ = linalg.svd(columns, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((columns.shape[0], 0))
    rank = int(np.sum(s > rank_tol * s[0]))
    return u[:, :rank]


@dataclass
class RealSubspace:
    """Closed real-linear subspace of C^n given by a Re-orthonormal basis (columns)"""
    basis: np.ndarray
    tol: Optional[TolerancePolicy] = None

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim == 1:
            basis = basis[:, None]
        self.basis = basis
        if self.tol is None:
            self.tol = TolerancePolicy.for_dim(basis.shape[0])

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def real_basis(self) -> np.ndarray:
        return realify(self.basis)

    @classmethod
    def from_vectors(cls, vectors: np.ndarray, tol: Optional[TolerancePolicy] = None) -> "RealSubspace":
        """Real span of the given columns, orthonormalized"""
        vectors = np.asarray(vectors, dtype=complex)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        tol = tol or TolerancePolicy.for_dim(vectors.shape[0])
        q = _orthonormal_columns(realify(vectors), tol.rank_tol)
        return cls(basis=complexify(q), tol=tol)

    @classmethod
    def from_real(cls, columns: np.ndarray, tol: Optional[TolerancePolicy] = None) -> "RealSubspace":
        tol = tol or TolerancePolicy.for_dim(columns.shape[0] // 2)
        return cls(basis=complexify(_orthonormal_columns(columns, tol.rank_tol)), tol=tol)

    @classmethod
    def zero(cls, n: int) -> "RealSubspace":
        return cls(basis=np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "RealSubspace":
        eye = np.eye(n, dtype=complex)
        return cls(basis=np.hstack([eye, 1j * eye]))

    @classmethod
    def real_axis(cls, n: int) -> "RealSubspace":
        """The conjugation-fixed subspace R^n"""
        return cls(basis=np.eye(n, dtype=complex))

    def projector(self) -> np.ndarray:
        q = self.real_basis
        return q @ q.T

    def gram_deviation(self) -> float:
        q = self.real_basis
        return float(np.max(np.abs(q.T @ q - np.eye(self.dim)))) if self.dim else 0.0

    def transform(self, operator: np.ndarray) -> "RealSubspace":
        """Image under a complex-linear operator"""
        return RealSubspace.from_vectors(operator @ self.basis, self.tol)

    def to_json(self) -> str:
        payload = {
            "ambient_dim": self.n,
            "basis": [[[float(z.real), float(z.imag)] for z in column] for column in self.basis.T],
            "tol": self.tol.to_dict(),
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "RealSubspace":
        payload = json.loads(text)
        n = int(payload["ambient_dim"])
        columns = [np.array([complex(re, im) for re, im in column]) for column in payload["basis"]]
        basis = np.array(columns, dtype=complex).T if columns else np.zeros((n, 0), dtype=complex)
        tol = payload.get("tol") or {}
        policy = TolerancePolicy(abs_tol=tol.get("abs_tol", 1e-10 * n), rank_tol=tol.get("rank_tol", 1e-8))
        return cls(basis=basis.reshape(n, -1), tol=policy)


@dataclass
class AntiLinearMap:
    """xi -> A conj(xi) in the fixed ambient basis"""
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        return self.matrix @ np.conj(vectors)

    def compose(self, other: "AntiLinearMap") -> np.ndarray:
        """self after other; the result is complex linear"""
        return self.matrix @ np.conj(other.matrix)

    def after_linear(self, operator: np.ndarray) -> "AntiLinearMap":
        return AntiLinearMap(self.matrix @ np.conj(operator))

    def before_linear(self, operator: np.ndarray) -> "AntiLinearMap":
        return AntiLinearMap(operator @ self.matrix)

    def adjoint(self) -> "AntiLinearMap":
        """Anti-linear adjoint: <T* phi, psi> = <T psi, phi>"""
        return AntiLinearMap(self.matrix.T)

    def realified(self) -> np.ndarray:
        a_re, a_im = self.matrix.real, self.matrix.imag
        return np.block([[a_re, a_im], [a_im, -a_re]])

    def involution_deviation(self) -> float:
        n = self.matrix.shape[0]
        return float(np.linalg.norm(self.compose(self) - np.eye(n), 2))


@dataclass
class ModularData:
    """Modular conjugation J and modular operator Delta"""
    J: AntiLinearMap
    delta: np.ndarray
    _spectrum: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=complex)
        self.delta = (delta + delta.conj().T) / 2

    @property
    def n(self) -> int:
        return self.delta.shape[0]

    def spectrum(self):
        if self._spectrum is None:
            values, vectors = linalg.eigh(self.delta)
            self._spectrum = (values, vectors)
        return self._spectrum

    def delta_power(self, exponent: complex) -> np.ndarray:
        values, vectors = self.spectrum()
        if np.any(values <= 0):
            raise InvalidModularData("modular operator is not positive", {"min_eigenvalue": float(values.min())})
        return (vectors * np.power(values.astype(complex), exponent)) @ vectors.conj().T

    def delta_it(self, t: float) -> np.ndarray:
        return self.delta_power(1j * t)

    @property
    def S(self) -> AntiLinearMap:
        return self.J.after_linear(self.delta_power(0.5))

    def jdj_deviation(self) -> float:
        """Relative size of J Delta J - Delta^-1"""
        jdj = self.J.matrix @ np.conj(self.delta) @ np.conj(self.J.matrix)
        inverse = self.delta_power(-1.0)
        scale = max(1.0, float(np.linalg.norm(inverse, 2)))
        return float(np.linalg.norm(jdj - inverse, 2)) / scale

    def involution_deviation(self) -> float:
        return max(self.J.involution_deviation(), self.S.involution_deviation())


def _check_ambient(*subspaces: RealSubspace) -> int:
    dims = {H.n for H in subspaces}
    if len(dims) != 1:
        raise AmbientMismatch("subspaces live in different ambient spaces", {"ambient_dims": sorted(dims)})
    return dims.pop()


def symplectic_complement(H: RealSubspace, within: Optional[np.ndarray] = None) -> RealSubspace:
    """H' = (iH)^perp; with `within`, the complement inside that complex subspace"""
    i_h = realify(1j * H.basis)
    if within is None:
        if H.dim == 0:
            return RealSubspace(basis=complexify(np.eye(2 * H.n)), tol=H.tol)
        return RealSubspace(basis=complexify(linalg.null_space(i_h.T)), tol=H.tol)
    cutoff = realify(np.hstack([within, 1j * within]))
    cutoff = _orthonormal_columns(cutoff, H.tol.rank_tol)
    if H.dim == 0:
        return RealSubspace(basis=complexify(cutoff), tol=H.tol)
    coefficients = linalg.null_space(i_h.T @ cutoff)
    return RealSubspace(basis=complexify(cutoff @ coefficients), tol=H.tol)


def complex_rank(H: RealSubspace) -> int:
    if H.dim == 0:
        return 0
    s = linalg.svdvals(H.basis)
    return int(np.sum(s > H.tol.rank_tol * s[0]))


def classify(H: RealSubspace) -> Dict[str, bool]:
    rank = complex_rank(H)
    cyclic = rank == H.n
    separating = rank == H.dim
    return {"cyclic": cyclic, "separating": separating, "standard": cyclic and separating}


def cyclicity_margin(H: RealSubspace) -> float:
    """Smallest singular value of the complex-span map C^d -> C^n"""
    if H.dim < H.n:
        return 0.0
    return float(linalg.svdvals(H.basis)[H.n - 1])


def tomita_from_subspace(H: RealSubspace) -> ModularData:
    kind = classify(H)
    if not kind["standard"]:
        raise NotStandard("subspace is not standard", kind)
    e = H.basis
    s_matrix = e @ np.conj(linalg.inv(e))
    s = AntiLinearMap(s_matrix)
    delta = s.adjoint().compose(s)
    data = ModularData(J=AntiLinearMap(np.eye(H.n)), delta=delta)
    data.J = s.after_linear(data.delta_power(-0.5))
    logger.debug("tomita data for n=%d, cond(Delta)=%.3e", H.n, np.linalg.cond(data.delta))
    return data


def subspace_from_tomita(M: ModularData, tol: Optional[TolerancePolicy] = None) -> RealSubspace:
    tol = tol or TolerancePolicy.for_dim(M.n)
    deviation = M.jdj_deviation()
    if deviation > max(tol.abs_tol, 1e-8):
        raise InvalidModularData("J Delta J differs from Delta^-1", {"deviation": deviation})
    if M.J.involution_deviation() > max(tol.abs_tol, 1e-8):
        raise InvalidModularData("J is not an involution", {"deviation": M.J.involution_deviation()})
    fixed = M.S.realified() - np.eye(2 * M.n)
    return RealSubspace(basis=complexify(linalg.null_space(fixed, rcond=tol.rank_tol)), tol=tol)


def principal_angles(H: RealSubspace, K: RealSubspace) -> np.ndarray:
    _check_ambient(H, K)
    if H.dim == 0 or K.dim == 0:
        return np.zeros(0)
    return np.sort(linalg.subspace_angles(H.real_basis, K.real_basis))


def subspace_distance(H: RealSubspace, K: RealSubspace) -> float:
    """Spectral norm of P_H - P_K (1 when the dimensions differ)"""
    _check_ambient(H, K)
    if H.dim != K.dim:
        return 1.0
    if H.dim == 0:
        return 0.0
    return float(np.sin(principal_angles(H, K).max()))


def containment_defect(H: RealSubspace, K: RealSubspace) -> float:
    """How far K sticks out of H: ||(1 - P_H) Q_K||"""
    _check_ambient(H, K)
    if K.dim == 0:
        return 0.0
    q_k = K.real_basis
    q_h = H.real_basis
    residual = q_k - q_h @ (q_h.T @ q_k)
    return float(np.linalg.norm(residual, 2))


def meet(H: RealSubspace, K: RealSubspace) -> RealSubspace:
    _check_ambient(H, K)
    if H.dim == 0 or K.dim == 0:
        return RealSubspace.zero(H.n)
    q_h, q_k = H.real_basis, K.real_basis
    u, s, _ = linalg.svd(q_h.T @ q_k)
    shared = int(np.sum(s > 1.0 - H.tol.rank_tol))
    return RealSubspace(basis=complexify(q_h @ u[:, :shared]), tol=H.tol)


def join(H: RealSubspace, K: RealSubspace) -> RealSubspace:
    _check_ambient(H, K)
    return RealSubspace.from_real(np.hstack([H.real_basis, K.real_basis]), H.tol)


def direct_sum(H: RealSubspace, K: RealSubspace) -> RealSubspace:
    basis = linalg.block_diag(H.basis, K.basis)
    return RealSubspace(basis=basis, tol=TolerancePolicy.for_dim(H.n + K.n))


def verify_duality(family: Sequence[RealSubspace]) -> float:
    """(meet of H_a)' against the join of the H_a'"""
    if not family:
        raise ValueError("duality needs at least one subspace")
    _check_ambient(*family)
    lhs = symplectic_complement(reduce(meet, family))
    rhs = reduce(join, [symplectic_complement(H) for H in family])
    return subspace_distance(lhs, rhs)


def _require_standard(subspaces: Iterable[Tuple[str, RealSubspace]]) -> None:
    for name, X in subspaces:
        kind = classify(X)
        if not kind["standard"]:
            raise NotStandard(f"tensor factor {name} is not standard", kind)


def tensor(H: RealSubspace, K: RealSubspace, require_standard: bool = True) -> RealSubspace:
    """Closed real span of xi (x) eta

    Meets of standard subspaces are usually not standard (often {0}); pass
    require_standard=False to form their product as a plain real span.
    """
    if require_standard:
        _require_standard((("H", H), ("K", K)))
    products = np.kron(H.basis, K.basis)
    return RealSubspace.from_vectors(products, TolerancePolicy.for_dim(H.n * K.n))


def tensor_identity_deviation(H: RealSubspace, K: RealSubspace) -> Dict[str, float]:
    """Tomita operator, dimension and fixed points of the tensor product"""
    T = tensor(H, K)
    s_h = tomita_from_subspace(H).S
    s_k = tomita_from_subspace(K).S
    product = AntiLinearMap(np.kron(s_h.matrix, s_k.matrix))
    fixed = linalg.null_space(product.realified() - np.eye(2 * T.n), rcond=T.tol.rank_tol)
    return {
        "tomita": float(np.linalg.norm(tomita_from_subspace(T).S.matrix - product.matrix, 2)),
        "dimension": float(abs(T.dim - H.n * K.n)),
        "fixed_points": subspace_distance(T, RealSubspace(basis=complexify(fixed), tol=T.tol)),
    }


def verify_commutant_tensor(H: RealSubspace, K: RealSubspace) -> float:
    """(H tensor K)' against H' tensor K'"""
    lhs = symplectic_complement(tensor(H, K))
    rhs = tensor(symplectic_complement(H), symplectic_complement(K))
    return subspace_distance(lhs, rhs)


def verify_tensor_meet(H_family: Sequence[RealSubspace], K_family: Sequence[RealSubspace]) -> float:
    """(meet H_a) tensor (meet K_b) against the meet of all H_a tensor K_b

    Family members must be standard; their meets may be anything, {0} included.
    """
    _require_standard([(f"H[{i}]", H) for i, H in enumerate(H_family)]
                      + [(f"K[{i}]", K) for i, K in enumerate(K_family)])
    lhs = tensor(reduce(meet, H_family), reduce(meet, K_family), require_standard=False)
    rhs = reduce(meet, [tensor(H, K) for H in H_family for K in K_family])
    return subspace_distance(lhs, rhs)


def kms_surrogate_check(H: RealSubspace, times: Iterable[float] = DEFAULT_TIMES) -> float:
    M = tomita_from_subspace(H)
    e = H.basis
    gram = e.conj().T @ e
    deviation = float(np.max(np.abs(e.conj().T @ M.delta @ e - gram.T)))
    for t in times:
        lhs = e.conj().T @ M.delta_power(1.0 - 1j * t) @ e
        rhs = e.conj().T @ M.delta_it(t) @ e
        deviation = max(deviation, float(np.max(np.abs(lhs - rhs.T))))
    return deviation


def _invariance_distance(H: RealSubspace, operator: np.ndarray) -> float:
    return subspace_distance(H.transform(operator), H)


def commuting_unitary_check(H: RealSubspace, U: np.ndarray) -> float:
    U = np.asarray(U, dtype=complex)
    drift = _invariance_distance(H, U)
    if drift > 1e3 * H.tol.rank_tol:
        raise NotInvariant("unitary does not preserve the subspace", {"distance": drift})
    M = tomita_from_subspace(H)
    delta_defect = np.linalg.norm(U @ M.delta - M.delta @ U, 2)
    j_defect = np.linalg.norm(U @ M.J.matrix - M.J.matrix @ np.conj(U), 2)
    return float(max(delta_defect, j_defect))


def borchers_degenerate_check(H: RealSubspace, generator: np.ndarray,
                              times: Iterable[float] = (0.25, 0.5, 1.0)) -> Dict[str, float]:
    """Positive generator with e^{itP} H inside H for t >= 0: in finite dimension P = 0"""
    generator = np.asarray(generator, dtype=complex)
    if np.min(linalg.eigvalsh(generator)) < -H.tol.abs_tol:
        raise ValueError("generator is not positive")
    invariance = 0.0
    commuting = 0.0
    for t in times:
        U = linalg.expm(1j * t * generator)
        invariance = max(invariance, containment_defect(H, H.transform(U)))
        if invariance > 1e3 * H.tol.rank_tol:
            raise NotInvariant("one-parameter group moves the subspace", {"t": t, "defect": invariance})
        commuting = max(commuting, commuting_unitary_check(H, U), commuting_unitary_check(H, U.conj().T))
    return {"invariance": invariance, "commuting": commuting,
            "generator_norm": float(np.linalg.norm(generator, 2))}


def invariant_subspace_check(H: RealSubspace, K: RealSubspace,
                             times: Iterable[float] = DEFAULT_TIMES) -> Dict[str, Any]:
    """K inside H and invariant under the modular group of H"""
    contained = containment_defect(H, K)
    if contained > 1e3 * H.tol.rank_tol:
        raise NotInvariant("K is not contained in H", {"defect": contained})
    M = tomita_from_subspace(H)
    invariance = max(_invariance_distance(K, M.delta_it(t)) for t in times)
    if invariance > 1e3 * H.tol.rank_tol:
        raise NotInvariant("K is not invariant under the modular group", {"distance": invariance})
    report: Dict[str, Any] = {"contained": contained, "invariance": invariance, "cyclic": classify(K)["cyclic"]}
    if report["cyclic"]:
        report["equality"] = subspace_distance(H, K)
        return report
    span = linalg.orth(K.basis, rcond=K.tol.rank_tol)
    local = RealSubspace.from_vectors(span.conj().T @ K.basis)
    restricted = span.conj().T @ M.delta @ span
    report["restriction"] = float(np.linalg.norm(tomita_from_subspace(local).delta - restricted, 2))
    return report


def verify_standard_identities(H: RealSubspace, times: Iterable[float] = DEFAULT_TIMES) -> Dict[str, float]:
    """Full identity battery for one standard subspace"""
    times = tuple(times)
    M = tomita_from_subspace(H)
    complement = symplectic_complement(H)
    complement_kind = classify(complement)
    return {
        "s_fixes_h": float(np.max(np.abs(M.S.apply(H.basis) - H.basis))),
        "s_complement_adjoint": float(np.linalg.norm(
            tomita_from_subspace(complement).S.matrix - M.S.adjoint().matrix, 2)),
        "jdj_inverse": M.jdj_deviation(),
        "involution": M.involution_deviation(),
        "j_maps_to_complement": subspace_distance(RealSubspace.from_vectors(M.J.apply(H.basis)), complement),
        "modular_invariance": max(_invariance_distance(H, M.delta_it(t)) for t in times),
        "complement_standard": 0.0 if complement_kind["standard"] else 1.0,
        "bicomplement": subspace_distance(symplectic_complement(complement), H),
        "kms": kms_surrogate_check(H, times),
    }


def random_standard_subspace(n: int, rng: np.random.Generator) -> RealSubspace:
    vectors = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return RealSubspace.from_vectors(vectors)


def random_real_subspace(n: int, d: int, rng: np.random.Generator) -> RealSubspace:
    return RealSubspace.from_real(rng.standard_normal((2 * n, d)))


def rotated_basis(H: RealSubspace, rng: np.random.Generator) -> RealSubspace:
    """Same subspace, different orthonormal basis"""
    q, _ = np.linalg.qr(rng.standard_normal((H.dim, H.dim)))
    return RealSubspace(basis=H.basis @ q, tol=H.tol)

