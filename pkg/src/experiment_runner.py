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
Named experiments, the check registry, run manifests and replay

Each experiment measures a set of named deviations; the registry turns them
into pass/fail checks. Gating checks decide the exit status, advisory checks
are reported and logged but never fail a run.
"""

import hashlib
import logging
import math
import operator
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import scipy
from scipy import linalg

from src import __version__
from src.errors import CheckFailed, Mismatch, ModlocError
from src.experiment_config import ExperimentConfig, worker_count
from src.fock import (
    FermiFock, algebra_meet, field_algebra, functoriality_deviation, gamma_plus,
    unitarity_deviation, verify_secquant, z_conjugation_deviation, z_twist,
)
from src.huygens import (
    GaussianSource, SpacetimeGrid23, hilbert_time, huygens_refinement, kernel_hilbert_deviation,
    leakage_converged, synth_commutator_solution,
)
from src.modular_net import (
    AbstractNet, BWNet, DoubleCone23, Wedge23, borchers_scaling_check, counterexample_net, localization_score,
    localization_trend,
)
from src.report_writer import canonical_json_bytes, load_manifest, write_run
from src.subspace_core import (
    RealSubspace, join, meet, random_standard_subspace, tensor_identity_deviation, verify_commutant_tensor,
    verify_duality, verify_standard_identities, verify_tensor_meet,
)
from src.wigner_reps import (
    CircleRepVk, ConeGrid23, MasslessRep23, PoincareElement23, boost_x1, cocycle_frame, dilated_cocycle_deviation,
    dilation_covariance_residual, e2_boost_conjugation, group_law_residual, rotation, tau, unitarity_residual,
    vk_rescale_deviation, vk_translation_spectrum,
)

logger = logging.getLogger(__name__)

COMPARATORS = {"<=": operator.le, "<": operator.lt, ">=": operator.ge, ">": operator.gt}


@dataclass(frozen=True)
class CheckSpec:
    """A named property; threshold None means the configured tolerance"""
    name: str
    experiment: str
    description: str
    threshold: Optional[float] = None
    comparator: str = "<="
    gating: bool = True


def _specs(experiment: str, rows: Sequence[tuple]) -> List[CheckSpec]:
    return [CheckSpec(name, experiment, *rest) for name, *rest in rows]


CHECKS: Dict[str, CheckSpec] = {spec.name: spec for spec in (
    _specs("lattice-verify", [
        ("lattice.s_fixes_h", "S xi = xi for xi in H"),
        ("lattice.s_complement_adjoint", "S of the symplectic complement is the adjoint of S"),
        ("lattice.jdj_inverse", "J Delta J = Delta^-1"),
        ("lattice.involution", "J and S are involutions"),
        ("lattice.j_maps_to_complement", "J H = H'"),
        ("lattice.modular_invariance", "Delta^it H = H"),
        ("lattice.complement_standard", "H' is standard"),
        ("lattice.bicomplement", "H'' = H"),
        ("lattice.kms", "<eta, Delta xi> = <xi, eta> on H"),
        ("lattice.duality", "(meet of H_a)' = join of H_a'"),
        ("lattice.tensor_tomita", "S of H (x) K is S_H (x) S_K"),
        ("lattice.tensor_dimension", "dim of H (x) K is the product of the ambient dimensions"),
        ("lattice.tensor_fixed_points", "H (x) K is the fixed space of S_H (x) S_K"),
        ("lattice.commutant_tensor", "(H (x) K)' = H' (x) K'"),
        ("lattice.tensor_meet", "meets commute with tensor products"),
    ])
    + _specs("little-group", [
        ("little.boost_conjugation", "alpha(t) tau(z) alpha(-t) = tau(e^t z)", 1e-12),
        ("little.spectrum_endpoints", "translation spectrum of V_kappa reaches +-kappa on aligned grids", 1e-12),
        ("little.rotation_covariance", "R T(z) R^-1 = T(e^{i phi} z)", 1e-12),
        ("little.full_turn", "a full turn acts by exp(2 pi i epsilon)", 1e-12),
        ("little.kappa_rescale", "dilation pulls V_kappa back to V_{e^-t kappa}", 1e-9),
        ("little.dilated_cocycle", "kappa c(A, e^t p) = (e^-t kappa) c(A, p)", 1e-9),
    ])
    + _specs("induce", [
        ("induce.translation_unitarity", "translations act unitarily", 1e-12),
        ("induce.grid_rotation", "grid rotations are exact", 1e-12),
        ("induce.full_turn", "U(2 pi) is the center character", 1e-12),
        ("induce.dilation_covariance", "D(t) U(a) D(-t) = U(e^t a) for kappa = 0", 1e-12),
        ("induce.group_law_refinement", "interpolated group law residual at least halves under refinement", 0.5),
        ("induce.unitarity_refinement", "interpolated unitarity residual halves under refinement", 0.5, "<=", False),
    ])
    + _specs("localize", [
        ("localize.score_trend", "localization score strictly decreasing in kappa (violations)", 0.0, "<="),
        ("localize.calibration", "score at the smallest kappa", 0.9, ">="),
        ("localize.contrast", "score at the largest kappa over score at the smallest", 0.5, "<"),
        ("bw.hermiticity", "boost generator is self-adjoint", 1e-10),
        ("bw.jdj_inverse", "J Delta J = Delta^-1 for the wedge", 1e-8),
        ("bw.modular_j_involution", "wedge J is an involution", 1e-8),
        ("bw.fixed_points", "S_W fixes H(W)", 1e-6),
        ("bw.modular_invariance", "Delta^it H(W) = H(W)", 1e-6),
        ("bw.covariance", "U(g) H(W) = H(gW) on grid motions", 1e-8),
        ("bw.twisted_duality", "H(W') = Z H(W)'", 1e-6),
        ("bw.twisted_locality", "H(W') inside Z H(W)'", 1e-6),
        ("bw.energy_positivity", "translation spectrum in the forward cone", 0.0, ">="),
        ("bw.isotony", "isotony residual for nested wedges", 1.0, "<="),
        ("bw.bw_residual", "Delta^it against the interpolated boost", 1e-2),
        ("bw.cyclicity_margin", "H(W) is cyclic in the truncated space", 0.0, ">"),
        ("bw.j_involution", "edge conjugation squares to one", 1e-9),
        ("bw.j_generator", "edge conjugation reverses the boost generator", 1e-9),
        ("bw.j_translation", "edge conjugation reflects translations", 1e-9),
        ("bw.j_rotation", "edge conjugation reverses rotations", 1e-9),
        ("bw.borchers", "Delta^is U(x) Delta^-is = U(e^{-2 pi s} x) along the edge", 1e-2),
        ("bw.borchers_refinement", "Borchers residual ratio under refinement", 0.5),
    ])
    + _specs("huygens", [
        ("huygens.hilbert_squares", "time Hilbert transform squares to -1", 1e-10),
        ("huygens.kernel_identity", "h(Delta_0) = Delta_0' on the regulated kernel", 5e-2),
        ("huygens.kernel_refinement", "kernel identity improves with a longer window", 1.0, "<"),
        ("huygens.hilbert_identity", "h(Im F) = Re F on the periodic window", 1e-10),
        ("huygens.source_support", "source supported in the double cone", 1e-6),
        ("huygens.spacelike_refinement", "spacelike leakage of Im F at least halves", 0.5),
        ("huygens.timelike_converged", "timelike leakage of h(Im F) halves or sits at the floor", 1.0, ">="),
        ("huygens.wave_residual", "box F on sample points", 1e-2, "<=", False),
    ])
    + _specs("fock-verify", [
        ("fock.car", "canonical anticommutation relations", 1e-12),
        ("fock.twist", "Z = (1 + i Gamma)/(1 + i), unitary, twists odd operators", 1e-12),
        ("fock.functoriality", "Gamma(S T) = Gamma(S) Gamma(T)", 1e-12),
        ("fock.unitarity", "Gamma preserves unitarity", 1e-12),
        ("fock.bose_functoriality", "symmetric lift is functorial and unitary", 1e-12),
        ("fock.tomita_S", "vacuum S = Z Gamma(i S_H)", 1e-10),
        ("fock.tomita_J", "vacuum J = Z Gamma(i J_H)", 1e-10),
        ("fock.tomita_delta", "vacuum Delta = Gamma(Delta_H)", 1e-10),
        ("fock.reversed_product", "S reverses products of fields on the vacuum", 1e-10),
        ("fock.twisted_commutant", "R(H)' = Z R(iH') Z*", 1e-10),
        ("fock.bicommutant", "R(H)'' = R(H)", 1e-10),
        ("fock.decomposition", "H splits into its complex and standard parts", 1e-10),
        ("fock.join", "R(H1 + H2) = R(H1) v R(H2)", 1e-10),
        ("fock.meet", "R(H1 cap H2) = R(H1) cap R(H2)", 1e-10),
        ("fock.empty_subspace", "R({0}) = C 1", 1.0, ">="),
        ("fock.trivial_meet", "trivial subspace meet gives the trivial algebra", 1.0, ">="),
    ])
    + _specs("counterexample", [
        ("counter.modular_operator", "Delta of K (x) H(W) is 1 (x) Delta", 1e-6),
        ("counter.covariance_internal", "K (x) H(W) covariant for U_I", 1e-8),
        ("counter.covariance_twisted", "K (x) H(W) covariant for U_V", 1e-8),
        ("counter.bw_internal", "U_I satisfies the modular boost relation", 1e-8),
        ("counter.bw_gap", "U_V violates the modular boost relation", 0.1, ">="),
        ("counter.tensor_meet", "meets commute with tensoring by K", 1e-6),
        ("counter.cyclicity_transfer", "K (x) H(O) cyclic when H(O) is", 1.0, ">="),
        ("counter.separating_transfer", "K (x) H(O) separating exactly when H(O) is", 1.0, ">="),
    ])
)}


def checks_for(experiment: str) -> List[CheckSpec]:
    return [spec for spec in CHECKS.values() if spec.experiment == experiment]


@dataclass
class CheckResult:
    name: str
    experiment: str
    value: float
    threshold: float
    comparator: str
    passed: bool
    gating: bool
    description: str


def evaluate_check(spec: CheckSpec, value: Optional[float], tol: float) -> CheckResult:
    threshold = spec.threshold if spec.threshold is not None else tol
    value = float("nan") if value is None else float(value)
    passed = bool(math.isfinite(value) and COMPARATORS[spec.comparator](value, threshold))
    return CheckResult(name=spec.name, experiment=spec.experiment, value=value, threshold=threshold,
                       comparator=spec.comparator, passed=passed, gating=spec.gating, description=spec.description)


@dataclass
class ExperimentResult:
    measurements: Dict[str, float]
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    documents: Dict[str, Any] = field(default_factory=dict)


@dataclass
class WorkerPool:
    """Bounded thread pool; results come back in input order"""
    workers: int = 1

    def map(self, fn: Callable, items: Sequence) -> List:
        items = list(items)
        if self.workers <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=min(self.workers, len(items))) as executor:
            return list(executor.map(fn, items))


def _child_rngs(seed: int, count: int) -> List[np.random.Generator]:
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


def _cone_grid(config: ExperimentConfig) -> ConeGrid23:
    return ConeGrid23(n_r=config.grid + 1, n_theta=config.grid)


def _max_by_key(rows: Sequence[Dict[str, Any]], keys: Sequence[str]) -> Dict[str, float]:
    return {key: max(float(row[key]) for row in rows if key in row) for key in keys
            if any(key in row for row in rows)}


# -- experiments -----------------------------------------------------------

def run_lattice_verify(config: ExperimentConfig, pool: WorkerPool) -> ExperimentResult:
    n, policy = config.dim, config.tolerance_policy()

    def sample(item):
        index, rng = item
        H = RealSubspace(basis=random_standard_subspace(n, rng).basis, tol=policy)
        row: Dict[str, Any] = {"sample": index, **verify_standard_identities(H)}
        row["duality"] = verify_duality([H] + [random_standard_subspace(n, rng) for _ in range(2)])
        A, B = random_standard_subspace(2, rng), random_standard_subspace(max(1, n // 2), rng)
        row.update({f"tensor_{key}": value for key, value in tensor_identity_deviation(A, B).items()})
        row["commutant_tensor"] = verify_commutant_tensor(A, B)
        row["tensor_meet"] = verify_tensor_meet([A, random_standard_subspace(2, rng)],
                                                [B, random_standard_subspace(B.n, rng)])
        return row

    rows = pool.map(sample, enumerate(_child_rngs(config.seed, config.families)))
    keys = [spec.name.split(".", 1)[1] for spec in checks_for("lattice-verify")]
    measurements = {f"lattice.{key}": value for key, value in _max_by_key(rows, keys).items()}
    return ExperimentResult(measurements=measurements, tables={"lattice-verify": pd.DataFrame(rows)})


def run_little_group(config: ExperimentConfig, pool: WorkerPool) -> ExperimentResult:
    N = config.grid
    rng = np.random.default_rng(config.seed)
    samples = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    conjugation = max(float(np.max(np.abs(e2_boost_conjugation(t, z).matrix - tau(np.exp(t) * z).matrix)))
                      for t in (-0.7, 0.3, 1.1) for z in samples)
    cone = _cone_grid(config)

    def measure(kappa):
        rep = CircleRepVk(kappa=kappa, N=N)
        spectrum = vk_translation_spectrum(rep)
        turns = max(float(np.max(np.abs(CircleRepVk(kappa=kappa, N=N, epsilon=eps).rotation(N)
                                        - np.exp(2j * np.pi * eps) * np.eye(N)))) for eps in (0.0, 0.5))
        return {
            "kappa": kappa,
            "spectrum_min": spectrum[0],
            "spectrum_max": spectrum[-1],
            "spectrum_endpoints": abs(spectrum[0] + kappa) + abs(spectrum[-1] - kappa),
            "rotation_covariance": max(rep.covariance_deviation(k, z) for k in (1, N // 4, N + 3) for z in samples[:2]),
            "full_turn": turns,
            "kappa_rescale": vk_rescale_deviation(rep, 0.7, samples),
            "dilated_cocycle": dilated_cocycle_deviation(MasslessRep23(grid=cone, kappa=kappa), 3, boost_x1(0.5)),
        }

    kappas = [k for k in config.kappa if k > 0] or [1.0]
    rows = pool.map(measure, kappas)
    measurements = {"little.boost_conjugation": conjugation}
    for key in ("spectrum_endpoints", "rotation_covariance", "full_turn", "kappa_rescale", "dilated_cocycle"):
        measurements[f"little.{key}"] = max(row[key] for row in rows)
    frame = cocycle_frame(MasslessRep23(grid=cone, kappa=kappas[0]), {"boost": boost_x1(0.5), "rot": rotation(0.3)})
    return ExperimentResult(measurements=measurements,
                            tables={"little-group": pd.DataFrame(rows), "plot_cocycles": frame})


def run_induce(config: ExperimentConfig, pool: WorkerPool) -> ExperimentResult:
    grid = _cone_grid(config)
    fine_grid = grid.refined(2)
    g1 = PoincareElement23(a=[0.1, 0.2, 0.0], A=boost_x1(0.3))
    g2 = PoincareElement23(a=[0.0, 0.1, -0.1], A=rotation(0.37))
    psi = grid.gaussian_bump(u0=0.0, theta0=np.pi / 2, width=0.3)

    def measure(kappa):
        rep = MasslessRep23(grid=grid, kappa=kappa)
        step = 5 * grid.dtheta
        back = rep.apply(PoincareElement23.rotation(-step), rep.apply(PoincareElement23.rotation(step), psi))

        def turn_deviation(z):
            twisted = MasslessRep23(grid=grid, kappa=kappa, z_center=z)
            return float(np.max(np.abs(twisted.apply(PoincareElement23.rotation(2 * np.pi), psi) - z * psi)))

        row = {
            "kappa": kappa,
            "translation_unitarity": unitarity_residual(rep, PoincareElement23.translation([0.4, 0.1, -0.3]), psi),
            "grid_rotation": float(np.max(np.abs(back - psi))),
            "full_turn": max(turn_deviation(z) for z in (-1.0, np.exp(0.7j))),
        }
        for label, g in (("coarse", grid), ("fine", fine_grid)):
            sampled = MasslessRep23(grid=g, kappa=kappa)
            bump = g.gaussian_bump(u0=0.0, theta0=np.pi / 2, width=0.5)
            row[f"group_law_{label}"] = group_law_residual(sampled, g1, g2, bump)
            row[f"unitarity_{label}"] = unitarity_residual(sampled, g1, bump)
        return row

    rows = pool.map(measure, config.kappa)

    def ratio(row, key):
        return row[f"{key}_fine"] / row[f"{key}_coarse"] if row[f"{key}_coarse"] > 0 else 0.0

    measurements = {f"induce.{key}": max(row[key] for row in rows)
                    for key in ("translation_unitarity", "grid_rotation", "full_turn")}
    measurements["induce.dilation_covariance"] = dilation_covariance_residual(
        MasslessRep23(grid=grid, kappa=0.0), 2, [0.3, 0.1, 0.2], psi)
    measurements["induce.group_law_refinement"] = max(ratio(row, "group_law") for row in rows)
    measurements["induce.unitarity_refinement"] = max(ratio(row, "unitarity") for row in rows)
    plot = pd.DataFrame([{"kappa": row["kappa"], "grid": label, "group_law": row[f"group_law_{label}"],
                          "unitarity": row[f"unitarity_{label}"]} for row in rows for label in ("coarse", "fine")])
    return ExperimentResult(measurements=measurements, tables={"induce": pd.DataFrame(rows), "plot_group_law": plot})


def run_localize(config: ExperimentConfig, pool: WorkerPool) -> ExperimentResult:
    grid = _cone_grid(config)
    region = DoubleCone23(radius=1.0)

    def score(kappa):
        net = BWNet(MasslessRep23(grid=grid, kappa=kappa, doubled=kappa != 0.0), cutoff=config.cutoff)
        return localization_score(net, region, m=config.wedges)

    reports = pool.map(score, config.kappa)
    ordered = sorted(reports, key=lambda r: r.kappa)
    trend = localization_trend([r.score for r in ordered])
    measurements = {f"localize.{key}": value for key, value in trend.items()}

    base = BWNet(MasslessRep23(grid=grid), cutoff=config.cutoff)
    measurements.update({f"bw.{key}": value for key, value in base.property_report().items()})
    W = Wedge23()
    coarse = borchers_scaling_check(base, W, W.edge_direction)
    fine = borchers_scaling_check(BWNet(MasslessRep23(grid=grid.refined(2)), cutoff=config.cutoff), W,
                                  W.edge_direction)
    measurements["bw.borchers"] = coarse
    measurements["bw.borchers_refinement"] = fine / coarse if coarse > 0 else 0.0

    angles = pd.DataFrame([{"kappa": r.kappa, "pair": pair, "angle": angle}
                           for r in reports for pair, angle in r.pair_angles.items()])
    return ExperimentResult(measurements=measurements,
                            tables={"localize": pd.DataFrame([r.to_row() for r in reports]), "plot_pair_angles": angles})


def run_huygens(config: ExperimentConfig, pool: WorkerPool) -> ExperimentResult:
    st = SpacetimeGrid23(n_x=config.grid)
    region = DoubleCone23(radius=1.0)
    source = GaussianSource()
    rng = np.random.default_rng(config.seed)
    t = st.times
    signal = sum(rng.standard_normal() * np.cos(2 * np.pi * k * t / st.t_period + rng.uniform(0, 2 * np.pi))
                 for k in range(1, st.n_t // 4))
    squares = float(np.max(np.abs(hilbert_time(hilbert_time(signal)) + signal)) / np.max(np.abs(signal)))
    kernels = pool.map(kernel_hilbert_deviation, [st, st.refined()])
    reports, ratios = huygens_refinement(source, region, st)

    measurements = {
        "huygens.hilbert_squares": squares,
        "huygens.kernel_identity": kernels[0],
        "huygens.kernel_refinement": kernels[1] / kernels[0] if kernels[0] > 0 else 0.0,
        "huygens.hilbert_identity": max(r.hilbert_identity for r in reports),
        "huygens.source_support": source.support_leakage(region),
        "huygens.spacelike_refinement": ratios["leakage_spacelike"],
        "huygens.timelike_converged": float(leakage_converged(reports[0].leakage_timelike,
                                                              reports[1].leakage_timelike)),
        "huygens.wave_residual": reports[0].residual_wave,
    }
    levels = pd.DataFrame([{"level": level, "n_x": r.grid["n_x"], "n_t": r.grid["n_t"],
                            "t_period": r.grid["t_period"],
                            "leakage_spacelike": r.leakage_spacelike, "leakage_timelike": r.leakage_timelike,
                            "residual_wave": r.residual_wave, "hilbert_identity": r.hilbert_identity}
                           for level, r in enumerate(reports)])
    F = synth_commutator_solution(source, region, st.cone_grid())
    trace = []
    for label, x1 in (("center", 0.0), ("spacelike", 2.5)):
        values = F.evaluate(np.column_stack([t, np.full_like(t, x1), np.zeros_like(t)]))
        trace.append(pd.DataFrame({"point": label, "t": t, "im": values.imag, "re": values.real,
                                   "hilbert_im": hilbert_time(values.imag)}))
    return ExperimentResult(measurements=measurements,
                            tables={"huygens": levels, "plot_huygens_trace": pd.concat(trace, ignore_index=True)},
                            documents={"support": reports[-1].to_dict()})


def _seeded_standard(n: int, rng: np.random.Generator) -> RealSubspace:
    """Real span of a perturbed identity; standard with a mild modular operator"""
    noise = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return RealSubspace.from_vectors(np.eye(n) + 0.3 * noise / np.sqrt(n))


def run_fock_verify(config: ExperimentConfig, pool: WorkerPool) -> ExperimentResult:
    n = config.dim
    fock = FermiFock(n=n)
    rng = np.random.default_rng(config.seed)

    def complex_matrix(size):
        return (rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))) / np.sqrt(2 * size)

    xi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    eta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    twist = z_twist(n)
    unitary = linalg.qr(complex_matrix(n))[0]
    small = min(n, 2)
    measurements = {
        "fock.car": max(fock.canonical_residual(), fock.car_residual(xi, eta)),
        "fock.twist": max(twist.formula_deviation(), twist.unitarity_deviation(),
                          z_conjugation_deviation(fock.field(xi), n)),
        "fock.functoriality": functoriality_deviation(complex_matrix(n), complex_matrix(n)),
        "fock.unitarity": unitarity_deviation(unitary),
        "fock.bose_functoriality": max(
            functoriality_deviation(complex_matrix(small), complex_matrix(small), lift=gamma_plus, max_particles=3),
            unitarity_deviation(linalg.qr(complex_matrix(small))[0], lift=gamma_plus, max_particles=3)),
        "fock.empty_subspace": float(field_algebra(RealSubspace.zero(n), fock).is_trivial()),
    }

    def sample(item):
        index, child = item
        seed = int(child.integers(2 ** 32))
        H1, H2 = _seeded_standard(n, child), _seeded_standard(n, child)
        report = verify_secquant(H1, families=[[H1, H2]], seed=seed)
        if meet(H1, H2).dim == 0:
            trivial = algebra_meet(field_algebra(H1, fock), field_algebra(H2, fock)).is_trivial()
        else:
            trivial = True
        return report, float(trivial)

    samples = pool.map(sample, enumerate(_child_rngs(config.seed, config.families)))
    reports = [verify_secquant(RealSubspace.real_axis(n), seed=config.seed)] + [report for report, _ in samples]
    keys = ("tomita_S", "tomita_J", "tomita_delta", "reversed_product", "twisted_commutant", "bicommutant",
            "decomposition", "join", "meet")
    rows = [{"sample": index, **report.deviations} for index, report in enumerate(reports)]
    measurements.update({f"fock.{key}": value for key, value in _max_by_key(rows, keys).items()})
    measurements["fock.trivial_meet"] = min(trivial for _, trivial in samples)
    records = [record for report in reports for record in report.to_records()]
    return ExperimentResult(measurements=measurements, tables={"fock-verify": pd.DataFrame(rows)},
                            documents={"fock": records})


def run_counterexample(config: ExperimentConfig, pool: WorkerPool) -> ExperimentResult:
    rng = np.random.default_rng(config.seed)
    H = random_standard_subspace(config.dim, rng)
    # H plus i xi for one xi in H: cyclic, not separating
    local = join(H, RealSubspace.from_vectors(1j * H.basis[:, :1], H.tol))
    base = AbstractNet(subspaces={"W0": H, "O": local})

    def V(s: float) -> np.ndarray:
        return np.array([[np.cos(s), -np.sin(s)], [np.sin(s), np.cos(s)]])

    report = counterexample_net(V, base, key="W0", seed=config.seed, local_key="O")
    measurements = {f"counter.{key}": float(report[key]) for key in (
        "modular_operator", "covariance_internal", "covariance_twisted", "bw_internal", "bw_gap", "tensor_meet",
        "cyclicity_transfer", "separating_transfer")}
    gaps = pd.DataFrame([{"boost": s, "gap": gap} for s, gap in report["gaps"].items()])
    return ExperimentResult(measurements=measurements, tables={"counterexample": gaps})


EXPERIMENT_RUNNERS: Dict[str, Callable[[ExperimentConfig, WorkerPool], ExperimentResult]] = {
    "lattice-verify": run_lattice_verify,
    "little-group": run_little_group,
    "induce": run_induce,
    "localize": run_localize,
    "huygens": run_huygens,
    "fock-verify": run_fock_verify,
    "counterexample": run_counterexample,
}


# -- manifests -------------------------------------------------------------

def platform_info() -> Dict[str, str]:
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "pandas": pd.__version__, "machine": platform.machine()}


@dataclass
class RunManifest:
    experiment: str
    config: Dict[str, Any]
    config_hash: str
    version: str
    platform: Dict[str, str]
    checks: List[Dict[str, Any]] = field(default_factory=list)
    runtimes: Dict[str, float] = field(default_factory=dict)
    status: str = "passed"
    error: Optional[Dict[str, Any]] = None
    run_dir: Optional[str] = None
    replay_of: Optional[str] = None
    comparison: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    def failed_checks(self, gating_only: bool = True) -> List[Dict[str, Any]]:
        return [c for c in self.checks if not c["passed"] and (c["gating"] or not gating_only)]

    def manifest_hash(self) -> str:
        """Hash of config, version and check outcomes; runtimes and paths excluded"""
        payload = {
            "config_hash": self.config_hash,
            "version": self.version,
            "checks": [[c["name"], c["value"], c["passed"]] for c in self.checks],
            "error": self.error,
        }
        return hashlib.sha256(canonical_json_bytes(payload)).hexdigest()

    def to_dict(self) -> Dict[str, Any]:
        return dict(asdict(self), manifest_hash=self.manifest_hash())

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "RunManifest":
        names = set(cls.__dataclass_fields__)
        return cls(**{key: value for key, value in payload.items() if key in names})


def run(config: ExperimentConfig, strict: bool = False, write: bool = True,
        pool: Optional[WorkerPool] = None) -> RunManifest:
    """Execute one experiment, evaluate its checks and write the run directory

    With strict=True a failed gating check raises CheckFailed after the
    manifest has been written.
    """
    config.validate()
    pool = pool or WorkerPool(workers=worker_count())
    manifest = RunManifest(experiment=config.experiment, config=config.to_dict(), config_hash=config.config_hash(),
                           version=__version__, platform=platform_info())
    logger.info("running %s (seed=%d, config %s)", config.experiment, config.seed, manifest.config_hash[:12])
    start = time.perf_counter()
    result = ExperimentResult(measurements={})
    try:
        result = EXPERIMENT_RUNNERS[config.experiment](config, pool)
    except ModlocError as e:
        manifest.status = "error"
        manifest.error = e.to_dict()
        manifest.runtimes["experiment"] = time.perf_counter() - start
        if write:
            write_run(manifest.to_dict(), config.out_dir)
        raise
    manifest.runtimes["experiment"] = time.perf_counter() - start

    for spec in checks_for(config.experiment):
        check = evaluate_check(spec, result.measurements.get(spec.name), config.abs_tol)
        manifest.checks.append(asdict(check))
        if not check.passed and not check.gating:
            logger.warning("advisory check %s: %.3e vs %s %.3e", check.name, check.value, check.comparator,
                           check.threshold)
    unregistered = sorted(set(result.measurements) - {spec.name for spec in checks_for(config.experiment)})
    if unregistered:
        logger.debug("measurements without a registered check: %s", unregistered)
    if manifest.failed_checks():
        manifest.status = "failed"

    if write:
        files = write_run(manifest.to_dict(), config.out_dir, result.tables, result.documents)
        manifest.run_dir = str(files["manifest"].parent)
    logger.info("%s finished with status %s in %.2fs", config.experiment, manifest.status,
                manifest.runtimes["experiment"])
    if strict and not manifest.passed:
        raise CheckFailed(f"{len(manifest.failed_checks())} gating check(s) failed",
                          {"failed": [c["name"] for c in manifest.failed_checks()], "run_dir": manifest.run_dir})
    return manifest


def _same_value(a: Any, b: Any) -> bool:
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    return a == b


def replay(source: Union[str, Dict[str, Any]], overrides: Optional[Dict[str, Any]] = None,
           out_dir: Optional[str] = None, pool: Optional[WorkerPool] = None) -> RunManifest:
    """Re-run a stored manifest and require bit-identical check values

    A different artifact version only warns and records the comparison.
    """
    stored = RunManifest.from_dict(load_manifest(source) if not isinstance(source, dict) else source)
    config = ExperimentConfig.from_dict(stored.config).updated(**(overrides or {}))
    if out_dir is not None:
        config.out_dir = out_dir
    if config.config_hash() != stored.config_hash:
        raise Mismatch("replayed configuration differs from the stored one",
                       {"stored": stored.config_hash, "replayed": config.config_hash()})
    fresh = run(config, write=False, pool=pool)
    fresh.replay_of = stored.manifest_hash()
    before = {c["name"]: c["value"] for c in stored.checks}
    comparison = []
    for check in fresh.checks:
        old = before.get(check["name"])
        comparison.append({"name": check["name"], "stored": old, "replayed": check["value"],
                           "identical": _same_value(old, check["value"])})
    fresh.comparison = comparison
    differing = [row["name"] for row in comparison if not row["identical"]]
    if stored.version != fresh.version:
        logger.warning("replaying a %s manifest with version %s; %d check(s) differ",
                       stored.version, fresh.version, len(differing))
    elif differing or set(before) != {c["name"] for c in fresh.checks}:
        raise Mismatch("replayed check values differ from the stored run", {"differing": differing})
    files = write_run(fresh.to_dict(), config.out_dir)
    fresh.run_dir = str(files["manifest"].parent)
    return fresh


def list_checks() -> pd.DataFrame:
    return pd.DataFrame([{"experiment": spec.experiment, "check": spec.name, "property": spec.description,
                          "threshold": spec.threshold, "comparator": spec.comparator, "gating": spec.gating}
                         for spec in CHECKS.values()])
