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
Test suite for little groups and induced representations
"""

import pytest
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import numpy as np

from src.errors import IncompatibleStep, OffCone, OffGrid
from src.wigner_reps import (
    METRIC, REFERENCE_MOMENTUM, CircleRepVk, ConeGrid23, MasslessRep23, PoincareElement23,
    boost_x1, boost_x2, cocycle_frame, cocycle_values, dilated_cocycle_deviation,
    dilation_covariance_residual, e2_boost_conjugation, group_law_residual,
    little_group_decompose, load_amplitudes, parabolic, rotation, rotation_part, save_amplitudes, section,
    tau, unitarity_residual, vk_dilation_rescale, vk_rescale_deviation, vk_translation_spectrum,
)


def cone_point(r, theta):
    return r * np.array([1.0, np.cos(theta), np.sin(theta)])


class TestE2:

    def test_boost_conjugation_scales_translation(self):
        """Conjugating tau(z) by the boost gives tau(e^t z)"""
        z = 0.3 + 0.7j
        for t in (-1.0, 0.5, 2.0):
            assert e2_boost_conjugation(t, z).allclose(tau(np.exp(t) * z), atol=1e-12)

    def test_translation_spectrum_example(self):
        """kappa = 2 on eight angles"""
        rep = CircleRepVk(kappa=2.0, N=8)
        expected = [-2.0, -np.sqrt(2), -np.sqrt(2), 0.0, 0.0, np.sqrt(2), np.sqrt(2), 2.0]
        assert np.allclose(vk_translation_spectrum(rep), expected, atol=1e-12)

    def test_refined_circle_contains_coarse_spectrum(self):
        """Doubling N keeps every eigenvalue of the coarse grid"""
        coarse = vk_translation_spectrum(CircleRepVk(kappa=2.0, N=8))
        fine = np.array(vk_translation_spectrum(CircleRepVk(kappa=2.0, N=16)))
        for value in coarse:
            assert np.min(np.abs(fine - value)) < 1e-12

    def test_rotation_covariance(self):
        """Rotations rotate the translation argument"""
        rep = CircleRepVk(kappa=1.5, N=12)
        for k in (1, 3, 7):
            assert rep.covariance_deviation(k, 0.4 - 0.2j) < 1e-12

    def test_full_turn_statistics(self):
        """A full turn acts by exp(2 pi i epsilon)"""
        assert np.allclose(CircleRepVk(kappa=1.0, N=8).rotation(8), np.eye(8))
        assert np.allclose(CircleRepVk(kappa=1.0, N=8, epsilon=0.5).rotation(8), -np.eye(8))

    def test_dilation_rescales_kappa(self):
        """The dilated representation is V of e^-t kappa"""
        rep = CircleRepVk(kappa=2.0, N=16)
        rescaled = vk_dilation_rescale(rep, 0.7)
        assert rescaled.kappa == pytest.approx(2.0 * np.exp(-0.7), rel=1e-12)
        assert vk_rescale_deviation(rep, 0.7, [1.0, 0.5j, -0.3 + 0.8j]) < 1e-12

    def test_nonpositive_kappa_rejected(self):
        """kappa must be positive"""
        with pytest.raises(ValueError):
            CircleRepVk(kappa=0.0, N=8)


class TestLorentzGeometry:

    def setup_method(self):
        """Setup test fixtures"""
        self.rng = np.random.default_rng(11)
        self.points = [cone_point(np.exp(self.rng.uniform(-2, 2)), self.rng.uniform(0, 2 * np.pi))
                       for _ in range(10)]

    def test_section_maps_reference_momentum(self):
        """B_p q = p"""
        for p in self.points:
            assert np.allclose(section(p) @ REFERENCE_MOMENTUM, p, atol=1e-10 * p[0])

    def test_section_is_lorentz(self):
        """B^T eta B = eta"""
        for p in self.points:
            B = section(p)
            assert np.allclose(B.T @ METRIC @ B, METRIC, atol=1e-10 * p[0] ** 2)

    def test_parabolic_fixes_reference(self):
        """exp(cN) fixes q"""
        for c in (-1.3, 0.0, 0.4, 2.5):
            assert np.allclose(parabolic(c) @ REFERENCE_MOMENTUM, REFERENCE_MOMENTUM)

    def test_rotations_have_trivial_cocycle(self):
        """The section is rotation equivariant"""
        for p in self.points:
            assert abs(little_group_decompose(rotation(0.83), p).c) < 1e-10

    def test_cocycle_identity(self):
        """c(AB, p) = c(A, p) + c(B, A^-1 p)"""
        A = boost_x1(0.4)
        B = boost_x2(-0.3) @ rotation(0.2)
        A_inv = METRIC @ A.T @ METRIC
        for p in self.points:
            lhs = little_group_decompose(A @ B, p).c
            rhs = little_group_decompose(A, p).c + little_group_decompose(B, A_inv @ p).c
            assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_cocycle_under_dilation(self):
        """c(A, e^t p) = e^-t c(A, p)"""
        A = boost_x1(0.6) @ rotation(0.5)
        for p in self.points:
            assert little_group_decompose(A, np.exp(0.8) * p).c == pytest.approx(
                np.exp(-0.8) * little_group_decompose(A, p).c, abs=1e-9)

    def test_batched_cocycle_matches_pointwise(self):
        """cocycle_values agrees with little_group_decompose"""
        A = boost_x2(0.7) @ boost_x1(-0.2)
        batch = cocycle_values(A, np.array(self.points))
        for p, c in zip(self.points, batch):
            assert c == pytest.approx(little_group_decompose(A, p).c, abs=1e-9)

    def test_off_cone_momenta_rejected(self):
        """Massive and past pointing momenta raise OffCone"""
        with pytest.raises(OffCone):
            little_group_decompose(boost_x1(0.1), np.array([1.0, 0.5, 0.0]))
        with pytest.raises(OffCone):
            little_group_decompose(boost_x1(0.1), np.array([-1.0, 1.0, 0.0]))

    def test_poincare_inverse(self):
        """g g^-1 is the identity"""
        g = PoincareElement23(a=[0.3, -0.1, 0.2], A=boost_x1(0.5) @ rotation(1.2))
        product = g @ g.inverse()
        assert np.allclose(product.a, 0.0, atol=1e-12)
        assert np.allclose(product.A, np.eye(3), atol=1e-12)
        assert product.turns == 0


class TestConeGrid:

    def test_log_grid_layout(self):
        """Log spacing with constant ratio"""
        grid = ConeGrid23(n_r=13, n_theta=16)
        assert grid.size == 13 * 16
        assert np.allclose(grid.r[1:] / grid.r[:-1], grid.ratio)
        assert np.allclose(grid.weights, grid.r[:, None] * grid.du * grid.dtheta)

    def test_momenta_are_lightlike(self):
        """Grid momenta lie on the forward cone"""
        p = ConeGrid23(n_r=9, n_theta=8).momenta
        assert np.allclose(p[..., 0] ** 2 - p[..., 1] ** 2 - p[..., 2] ** 2, 0.0, atol=1e-10)

    def test_uniform_grid(self):
        """Uniform spacing starts one step above the apex"""
        grid = ConeGrid23(n_r=10, n_theta=8, spacing="uniform", r_max=5.0)
        assert np.allclose(grid.r, 0.5 * np.arange(1, 11))
        assert np.allclose(grid.weights, 0.5 * grid.dtheta)
        with pytest.raises(ValueError):
            MasslessRep23(grid=grid)

    def test_refined_halves_steps(self):
        """refined(2) halves du and dtheta"""
        grid = ConeGrid23(n_r=17, n_theta=16)
        fine = grid.refined(2)
        assert fine.du == pytest.approx(grid.du / 2)
        assert fine.dtheta == pytest.approx(grid.dtheta / 2)

    def test_amplitude_files(self, tmp_path):
        """Header plus binary amplitudes reload bit for bit"""
        grid = ConeGrid23(n_r=9, n_theta=8)
        psi = grid.gaussian_bump(phase=0.7)
        save_amplitudes(tmp_path / "bump", grid, psi)
        loaded_grid, loaded = load_amplitudes(tmp_path / "bump")
        assert loaded_grid.describe() == grid.describe()
        assert np.array_equal(loaded, psi)


class TestMasslessRep:

    def setup_method(self):
        """Setup test fixtures"""
        self.grid = ConeGrid23(n_r=33, n_theta=32)
        self.psi = self.grid.gaussian_bump(u0=0.0, theta0=np.pi / 2, width=0.3)

    def test_translations_are_unitary(self):
        """Translations multiply by phases"""
        rep = MasslessRep23(grid=self.grid, kappa=1.0)
        g = PoincareElement23.translation([0.4, 0.1, -0.3])
        assert unitarity_residual(rep, g, self.psi) < 1e-12

    def test_grid_rotations_are_exact(self):
        """Rotating by grid angles and back recovers the amplitude"""
        rep = MasslessRep23(grid=self.grid, kappa=1.0)
        step = 5 * self.grid.dtheta
        there = rep.apply(PoincareElement23.rotation(step), self.psi)
        back = rep.apply(PoincareElement23.rotation(-step), there)
        assert np.allclose(back, self.psi, atol=1e-12)

    def test_full_turn_acts_by_center_character(self):
        """U(2 pi) multiplies by z on U_{kappa,z}"""
        z = -1.0
        rep = MasslessRep23(grid=self.grid, kappa=1.0, z_center=z)
        turned = rep.apply(PoincareElement23.rotation(2 * np.pi), self.psi)
        assert np.allclose(turned, z * self.psi, atol=1e-12)

    def test_full_turn_with_complex_center(self):
        """A full turn multiplies each component by its own character"""
        z = np.exp(0.7j)
        rep = MasslessRep23(grid=self.grid, kappa=1.0, z_center=z, doubled=True)
        psi = np.tile(self.psi, 2)
        turned = rep.apply(PoincareElement23.rotation(2 * np.pi), psi)
        assert np.allclose(turned, rep.twist * psi, atol=1e-12)
        assert np.allclose(turned[self.grid.size:], np.conj(z) * self.psi, atol=1e-12)

    def test_doubled_twist(self):
        """The doubled representation carries z and conj(z)"""
        z = np.exp(0.4j)
        rep = MasslessRep23(grid=self.grid, kappa=1.0, z_center=z, doubled=True)
        assert rep.dim == 2 * self.grid.size
        assert np.allclose(rep.twist[:self.grid.size], z)
        assert np.allclose(rep.twist[self.grid.size:], np.conj(z))
        real = MasslessRep23(grid=self.grid, kappa=1.0, z_center=-1.0, doubled=True)
        assert np.allclose(real.twist, -1.0)

    def test_interpolated_rotation_with_complex_center(self):
        """Slightly off-grid rotations agree with the exact grid rotation across the branch"""
        z = np.exp(0.7j)
        rep = MasslessRep23(grid=self.grid, kappa=0.0, z_center=z)
        psi = self.grid.gaussian_bump(u0=0.0, theta0=0.1, width=0.3)
        steps = 5
        interpolated = rep.apply(PoincareElement23.rotation(steps * self.grid.dtheta + 1e-6), psi)
        exact = rep.grid_transform(steps, [0.0, 0.0, 0.0], psi)
        assert np.allclose(interpolated, exact, atol=1e-4)

    def test_interpolated_full_turn(self):
        """Just past one full turn the amplitude comes back times z"""
        z = np.exp(0.7j)
        rep = MasslessRep23(grid=self.grid, kappa=1.0, z_center=z)
        turned = rep.apply(PoincareElement23.rotation(2 * np.pi + 1e-6), self.psi)
        assert np.allclose(turned, z * self.psi, atol=1e-4)

    def test_interpolated_boost_with_complex_center(self):
        """Away from the branch a boost does not see the character"""
        g = PoincareElement23(A=boost_x1(0.2))
        twisted = MasslessRep23(grid=self.grid, kappa=1.0, z_center=np.exp(0.7j)).apply(g, self.psi)
        plain = MasslessRep23(grid=self.grid, kappa=1.0).apply(g, self.psi)
        assert np.allclose(twisted, plain, atol=1e-4)

    def test_group_law_converges(self):
        """The interpolated group law residual shrinks under refinement"""
        g1 = PoincareElement23(a=[0.1, 0.2, 0.0], A=boost_x1(0.3))
        g2 = PoincareElement23(a=[0.0, 0.1, -0.1], A=rotation(0.37))
        residuals = []
        for grid in (self.grid, self.grid.refined(2)):
            rep = MasslessRep23(grid=grid, kappa=1.0)
            psi = grid.gaussian_bump(u0=0.0, theta0=np.pi / 2, width=0.5)
            residuals.append(group_law_residual(rep, g1, g2, psi))
        assert residuals[1] <= 0.5 * residuals[0]

    def test_off_grid_detected(self):
        """Boosting mass past the radial range raises OffGrid"""
        rep = MasslessRep23(grid=self.grid, kappa=0.0)
        psi = self.grid.gaussian_bump(u0=2.0, theta0=np.pi / 2, width=0.3)
        with pytest.raises(OffGrid):
            rep.apply(PoincareElement23.lorentz(boost_x1(2.5)), psi)

    def test_dilation_round_trip(self):
        """D(t) D(-t) is the identity away from the grid edges"""
        rep = MasslessRep23(grid=self.grid, kappa=0.0)
        t = 2 * self.grid.du
        back = rep.dilation_apply(t, rep.dilation_apply(-t, self.psi))
        assert np.allclose(back, self.psi, atol=1e-12)

    def test_dilation_covariance(self):
        """D(t) U(a) D(-t) = U(e^t a)"""
        rep = MasslessRep23(grid=self.grid, kappa=0.0)
        assert dilation_covariance_residual(rep, 2, [0.3, 0.1, 0.2], self.psi) < 1e-12

    def test_incompatible_dilation(self):
        """Off-lattice dilations raise IncompatibleStep"""
        rep = MasslessRep23(grid=self.grid, kappa=0.0)
        with pytest.raises(IncompatibleStep):
            rep.dilation_apply(0.1, self.psi)

    def test_dilation_needs_zero_kappa(self):
        """Dilations are not symmetries of kappa > 0"""
        rep = MasslessRep23(grid=self.grid, kappa=1.0)
        with pytest.raises(ValueError):
            rep.dilation_apply(self.grid.du, self.psi)

    def test_dilated_cocycle(self):
        """The dilated kappa cocycle is the e^-t kappa cocycle on the grid"""
        rep = MasslessRep23(grid=self.grid, kappa=1.0)
        assert dilated_cocycle_deviation(rep, 3, boost_x1(0.5)) < 1e-9

    def test_cocycle_frame(self):
        """Long-form cocycle tables"""
        rep = MasslessRep23(grid=ConeGrid23(n_r=5, n_theta=8), kappa=1.0)
        frame = cocycle_frame(rep, {"boost": boost_x1(0.2), "rot": rotation(0.3)})
        assert list(frame.columns) == ["i", "j", "A-id", "c"]
        assert len(frame) == 2 * 5 * 8
        assert np.allclose(frame[frame["A-id"] == "rot"]["c"], 0.0, atol=1e-10)

    def test_half_turns_compose_to_center(self):
        """Two half turns act like one full turn on the twisted circle"""
        rep = MasslessRep23(grid=self.grid, kappa=0.0, z_center=-1.0)
        half = PoincareElement23.rotation(np.pi)
        twice = rep.apply(half, rep.apply(half, self.psi))
        assert np.allclose(twice, -self.psi, atol=1e-12)
        assert (half @ half).turns == 1
        assert np.allclose(rep.apply(half @ half, self.psi), twice, atol=1e-12)

    def test_rotation_inverse_in_cover(self):
        """g g^-1 carries no turn for rotations"""
        g = PoincareElement23.rotation(0.9)
        assert (g @ g.inverse()).turns == 0
        assert g.inverse().turns == -1

    def test_center_character_on_unit_circle(self):
        """Any unit z is accepted and real characters stay floats"""
        rep = MasslessRep23(grid=self.grid, z_center=np.exp(0.4j))
        assert abs(rep.z_center - np.exp(0.4j)) < 1e-12
        assert not rep.real_center
        minus = MasslessRep23(grid=self.grid, z_center=-1 + 0j)
        assert minus.real_center and minus.z_center == -1.0
        with pytest.raises(ValueError):
            MasslessRep23(grid=self.grid, z_center=1.2 * np.exp(0.4j))

    def test_rotation_part_of_cartan_product(self):
        """R(phi) B has rotation part phi for a pure boost B"""
        assert abs(rotation_part(rotation(1.1) @ boost_x1(0.4)) - 1.1) < 1e-10
        assert abs(rotation_part(rotation(-0.3) @ boost_x2(0.7)) - (2 * np.pi - 0.3)) < 1e-10
        assert rotation_part(boost_x1(0.5)) == 0.0

    def test_product_carries_turns(self):
        """Composing rotations past 2 pi through a boost counts one turn"""
        g = PoincareElement23(A=rotation(4.0) @ boost_x1(0.1))
        h = PoincareElement23.rotation(3.0)
        assert (h @ g).turns == 1


if __name__ == "__main__":
    pytest.main([__file__])
