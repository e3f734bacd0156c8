import numpy as np
import pytest
import scipy.sparse as sp

from reactor_design.core.fem import (
    CoefficientField,
    SparseOperator,
    assemble_coupled,
    assemble_mass,
    assemble_reaction,
    assemble_stiffness,
    boundary_flux,
    lumped_mass,
    solve_constrained,
    solve_spd,
)
from reactor_design.core.mesh import Mesh
from reactor_design.exceptions import NonConvergenceError
from reactor_design.types import BoundaryTag


def _laplace_lineal(mesh, k=1.0):
    """u = 1 en la fuente, 0 en el sumidero, lados aislados."""
    op = assemble_stiffness(mesh, CoefficientField.constant(mesh, k))
    fuente = mesh.dirichlet_dofs(BoundaryTag.SOURCE1)
    sumidero = mesh.dirichlet_dofs(BoundaryTag.SINK2)
    fijos = np.concatenate([fuente, sumidero])
    valores = np.concatenate([np.ones(fuente.size), np.zeros(sumidero.size)])
    u = solve_constrained(op, np.zeros(mesh.n_dofs), fijos, valores)
    return op, u


class TestStiffness:
    def test_row_sums_vanish(self, cuadrado, rng):
        coef = CoefficientField(rng.uniform(0.5, 2.0, cuadrado.n_elements))
        k = assemble_stiffness(cuadrado, coef).matrix
        assert np.abs(np.asarray(k.sum(axis=1))).max() < 1e-12
        assert abs(k - k.T).max() < 1e-14

    def test_linear_solution_is_exact(self, cuadrado):
        _, u = _laplace_lineal(cuadrado)
        x = cuadrado.dof_coordinates[:, 0]
        assert np.allclose(u, 1.0 - x, atol=1e-9)

    def test_non_positive_coefficient(self, cuadrado):
        coef = CoefficientField(np.zeros(cuadrado.n_elements))
        with pytest.raises(ValueError, match='positivo'):
            assemble_stiffness(cuadrado, coef)

    def test_periodic_row_sums(self, celda):
        k = assemble_stiffness(celda, CoefficientField.constant(celda, 1.0)).matrix
        assert k.shape == (celda.n_dofs, celda.n_dofs)
        assert np.abs(np.asarray(k.sum(axis=1))).max() < 1e-11


class TestMassAndReaction:
    def test_mass_totals(self, anillo):
        masa = assemble_mass(anillo).matrix
        assert masa.sum() == pytest.approx(anillo.total_area, rel=1e-12)
        assert lumped_mass(anillo).sum() == pytest.approx(anillo.total_area, rel=1e-12)

    @pytest.mark.parametrize('valor', [0.0, 1.0])
    def test_pure_phases_have_no_reaction(self, cuadrado, valor):
        c = assemble_reaction(cuadrado, np.full(cuadrado.n_dofs, valor), 100.0)
        assert c.matrix.nnz == 0

    def test_uniform_mixture_is_scaled_mass(self, cuadrado):
        # k_s chi(1-chi) = 1 con chi = 1/2 y k_s = 4; la regla de puntos medios es exacta
        c = assemble_reaction(cuadrado, np.full(cuadrado.n_dofs, 0.5), 4.0).matrix
        masa = assemble_mass(cuadrado).matrix
        assert abs(c - masa).max() < 1e-15

    def test_design_out_of_range(self, cuadrado):
        chi = np.full(cuadrado.n_dofs, 0.5)
        chi[3] = 1.5
        with pytest.raises(ValueError, match=r'\[0, 1\]'):
            assemble_reaction(cuadrado, chi, 1.0)

    def test_design_wrong_length(self, cuadrado):
        with pytest.raises(ValueError, match='valores'):
            assemble_reaction(cuadrado, np.full(3, 0.5), 1.0)

    def test_coupled_operator_blocks(self, cuadrado, params):
        chi = np.full(cuadrado.n_dofs, 0.5)
        op = assemble_coupled(cuadrado, chi, params).matrix
        n = cuadrado.n_dofs
        assert op.shape == (2 * n, 2 * n)
        assert abs(op - op.T).max() < 1e-12
        # 1^T A = 0: difusión y reacción conservan masa total
        assert np.abs(np.asarray(op.sum(axis=0))).max() < 1e-10


class TestSolvers:
    def test_solve_spd(self, cuadrado, rng):
        op = SparseOperator(
            assemble_stiffness(cuadrado, CoefficientField.constant(cuadrado, 1.0)).matrix
            + assemble_mass(cuadrado).matrix
        )
        b = rng.normal(size=op.dimension)
        x = solve_spd(op, b, rtol=1e-12)
        assert np.linalg.norm(op @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_non_convergence(self, cuadrado_16, rng):
        op = assemble_stiffness(cuadrado_16, CoefficientField.constant(cuadrado_16, 1.0))
        op = SparseOperator(op.matrix + 1e-3 * sp.identity(op.dimension))
        with pytest.raises(NonConvergenceError) as info:
            solve_spd(op, rng.normal(size=op.dimension), max_iter=2)
        assert info.value.iterations <= 2
        assert info.value.residual > 0

    def test_empty_system(self):
        vacio = SparseOperator(sp.csr_matrix((0, 0)))
        assert solve_spd(vacio, np.zeros(0)).shape == (0,)


class TestBoundaryFlux:
    def test_flux_of_linear_profile(self, cuadrado):
        op, u = _laplace_lineal(cuadrado, k=2.0)
        entrada = boundary_flux(cuadrado, u, op, None, BoundaryTag.SOURCE1)
        salida = boundary_flux(cuadrado, u, op, None, BoundaryTag.SINK2)
        assert entrada == pytest.approx(2.0, rel=1e-8)
        assert salida == pytest.approx(-2.0, rel=1e-8)

    def test_insulated_has_no_flux(self, cuadrado):
        op, u = _laplace_lineal(cuadrado)
        with pytest.raises(ValueError, match='aislado'):
            boundary_flux(cuadrado, u, op, None, BoundaryTag.INSULATED)

    def test_missing_tag(self, anillo):
        op = assemble_stiffness(anillo, CoefficientField.constant(anillo, 1.0))
        sin_borde = Mesh(anillo.nodes, anillo.elements, np.zeros((0, 2)), (), anillo.periodic_pairs)
        with pytest.raises(ValueError, match='no tiene nodos'):
            boundary_flux(sin_borde, np.zeros(anillo.n_dofs), op, None, BoundaryTag.SOURCE1)
