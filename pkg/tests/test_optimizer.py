import numpy as np
import pytest

from reactor_design.config import PARAMS_CUADRADO, MeshConfig, PhaseFieldParams, RunConfig
from reactor_design.core.fem import lumped_mass
from reactor_design.core.mesh import build_rectangle
from reactor_design.core.optimizer import (
    design_step,
    diseno_inicial,
    double_well,
    double_well_prime,
    driving_force,
    laplaciano,
    project_volume,
    reduced_functional,
    relajar_acoplado,
    run,
)
from reactor_design.core.state import estado_uniforme, solve_state


def _reflexion_y(mesh):
    """Permutación de incógnitas para (x, y) -> (x, 1 - y)."""
    coords = np.round(mesh.dof_coordinates, 9)
    indice = {tuple(p): k for k, p in enumerate(coords)}
    return np.array([indice[(x, round(1.0 - y, 9))] for x, y in coords])


class TestDoubleWell:
    def test_values(self):
        chi = np.array([0.0, 0.25, 0.5, 1.0])
        assert np.allclose(double_well(chi), [0.0, 0.03515625, 0.0625, 0.0])
        assert np.allclose(double_well_prime(chi), [0.0, 0.1875, 0.0, 0.0])

    def test_derivative(self):
        chi = np.linspace(0.05, 0.95, 19)
        eps = 1e-6
        numerica = (double_well(chi + eps) - double_well(chi - eps)) / (2 * eps)
        assert np.allclose(numerica, double_well_prime(chi), atol=1e-9)


class TestProjectVolume:
    def test_uniform_shift(self):
        chi, c = project_volume(np.array([0.5, 0.7, 0.9]), 0.5)
        assert c == pytest.approx(-0.2, abs=1e-12)
        assert np.allclose(chi, [0.3, 0.5, 0.7])

    def test_clipping(self):
        chi, c = project_volume(np.array([0.0, 0.0, 0.9, 0.9]), 0.5)
        assert c == pytest.approx(0.05, abs=1e-12)
        assert np.allclose(chi, [0.05, 0.05, 0.95, 0.95])

    def test_feasible_design_is_returned(self):
        chi = np.array([0.2, 0.8])
        proyectado, c = project_volume(chi, 0.5)
        assert c == 0.0
        assert np.array_equal(proyectado, chi)
        assert proyectado is not chi

    def test_weighted_mean(self, rng):
        chi = rng.normal(0.5, 0.6, 200)
        pesos = rng.uniform(0.5, 2.0, 200)
        proyectado, _ = project_volume(chi, 0.3, pesos)
        assert proyectado.min() >= 0.0 and proyectado.max() <= 1.0
        assert pesos @ proyectado / pesos.sum() == pytest.approx(0.3, abs=1e-10)

    @pytest.mark.parametrize('v', [0.0, 1.0, -0.1, 1.5])
    def test_invalid_volume(self, v):
        with pytest.raises(ValueError, match='v debe estar'):
            project_volume(np.full(4, 0.5), v)


class TestDrivingForce:
    def test_matches_derivative_of_functional(self, cuadrado_16, params_suaves, pf, rng):
        mesh = cuadrado_16
        chi = rng.uniform(0.2, 0.8, mesh.n_dofs)
        estado = solve_state(mesh, chi, params_suaves, rtol=1e-12)
        g = driving_force(mesh, chi, estado, params_suaves, pf.alpha) - pf.beta * (laplaciano(mesh) @ chi)
        eps = 1e-5
        for j in rng.choice(mesh.n_dofs, 20, replace=False):
            mas, menos = chi.copy(), chi.copy()
            mas[j] += eps
            menos[j] -= eps
            fijo = (
                reduced_functional(mesh, mas, estado, params_suaves, pf)
                - reduced_functional(mesh, menos, estado, params_suaves, pf)
            ) / (2 * eps)
            assert fijo == pytest.approx(g[j], rel=1e-6, abs=1e-9)

    def test_envelope_with_resolved_state(self, cuadrado, params_suaves, pf, rng):
        chi = rng.uniform(0.2, 0.8, cuadrado.n_dofs)
        estado = solve_state(cuadrado, chi, params_suaves, rtol=1e-12)
        g = driving_force(cuadrado, chi, estado, params_suaves, pf.alpha) - pf.beta * (laplaciano(cuadrado) @ chi)
        eps = 1e-5
        for j in rng.choice(cuadrado.n_dofs, 4, replace=False):
            mas, menos = chi.copy(), chi.copy()
            mas[j] += eps
            menos[j] -= eps
            f_mas = reduced_functional(
                cuadrado, mas, solve_state(cuadrado, mas, params_suaves, rtol=1e-12), params_suaves, pf)
            f_menos = reduced_functional(
                cuadrado, menos, solve_state(cuadrado, menos, params_suaves, rtol=1e-12), params_suaves, pf)
            assert (f_mas - f_menos) / (2 * eps) == pytest.approx(g[j], rel=1e-4, abs=1e-7)

    def test_pure_phase_force_is_reaction_only(self, cuadrado, params):
        chi = np.zeros(cuadrado.n_dofs)
        estado = solve_state(cuadrado, chi, params)
        g = driving_force(cuadrado, chi, estado, params, alpha=1.0)
        # con chi = 0 el estado es uniforme: solo queda 1/2 k_s (u1 - u2)^2 > 0
        assert np.all(g > 0)


class TestDesignStep:
    def test_preserves_reflection_symmetry(self, cuadrado, params, pf, rng):
        refl = _reflexion_y(cuadrado)
        base = rng.uniform(0.3, 0.7, cuadrado.n_dofs)
        chi = 0.5 * (base + base[refl])
        estado = solve_state(cuadrado, chi, params, rtol=1e-12)
        nuevo = design_step(cuadrado, chi, estado, params, pf)
        assert np.allclose(nuevo, nuevo[refl], atol=1e-8)

    def test_large_beta_gives_near_uniform_update(self, cuadrado, params, pf, rng):
        chi = rng.uniform(0.2, 0.8, cuadrado.n_dofs)
        estado = solve_state(cuadrado, chi, params)
        nuevo = design_step(cuadrado, chi, estado, params, pf.replace(beta=1e6))
        assert np.ptp(nuevo) < 1e-3 * np.ptp(chi)

    def test_vanishing_beta_moves_along_force(self, cuadrado, params, pf, rng):
        chi = rng.uniform(0.2, 0.8, cuadrado.n_dofs)
        estado = solve_state(cuadrado, chi, params)
        plano = pf.replace(beta=1e-300)
        nuevo = design_step(cuadrado, chi, estado, params, plano)
        g = driving_force(cuadrado, chi, estado, params, plano.alpha)
        esperado = chi + plano.dt * g / (plano.d_chi * lumped_mass(cuadrado))
        assert np.allclose(nuevo, esperado, rtol=1e-8, atol=1e-12)
        activos = np.abs(g) > 1e-12
        assert np.array_equal(np.sign(nuevo - chi)[activos], np.sign(g)[activos])


class TestInitialDesign:
    def test_seeded_and_projected(self, cuadrado):
        a = diseno_inicial(cuadrado, 0.3, 1e-3, seed=5)
        b = diseno_inicial(cuadrado, 0.3, 1e-3, seed=5)
        masa = lumped_mass(cuadrado)
        assert np.array_equal(a, b)
        assert masa @ a / masa.sum() == pytest.approx(0.3, abs=1e-10)
        assert np.abs(a - 0.3).max() <= 2e-3


class TestCoupledRelaxation:
    def test_substeps_reach_state_with_stiff_reaction(self, cuadrado):
        chi = np.full(cuadrado.n_dofs, 0.5)
        estacionario = solve_state(cuadrado, chi, PARAMS_CUADRADO)
        estado = estado_uniforme(cuadrado, PARAMS_CUADRADO)
        # dt de diseño 1e-4 frente a un paso estable de 4e-5
        for _ in range(100):
            estado = relajar_acoplado(cuadrado, chi, PARAMS_CUADRADO, estado, dt=1e-4, d_u=2e-3)
            assert estado.stacked.min() >= -1e-3 and estado.stacked.max() <= 1.0 + 1e-3
        assert np.abs(estado.stacked - estacionario.stacked).max() <= 1e-6

    def test_pure_design_takes_single_step(self, cuadrado):
        chi = np.zeros(cuadrado.n_dofs)
        estado = relajar_acoplado(
            cuadrado, chi, PARAMS_CUADRADO, estado_uniforme(cuadrado, PARAMS_CUADRADO), dt=1.0, d_u=2e-3,
        )
        assert np.allclose(estado.u1, PARAMS_CUADRADO.u1_star)


class TestRun:
    def test_invariants_along_the_flow(self, config_pequena):
        mesh = build_rectangle(8, 8)
        masa = lumped_mass(mesh)
        volumenes = []

        def observar(paso, chi, estado):
            assert chi.min() >= 0.0 and chi.max() <= 1.0
            volumenes.append(masa @ chi / masa.sum())

        resultado = run(config_pequena, mesh=mesh, callback=observar)
        pf = config_pequena.phase_field
        assert len(resultado.history) == len(volumenes) == pf.max_steps
        assert np.allclose(volumenes, pf.v, atol=1e-8)
        funcionales = [h.functional for h in resultado.history]
        assert np.all(np.diff(funcionales) >= -1e-10)
        assert all(h.dt <= pf.dt for h in resultado.history)
        assert [h.step for h in resultado.history] == list(range(1, pf.max_steps + 1))
        assert not resultado.converged
        assert resultado.report.lam == resultado.history[-1].lam

    def test_loose_tolerance_converges_in_one_step(self, config_pequena):
        config = config_pequena.replace(phase_field=config_pequena.phase_field.replace(tol=1e5))
        resultado = run(config)
        assert resultado.converged
        assert resultado.steps == 1

    def test_coupled_mode(self, config_pequena, params_suaves):
        config = config_pequena.replace(
            model=params_suaves,
            phase_field=config_pequena.phase_field.replace(state_mode='coupled', max_steps=5),
        )
        resultado = run(config)
        assert len(resultado.history) == 5
        assert resultado.chi.min() >= 0.0 and resultado.chi.max() <= 1.0
        assert np.isfinite(resultado.report.objective)

    def test_explicit_initial_design_is_projected(self, config_pequena):
        mesh = build_rectangle(8, 8)
        chi0 = np.where(mesh.dof_coordinates[:, 1] > 0.5, 1.0, 0.2)
        config = config_pequena.replace(phase_field=config_pequena.phase_field.replace(max_steps=0))
        resultado = run(config, mesh=mesh, chi0=chi0)
        masa = lumped_mass(mesh)
        assert masa @ resultado.chi / masa.sum() == pytest.approx(0.5, abs=1e-10)
        assert resultado.history == []

    def test_mirror_symmetry(self, config_pequena):
        mesh = build_rectangle(16, 16)
        config = config_pequena.replace(
            mesh=MeshConfig(nx=16, ny=16),
            phase_field=config_pequena.phase_field.replace(max_steps=20, tol=0.0),
        )
        chi0 = diseno_inicial(mesh, 0.5, 0.05, seed=3)
        original = run(config, mesh=mesh, chi0=chi0)
        espejo = run(
            config.replace(model=config.model.espejo()),
            mesh=mesh,
            chi0=1.0 - chi0[::-1],
        )
        # el nodo k se refleja en N-1-k
        assert np.allclose(espejo.chi, 1.0 - original.chi[::-1], atol=1e-6)

    def test_coupled_mode_with_stiff_reaction(self, config_pequena):
        config = config_pequena.replace(
            mesh=MeshConfig(nx=16, ny=16),
            phase_field=config_pequena.phase_field.replace(state_mode='coupled', max_steps=300, tol=0.0),
        )
        resultado = run(config)
        assert config.model == PARAMS_CUADRADO
        assert len(resultado.history) == 300
        for u in (resultado.state.u1, resultado.state.u2):
            assert np.all(np.isfinite(u))
            assert u.min() >= -1e-2 and u.max() <= 1.0 + 1e-2
        reporte = resultado.report
        assert 0.0 < reporte.j1_in < 2.0
        assert reporte.total_reaction > 0.0

    def test_converged_design_is_stationary(self, tmp_path, params_suaves):
        mesh = build_rectangle(8, 8)
        pf = PhaseFieldParams(alpha=1e-3, beta=1.0, d_chi=1.0, dt=0.1, tol=1e-4, max_steps=500)
        config = RunConfig(
            scenario='square', mesh=MeshConfig(nx=8, ny=8), model=params_suaves,
            phase_field=pf, output_dir=str(tmp_path),
        )
        chi0 = diseno_inicial(mesh, pf.v, 1e-3, seed=0)
        iterados = [(chi0, solve_state(mesh, chi0, params_suaves))]
        resultado = run(
            config, mesh=mesh, chi0=chi0,
            callback=lambda _, chi, estado: iterados.append((chi.copy(), estado)),
        )

        assert resultado.converged
        ultimo = resultado.history[-1]
        assert ultimo.residual <= pf.tol
        assert resultado.model.lam == ultimo.lam

        # reconstruye el último paso y mide el lado derecho proyectado en los nodos libres
        chi_previo, estado_previo = iterados[-2]
        masa = lumped_mass(mesh)
        lap = laplaciano(mesh)
        chi_pred = design_step(mesh, chi_previo, estado_previo, params_suaves, pf, dt=ultimo.dt, masa=masa, lap=lap)
        assert np.allclose(project_volume(chi_pred, pf.v, masa)[0], resultado.chi, atol=1e-12)
        fuerza = (
            driving_force(mesh, chi_previo, estado_previo, params_suaves, pf.alpha)
            - pf.beta * (lap @ chi_pred)
            - ultimo.lam * masa
        )
        libres = (resultado.chi > 0.0) & (resultado.chi < 1.0)
        assert np.sqrt(np.sum(fuerza[libres] ** 2 / masa[libres])) <= 1.01 * pf.tol * pf.d_chi + 1e-8
