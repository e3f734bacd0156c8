"""
Evolución de diseño por flujo gradiente de campo de fase: fuerza motriz,
paso semi-implícito, proyección de volumen y bucle con control de ascenso.
"""
import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..types import DesignField, DesignResult, HistoryEntry, StateField, Vector
from .fem import (
    PUNTOS_MEDIOS,
    CoefficientField,
    SparseOperator,
    assemble_stiffness,
    chi_en_cuadratura,
    lumped_mass,
    operadores_especies,
    solve_spd,
)
from .state import energy_report, paso_estable, relax_state, solve_state

logger = logging.getLogger(__name__)

TOLERANCIA_ASCENSO = 1e-10
TOLERANCIA_VOLUMEN = 1e-10


def double_well(chi):
    """W(chi) = chi^2 (1 - chi)^2, con pozos en 0 y 1."""
    return chi ** 2 * (1.0 - chi) ** 2


def double_well_prime(chi):
    """W'(chi) = 2 chi (1 - chi)(1 - 2 chi)."""
    return 2.0 * chi * (1.0 - chi) * (1.0 - 2.0 * chi)


def energia_doble_pozo(mesh, chi: DesignField) -> float:
    """int W(chi) con la regla de puntos medios del ensamblaje de reacción."""
    chi_q = chi_en_cuadratura(mesh, chi)
    return float(((mesh.areas / 3.0)[:, None] * double_well(chi_q)).sum())


def laplaciano(mesh) -> SparseOperator:
    """Rigidez con coeficiente unitario (forma discreta de -lap chi)."""
    return assemble_stiffness(mesh, CoefficientField.constant(mesh, 1.0))


def driving_force(mesh, chi: DesignField, state: StateField, params, alpha: float) -> Vector:
    """
    Fuerza motriz ensamblada g = M F, derivada exacta del funcional discreto.

    F = sum (dk_i/2)|grad u_i|^2 + 1/2 k_s (u1-u2)^2 (1-2 chi) - alpha W'(chi),
    sin el término beta ni el multiplicador (los maneja el paso y la proyección).

    Args:
        mesh: malla
        chi: diseño nodal
        state: estado resuelto para chi
        params: ModelParams
        alpha: peso del doble pozo

    Returns:
        Vector por incógnita
    """
    dofs = mesh.element_dofs
    g = mesh.gradients
    grad_u1 = np.einsum('eai,ea->ei', g, state.u1[dofs])
    grad_u2 = np.einsum('eai,ea->ei', g, state.u2[dofs])
    tercio = mesh.areas / 3.0
    # las conductividades usan el promedio de chi del elemento
    transporte = 0.5 * (
        params.delta_k1 * (grad_u1 ** 2).sum(axis=1)
        + params.delta_k2 * (grad_u2 ** 2).sum(axis=1)
    ) * tercio
    cargas = np.repeat(transporte[:, None], 3, axis=1)

    chi_q = chi_en_cuadratura(mesh, chi)
    d_q = (state.u1 - state.u2)[dofs] @ PUNTOS_MEDIOS.T
    puntual = 0.5 * params.k_s * (1.0 - 2.0 * chi_q) * d_q ** 2 - alpha * double_well_prime(chi_q)
    cargas = cargas + (tercio[:, None] * puntual) @ PUNTOS_MEDIOS
    return np.bincount(dofs.ravel(), weights=cargas.ravel(), minlength=mesh.n_dofs)


def reduced_functional(mesh, chi: DesignField, state: StateField, params, pf) -> float:
    """
    Funcional reducido que asciende el flujo de diseño.

    Transporte + reacción - alpha int W(chi) - (beta/2) chi.L.chi; el peso beta/2
    hace del paso con beta L implícito un flujo gradiente exacto.
    """
    k1, k2, c = operadores_especies(mesh, chi, params)
    u1, u2 = state.u1, state.u2
    d = u1 - u2
    fisico = 0.5 * (u1 @ (k1 @ u1) + u2 @ (k2 @ u2) + d @ (c @ d))
    penalizacion = pf.alpha * energia_doble_pozo(mesh, chi) + 0.5 * pf.beta * chi @ (laplaciano(mesh) @ chi)
    return float(fisico - penalizacion)


def design_step(
    mesh,
    chi: DesignField,
    state: StateField,
    params,
    pf,
    dt: Optional[float] = None,
    masa: Optional[Vector] = None,
    lap: Optional[SparseOperator] = None,
) -> DesignField:
    """
    Un paso semi-implícito (d_chi/dt M + beta L) chi_new = d_chi/dt M chi + g.

    Args:
        mesh: malla
        chi: diseño actual
        state: estado para chi
        params: ModelParams
        pf: PhaseFieldParams
        dt: paso (por defecto pf.dt)
        masa, lap: masa concentrada y laplaciano precalculados (opcional)

    Returns:
        Diseño sin proyectar; flujo nulo natural en el borde
    """
    dt = dt or pf.dt
    masa = lumped_mass(mesh) if masa is None else masa
    lap = laplaciano(mesh) if lap is None else lap
    c = pf.d_chi / dt
    sistema = SparseOperator(sp.diags(c * masa) + pf.beta * lap.matrix)
    rhs = c * masa * chi + driving_force(mesh, chi, state, params, pf.alpha)
    return solve_spd(sistema, rhs, x0=chi)


def project_volume(
    chi: DesignField,
    v: float,
    weights: Optional[Vector] = None,
    tol: float = TOLERANCIA_VOLUMEN,
) -> Tuple[DesignField, float]:
    """
    Desplaza y recorta chi para que su media ponderada sea v.

    Args:
        chi: diseño sin proyectar
        v: fracción de volumen en (0, 1)
        weights: pesos de área (masa concentrada); uniformes por defecto
        tol: tolerancia sobre la media

    Returns:
        Tupla (diseño en [0, 1], desplazamiento c)
    """
    if not 0.0 < v < 1.0:
        raise ValueError(f"v debe estar en (0, 1) (recibido {v})")
    chi = np.asarray(chi, dtype=float)
    pesos = np.ones_like(chi) if weights is None else np.asarray(weights, dtype=float)
    pesos = pesos / pesos.sum()

    def media(c: float) -> float:
        return float(pesos @ np.clip(chi + c, 0.0, 1.0))

    if np.all((chi >= 0.0) & (chi <= 1.0)) and abs(media(0.0) - v) <= tol:
        return chi.copy(), 0.0

    lo = min(-1.0, v - chi.max())
    hi = max(1.0, v - chi.min())
    for _ in range(200):
        medio = 0.5 * (lo + hi)
        if media(medio) < v:
            lo = medio
        else:
            hi = medio
        if hi - lo < 1e-15:
            break
    c = 0.5 * (lo + hi)
    return np.clip(chi + c, 0.0, 1.0), c


def diseno_inicial(mesh, v: float, amplitud: float = 1e-3, seed: int = 0) -> DesignField:
    """chi = v uniforme más una perturbación sembrada, ya proyectado."""
    rng = np.random.default_rng(seed)
    chi = v + amplitud * rng.uniform(-1.0, 1.0, mesh.n_dofs)
    return project_volume(chi, v, lumped_mass(mesh))[0]


def relajar_acoplado(mesh, chi: DesignField, params, state: StateField, dt: float, d_u: float) -> StateField:
    """Avanza el estado un paso de diseño dt en subpasos que respetan paso_estable."""
    limite = paso_estable(mesh, chi, params, d_u)
    subpasos = max(1, math.ceil(dt / limite * (1.0 + 1e-9)))
    return relax_state(mesh, chi, params, state, dt=dt / subpasos, n_steps=subpasos, d_u=d_u)


def run(
    config,
    mesh=None,
    chi0: Optional[DesignField] = None,
    callback: Optional[Callable[[int, DesignField, StateField], None]] = None,
) -> DesignResult:
    """
    Ejecuta la evolución del diseño hasta la tolerancia o max_steps.

    Args:
        config: RunConfig
        mesh: malla ya construida (por defecto la del escenario)
        chi0: diseño inicial explícito (por defecto v más perturbación sembrada)
        callback: función (paso, chi, estado) llamada tras cada paso aceptado

    Returns:
        DesignResult con historial completo; no falla si no converge
    """
    from .mesh import build_scenario

    params = config.model
    pf = config.phase_field
    mesh = mesh or build_scenario(config.scenario, config.mesh)
    masa = lumped_mass(mesh)
    lap = laplaciano(mesh)
    segregado = pf.state_mode == 'segregated'

    if chi0 is None:
        chi = diseno_inicial(mesh, pf.v, pf.perturbation, config.seed)
    else:
        chi = project_volume(chi0, pf.v, masa)[0]
    state = solve_state(mesh, chi, params)
    funcional = reduced_functional(mesh, chi, state, params, pf)
    logger.info(
        "Optimización %s: %d incógnitas, v=%.3g, funcional inicial %.6g",
        config.scenario, mesh.n_dofs, pf.v, funcional,
    )
    if params.lam != 0.0:
        logger.info("lambda=%.6g de la configuración se reemplaza por la estimación de la proyección", params.lam)
    if not segregado and pf.dt > pf.d_u / (0.5 * params.k_s):
        logger.warning(
            "d_u/dt=%.3g menor que 2 k_s max chi(1-chi)=%.3g: el estado avanza en subpasos",
            pf.d_u / pf.dt, 0.5 * params.k_s,
        )

    historial = []
    convergido = False
    dt = pf.dt
    lam = 0.0
    paso = 0
    while paso < pf.max_steps:
        chi_pred = design_step(mesh, chi, state, params, pf, dt=dt, masa=masa, lap=lap)
        chi_nuevo, desplazamiento = project_volume(chi_pred, pf.v, masa)
        if segregado:
            estado_nuevo = solve_state(mesh, chi_nuevo, params, x0=state)
        else:
            estado_nuevo = relajar_acoplado(mesh, chi_nuevo, params, state, dt, pf.d_u)
        funcional_nuevo = reduced_functional(mesh, chi_nuevo, estado_nuevo, params, pf)

        if segregado and funcional_nuevo < funcional - TOLERANCIA_ASCENSO:
            dt *= 0.5
            logger.debug("Paso rechazado (funcional %.10g < %.10g); dt -> %.3e", funcional_nuevo, funcional, dt)
            if dt < pf.min_dt:
                logger.warning("dt por debajo de min_dt=%.1e sin ascenso; se detiene", pf.min_dt)
                break
            continue

        delta = chi_nuevo - chi
        tasa = float(np.sqrt(delta @ (masa * delta))) / dt
        lam = -desplazamiento * pf.d_chi / dt
        paso += 1
        chi, state, funcional = chi_nuevo, estado_nuevo, funcional_nuevo
        historial.append(HistoryEntry(step=paso, residual=tasa, functional=funcional, lam=lam, dt=dt))
        logger.debug("Paso %d: ||dchi/dt||=%.3e funcional=%.10g dt=%.3e", paso, tasa, funcional, dt)
        if callback is not None:
            callback(paso, chi, state)
        if tasa <= pf.tol:
            convergido = True
            break
        dt = min(dt * pf.growth, pf.dt)

    if convergido:
        logger.info("Convergió en %d pasos (funcional %.8g)", paso, funcional)
    else:
        logger.warning("Sin convergencia tras %d pasos", paso)
    reporte = energy_report(mesh, chi, state, params, pf.alpha, pf.beta, lam=lam)
    return DesignResult(
        chi=chi, state=state, report=reporte, history=historial, converged=convergido,
        model=params.replace(lam=lam),
    )
