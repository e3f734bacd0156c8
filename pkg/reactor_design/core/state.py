"""
Problema de transporte estacionario para un diseño dado: solución directa,
marcha en pseudo-tiempo y reporte de energías y flujos.
"""
import logging
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..exceptions import DivergenceError
from ..types import BoundaryTag, DesignField, EnergyReport, StateField
from .fem import (
    CoefficientField,
    SparseOperator,
    acoplar,
    assemble_coupled,
    assemble_mass,
    assemble_stiffness,
    boundary_flux,
    chi_en_cuadratura,
    operadores_especies,
    solve_constrained,
    verificar_diseno,
)

logger = logging.getLogger(__name__)

CRECIMIENTO_MAXIMO = 1e6


def _condiciones_dirichlet(mesh, params) -> Tuple[np.ndarray, np.ndarray]:
    """Índices apilados y valores de Dirichlet: u1 en la fuente, u2 en el sumidero."""
    fuente = mesh.dirichlet_dofs(BoundaryTag.SOURCE1)
    sumidero = mesh.dirichlet_dofs(BoundaryTag.SINK2)
    if fuente.size == 0 or sumidero.size == 0:
        raise ValueError("Se requieren bordes fuente y sumidero no vacíos para la unicidad")
    fijos = np.concatenate([fuente, sumidero + mesh.n_dofs])
    valores = np.concatenate([
        np.full(fuente.size, params.u1_star),
        np.full(sumidero.size, params.u2_star),
    ])
    return fijos, valores


def estado_uniforme(mesh, params) -> StateField:
    """Estado con u1 = u1* y u2 = u2* en todas partes (solución para chi en {0, 1})."""
    return StateField(
        u1=np.full(mesh.n_dofs, float(params.u1_star)),
        u2=np.full(mesh.n_dofs, float(params.u2_star)),
    )


def solve_state(
    mesh,
    chi: DesignField,
    params,
    x0: Optional[StateField] = None,
    rtol: float = 1e-10,
) -> StateField:
    """
    Resuelve la ecuación de Euler-Lagrange del transporte para el diseño chi.

    Args:
        mesh: malla
        chi: diseño nodal en [0, 1]
        params: ModelParams
        x0: estado inicial para CG (por defecto el estado uniforme)
        rtol: tolerancia relativa de CG

    Returns:
        StateField con los valores de Dirichlet impuestos exactamente
    """
    chi = verificar_diseno(mesh, chi)
    fijos, valores = _condiciones_dirichlet(mesh, params)
    op = assemble_coupled(mesh, chi, params)
    inicial = (x0 or estado_uniforme(mesh, params)).stacked
    u = solve_constrained(op, np.zeros(op.dimension), fijos, valores, x0=inicial, rtol=rtol)
    return StateField.from_stacked(u)


def paso_estable(mesh, chi: DesignField, params, d_u: float = 1.0) -> float:
    """
    Mayor paso de pseudo-tiempo con acoplamiento explícito sin oscilación.

    dt <= d_u / (2 k_s max chi(1 - chi)), con chi en los puntos de cuadratura
    de la reacción; infinito si no hay mezcla.
    """
    chi_q = chi_en_cuadratura(mesh, verificar_diseno(mesh, chi))
    rigidez = 2.0 * params.k_s * float(np.max(chi_q * (1.0 - chi_q), initial=0.0))
    return d_u / rigidez if rigidez > 0 else np.inf


def relax_state(
    mesh,
    chi: DesignField,
    params,
    state0: StateField,
    dt: float,
    n_steps: int,
    d_u: float = 1.0,
    rtol: float = 1e-10,
) -> StateField:
    """
    Marcha semi-implícita d_u du/dt = div k grad u - chi(1-chi) A u.

    La difusión es implícita y el acoplamiento de reacción explícito.

    Args:
        mesh: malla
        chi: diseño nodal
        params: ModelParams
        state0: estado inicial
        dt: paso de pseudo-tiempo
        n_steps: cantidad de pasos
        d_u: movilidad inversa del estado
        rtol: tolerancia de CG por paso

    Returns:
        Estado tras n_steps pasos

    Raises:
        DivergenceError: si la norma crece más de 1e6 veces
    """
    if dt <= 0:
        raise ValueError(f"dt debe ser positivo (recibido {dt})")
    chi = verificar_diseno(mesh, chi)
    limite = paso_estable(mesh, chi, params, d_u)
    if dt > limite:
        logger.warning("dt=%.3e supera el paso estable del acoplamiento %.3e", dt, limite)
    fijos, valores = _condiciones_dirichlet(mesh, params)
    k1, k2, c = operadores_especies(mesh, chi, params)
    masa = assemble_mass(mesh).matrix
    a = d_u / dt
    sistema = SparseOperator(a * sp.block_diag([masa, masa]) + sp.block_diag([k1.matrix, k2.matrix]))
    cm = c.matrix
    reaccion = sp.bmat([[cm, -cm], [-cm, cm]], format='csr')
    masa_bloque = sp.block_diag([masa, masa], format='csr')

    u = state0.stacked.astype(float)
    u[fijos] = valores
    referencia = max(np.linalg.norm(u), 1.0)
    for paso in range(n_steps):
        rhs = a * (masa_bloque @ u) - reaccion @ u
        u = solve_constrained(sistema, rhs, fijos, valores, x0=u, rtol=rtol)
        norma = np.linalg.norm(u)
        if not np.isfinite(norma) or norma > CRECIMIENTO_MAXIMO * referencia:
            raise DivergenceError(f"La marcha del estado divergió en el paso {paso + 1} (norma {norma:.3e})")
    return StateField.from_stacked(u)


def energy_report(
    mesh,
    chi: DesignField,
    state: StateField,
    params,
    alpha: float,
    beta: float,
    lam: Optional[float] = None,
) -> EnergyReport:
    """
    Energías de transporte, reacción y campo de fase, flujos y objetivo.

    Args:
        mesh: malla
        chi: diseño nodal
        state: estado resuelto para chi
        params: ModelParams
        alpha, beta: pesos del campo de fase
        lam: multiplicador estimado a reportar (opcional)

    Returns:
        EnergyReport con la misma cuadratura del ensamblaje
    """
    from .optimizer import energia_doble_pozo

    chi = verificar_diseno(mesh, chi)
    k1, k2, c = operadores_especies(mesh, chi, params)
    u1, u2 = state.u1, state.u2
    d = u1 - u2
    cd = c @ d
    transporte = 0.5 * (u1 @ (k1 @ u1) + u2 @ (k2 @ u2))
    reaccion = 0.5 * d @ cd
    laplaciano = assemble_stiffness(mesh, CoefficientField.constant(mesh, 1.0))
    pozo = alpha * energia_doble_pozo(mesh, chi)
    gradiente = beta * chi @ (laplaciano @ chi)

    acoplado = acoplar(k1, k2, c)
    u = state.stacked
    j1_in = boundary_flux(mesh, u, acoplado, None, BoundaryTag.SOURCE1, block=0)
    j2_out = -boundary_flux(mesh, u, acoplado, None, BoundaryTag.SINK2, block=1)
    objetivo = params.u1_star * j1_in + params.u2_star * j2_out
    return EnergyReport(
        transport_energy=float(transporte),
        reaction_energy=float(reaccion),
        phase_field_energy=float(pozo + gradiente),
        phase_field_well=float(pozo),
        phase_field_gradient=float(gradiente),
        j1_in=j1_in,
        j2_out=j2_out,
        total_reaction=float(cd.sum()),
        objective=float(objetivo),
        lam=lam,
    )
