"""
Ensamblaje P1 de operadores dispersos, condiciones de Dirichlet,
gradiente conjugado y flujo de borde consistente.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from ..exceptions import NonConvergenceError
from ..types import BoundaryTag, DesignField, Vector

logger = logging.getLogger(__name__)

# Valores de las funciones base en los puntos medios de las aristas (0-1, 1-2, 2-0)
PUNTOS_MEDIOS = np.array([
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
])
HOLGURA_DISENO = 1e-12


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Matriz CSR con bandera de simetría."""

    matrix: sp.csr_matrix
    symmetric: bool = True

    def __post_init__(self):
        matriz = sp.csr_matrix(self.matrix, dtype=float)
        matriz.sum_duplicates()
        matriz.eliminate_zeros()
        object.__setattr__(self, 'matrix', matriz)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, x):
        return self.matrix @ x


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Coeficiente constante por elemento."""

    values: np.ndarray

    @classmethod
    def constant(cls, mesh, valor: float) -> 'CoefficientField':
        return cls(np.full(mesh.n_elements, float(valor)))

    @classmethod
    def from_design(cls, mesh, chi: DesignField, k_material1: float, k_material2: float) -> 'CoefficientField':
        """k = k_material1 chi_e + k_material2 (1 - chi_e), con chi_e el promedio del elemento."""
        chi_e = np.asarray(chi)[mesh.element_dofs].mean(axis=1)
        return cls(k_material1 * chi_e + k_material2 * (1.0 - chi_e))

    def ensure_positive(self) -> None:
        if np.any(self.values <= 0):
            raise ValueError("El coeficiente de difusión debe ser positivo en cada elemento")


def _ensamblar(mesh, locales: np.ndarray) -> sp.csr_matrix:
    """Suma matrices locales (E, 3, 3) en la matriz global por incógnitas."""
    dofs = mesh.element_dofs
    filas = np.repeat(dofs, 3, axis=1).ravel()
    columnas = np.tile(dofs, (1, 3)).ravel()
    return sp.coo_matrix(
        (locales.ravel(), (filas, columnas)), shape=(mesh.n_dofs, mesh.n_dofs)
    ).tocsr()


def verificar_diseno(mesh, chi: DesignField) -> np.ndarray:
    """Valida longitud y rango [0, 1] de un diseño nodal."""
    chi = np.asarray(chi, dtype=float)
    if chi.shape != (mesh.n_dofs,):
        raise ValueError(f"El diseño debe tener {mesh.n_dofs} valores (recibido {chi.shape})")
    if np.any(chi < -HOLGURA_DISENO) or np.any(chi > 1.0 + HOLGURA_DISENO):
        raise ValueError("El diseño chi debe estar en [0, 1]")
    return chi


def chi_en_cuadratura(mesh, chi: DesignField) -> np.ndarray:
    """chi interpolado en los tres puntos medios de cada elemento, forma (E, 3)."""
    return np.asarray(chi)[mesh.element_dofs] @ PUNTOS_MEDIOS.T


def assemble_stiffness(mesh, coeff: CoefficientField) -> SparseOperator:
    """
    Matriz de rigidez P1 con coeficiente constante por elemento.

    Args:
        mesh: malla
        coeff: coeficiente positivo por elemento

    Returns:
        Operador simétrico con sumas de fila nulas
    """
    coeff.ensure_positive()
    g = mesh.gradients
    locales = np.einsum('e,eai,ebi->eab', coeff.values * mesh.areas, g, g)
    return SparseOperator(_ensamblar(mesh, locales))


def assemble_mass(mesh) -> SparseOperator:
    """Matriz de masa P1 consistente."""
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    locales = mesh.areas[:, None, None] * base[None]
    return SparseOperator(_ensamblar(mesh, locales))


def lumped_mass(mesh) -> Vector:
    """Masa concentrada: integral de cada función base."""
    pesos = np.repeat(mesh.areas / 3.0, 3)
    return np.bincount(mesh.element_dofs.ravel(), weights=pesos, minlength=mesh.n_dofs)


def assemble_reaction(mesh, chi: DesignField, k_s: float) -> SparseOperator:
    """
    Matriz de masa ponderada C con peso k_s chi(1-chi) en los puntos medios.

    Args:
        mesh: malla
        chi: diseño nodal en [0, 1]
        k_s: tasa de reacción

    Returns:
        Operador C; el acoplamiento aplica C(u1-u2) y -C(u1-u2)
    """
    chi = verificar_diseno(mesh, chi)
    chi_q = chi_en_cuadratura(mesh, chi)
    peso = k_s * chi_q * (1.0 - chi_q) * (mesh.areas / 3.0)[:, None]
    locales = np.einsum('eq,qa,qb->eab', peso, PUNTOS_MEDIOS, PUNTOS_MEDIOS)
    return SparseOperator(_ensamblar(mesh, locales))


def operadores_especies(mesh, chi: DesignField, params):
    """Rigideces K1, K2 con las conductividades del diseño y matriz de reacción C."""
    k1 = assemble_stiffness(mesh, CoefficientField.from_design(mesh, chi, params.k11, params.k12))
    k2 = assemble_stiffness(mesh, CoefficientField.from_design(mesh, chi, params.k21, params.k22))
    c = assemble_reaction(mesh, chi, params.k_s)
    return k1, k2, c


def acoplar(k1: SparseOperator, k2: SparseOperator, c: SparseOperator) -> SparseOperator:
    """Bloque [[K1 + C, -C], [-C, K2 + C]]."""
    c = c.matrix
    return SparseOperator(sp.bmat([[k1.matrix + c, -c], [-c, k2.matrix + c]], format='csr'))


def assemble_coupled(mesh, chi: DesignField, params) -> SparseOperator:
    """
    Operador acoplado de las dos especies [[K1 + C, -C], [-C, K2 + C]].

    Args:
        mesh: malla
        chi: diseño nodal
        params: ModelParams

    Returns:
        Operador simétrico de dimensión 2 n_dofs
    """
    return acoplar(*operadores_especies(mesh, chi, params))


def solve_spd(
    op: SparseOperator,
    rhs: Vector,
    x0: Optional[Vector] = None,
    rtol: float = 1e-10,
    max_iter: Optional[int] = None,
) -> Vector:
    """
    Resuelve un sistema simétrico definido positivo con CG y precondicionador de Jacobi.

    Args:
        op: operador SPD
        rhs: lado derecho
        x0: vector inicial opcional
        rtol: tolerancia sobre el residuo relativo
        max_iter: máximo de iteraciones (por defecto 20 veces la dimensión)

    Returns:
        Solución del sistema

    Raises:
        NonConvergenceError: si no se alcanza rtol en max_iter iteraciones
    """
    b = np.asarray(rhs, dtype=float)
    n = op.dimension
    if n == 0:
        return np.zeros(0)
    diagonal = op.matrix.diagonal()
    if np.any(diagonal <= 0):
        raise ValueError("El operador no es definido positivo: diagonal no positiva")
    precondicionador = sp.diags(1.0 / diagonal)
    max_iter = max_iter or 20 * n
    iteraciones = 0

    def contar(_):
        nonlocal iteraciones
        iteraciones += 1

    x, info = cg(
        op.matrix, b, x0=x0, rtol=rtol, atol=0.0, maxiter=max_iter,
        M=precondicionador, callback=contar,
    )
    if info != 0:
        norma_b = np.linalg.norm(b)
        residuo = np.linalg.norm(b - op.matrix @ x) / (norma_b if norma_b > 0 else 1.0)
        raise NonConvergenceError(iteraciones, residuo)
    logger.debug("CG: %d iteraciones (dimensión %d)", iteraciones, n)
    return x


def solve_constrained(
    op: SparseOperator,
    rhs: Vector,
    fixed: np.ndarray,
    values: Vector,
    x0: Optional[Vector] = None,
    rtol: float = 1e-10,
) -> Vector:
    """
    Elimina las incógnitas de Dirichlet y resuelve el sistema reducido.

    Args:
        op: operador sin condiciones de borde
        rhs: carga
        fixed: índices fijados
        values: valores impuestos en fixed
        x0: aproximación inicial completa opcional
        rtol: tolerancia de CG

    Returns:
        Vector completo con los valores de Dirichlet impuestos
    """
    n = op.dimension
    u = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    u[fixed] = values
    libres = np.setdiff1d(np.arange(n), fixed)
    filas = op.matrix[libres]
    b = np.asarray(rhs, dtype=float)[libres] - filas[:, fixed] @ u[fixed]
    reducido = SparseOperator(filas[:, libres], op.symmetric)
    u[libres] = solve_spd(reducido, b, x0=u[libres], rtol=rtol)
    return u


def boundary_flux(
    mesh,
    u: Vector,
    op: SparseOperator,
    rhs: Optional[Vector],
    tag: BoundaryTag,
    block: int = 0,
) -> float:
    """
    Flujo consistente: suma del residuo no restringido en los nodos Dirichlet.

    Args:
        mesh: malla
        u: solución (apilada si el operador es acoplado)
        op: operador sin condiciones de borde
        rhs: carga (None equivale a cero)
        tag: borde Dirichlet (SOURCE1 o SINK2)
        block: bloque de especie dentro del vector apilado

    Returns:
        int k grad u . n sobre el borde; para la fuente es el flujo entrante
    """
    if tag == BoundaryTag.INSULATED:
        raise ValueError("El borde aislado no tiene nodos Dirichlet")
    dofs = mesh.dirichlet_dofs(tag)
    if dofs.size == 0:
        raise ValueError(f"La etiqueta {tag.value} no tiene nodos Dirichlet")
    residuo = op.matrix @ np.asarray(u, dtype=float)
    if rhs is not None:
        residuo = residuo - rhs
    return float(residuo[dofs + block * mesh.n_dofs].sum())
