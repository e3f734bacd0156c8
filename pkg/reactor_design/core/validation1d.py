"""
Verificaciones unidimensionales de interfaz nítida y difusa: resistencia en
serie, flujo del perfil difuso por elementos finitos, oráculo de volúmenes
finitos en grilla fina y condición de flujo interfacial.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy.linalg import solve_banded

from ..config import ModelParams
from ..types import Flujo1D

logger = logging.getLogger(__name__)

# Cuadratura de Gauss de 3 puntos en [0, 1]
_GAUSS_X = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GAUSS_W = np.array([5.0, 8.0, 5.0]) / 18.0

OFFDIAG_1D = 1e-6
N_ORACULO = 100_000


@dataclass(frozen=True)
class Profile1D:
    """
    Perfil de diseño en [0, 1]: material 1 a la izquierda de s.

    Attributes:
        n: nodos de la grilla
        s: posición de la interfaz
        w: ancho de la rampa lineal (0 para escalón)
        params: difusividades y reacción
    """

    n: int
    s: float = 0.5
    w: float = 0.0
    params: ModelParams = field(default_factory=ModelParams)

    def __post_init__(self):
        """Validación post-inicialización."""
        if self.n < 3:
            raise ValueError(f"Se requieren al menos 3 nodos (recibido {self.n})")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s debe estar en (0, 1) (recibido {self.s})")
        if self.w < 0:
            raise ValueError("El ancho de rampa no puede ser negativo")
        if self.w > 0:
            if self.w < 2.0 / (self.n - 1):
                raise ValueError(
                    f"La rampa w={self.w} debe cubrir al menos 2 celdas (h={1.0 / (self.n - 1):.3g})"
                )
            if self.s - self.w / 2 <= 0 or self.s + self.w / 2 >= 1:
                raise ValueError("La rampa debe quedar dentro de (0, 1)")

    @classmethod
    def rampa(cls, n: int, w: float, kappa: float, k1: float = 1.0, k2: float = 1.0,
              s: float = 0.5) -> 'Profile1D':
        """Rampa con k_s elegido para que la conductancia efectiva sea kappa."""
        params = ModelParams(k11=k1, k12=OFFDIAG_1D, k21=OFFDIAG_1D, k22=k2, k_s=6.0 * kappa / w)
        return cls(n=n, s=s, w=w, params=params)

    @property
    def is_step(self) -> bool:
        return self.w == 0

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def chi_at(self, x) -> np.ndarray:
        """chi analítico: 1 a la izquierda, 0 a la derecha."""
        x = np.asarray(x, dtype=float)
        if self.is_step:
            return (x < self.s).astype(float)
        return np.clip((self.s + self.w / 2 - x) / self.w, 0.0, 1.0)

    @property
    def chi(self) -> np.ndarray:
        return self.chi_at(self.x)

    @property
    def kappa_eff(self) -> float:
        """k_s int chi(1-chi) dx; para la rampa lineal vale k_s w / 6."""
        return self.params.k_s * self.w / 6.0

    @property
    def bordes(self) -> Tuple[float, float]:
        """Extremos de la rampa donde se leen u1 barra y u2 barra."""
        return self.s - self.w / 2, self.s + self.w / 2


def _resolver_interpolado(n: int, filas, columnas, valores, fijos, valores_fijos):
    """
    Resuelve el sistema de dos especies intercalado (u1_j -> 2j, u2_j -> 2j+1).

    Las filas fijas se sustituyen por la identidad. Devuelve la solución y el
    residuo de la matriz sin condiciones de borde.
    """
    dim = 2 * n
    filas = np.asarray(filas)
    columnas = np.asarray(columnas)
    valores = np.asarray(valores, dtype=float)
    matriz = sp.coo_matrix((valores, (filas, columnas)), shape=(dim, dim)).tocsr()

    banda = np.zeros((7, dim))
    libres = ~np.isin(filas, fijos)
    np.add.at(banda, (3 + filas[libres] - columnas[libres], columnas[libres]), valores[libres])
    banda[3, fijos] = 1.0
    rhs = np.zeros(dim)
    rhs[fijos] = valores_fijos
    u = solve_banded((3, 3), banda, rhs)
    return u, matriz @ u


def _ensamblar_1d(x: np.ndarray, k1_e, k2_e, locales_reaccion):
    """Tripletes (filas, columnas, valores) de rigidez y reacción intercaladas."""
    h = np.diff(x)
    e = np.arange(len(h))
    nodos = np.column_stack([e, e + 1])
    rig = np.array([[1.0, -1.0], [-1.0, 1.0]])
    filas, columnas, valores = [], [], []
    for a in range(2):
        for b in range(2):
            ia = nodos[:, a]
            ib = nodos[:, b]
            # difusión de cada especie
            for especie, k in ((0, k1_e), (1, k2_e)):
                filas.append(2 * ia + especie)
                columnas.append(2 * ib + especie)
                valores.append(k * rig[a, b] / h)
            # acoplamiento [[C, -C], [-C, C]]
            c = locales_reaccion[:, a, b]
            for fi, co, signo in ((0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)):
                filas.append(2 * ia + fi)
                columnas.append(2 * ib + co)
                valores.append(signo * c)
    return np.concatenate(filas), np.concatenate(columnas), np.concatenate(valores)


def _condiciones(n: int, params: ModelParams):
    """u1 fijo en x = 0 y u2 fijo en x = 1."""
    fijos = np.array([0, 2 * (n - 1) + 1])
    return fijos, np.array([params.u1_star, params.u2_star], dtype=float)


def _leer_flujo(profile: Profile1D, x, u, residuo):
    n = len(x)
    j_entrada = float(residuo[0])
    j_salida = -float(residuo[2 * (n - 1) + 1])
    u1, u2 = u[0::2], u[1::2]
    izquierda, derecha = profile.bordes
    return j_entrada, j_salida, float(np.interp(izquierda, x, u1)), float(np.interp(derecha, x, u2))


def _solucion_fem(profile: Profile1D):
    """Elementos P1 con chi analítico en 3 puntos de Gauss por elemento."""
    x = profile.x
    prm = profile.params
    h = np.diff(x)
    xg = x[:-1, None] + h[:, None] * _GAUSS_X[None, :]
    chi_g = profile.chi_at(xg)
    k1_e = prm.k1(chi_g) @ _GAUSS_W
    k2_e = prm.k2(chi_g) @ _GAUSS_W
    base = np.stack([1.0 - _GAUSS_X, _GAUSS_X])
    peso = prm.k_s * chi_g * (1.0 - chi_g) * _GAUSS_W[None, :] * h[:, None]
    locales = np.einsum('eg,ag,bg->eab', peso, base, base)
    filas, columnas, valores = _ensamblar_1d(x, k1_e, k2_e, locales)
    fijos, valores_fijos = _condiciones(profile.n, prm)
    u, residuo = _resolver_interpolado(profile.n, filas, columnas, valores, fijos, valores_fijos)
    return _leer_flujo(profile, x, u, residuo)


def diffuse_flux_1d(profile: Profile1D) -> Flujo1D:
    """
    Resuelve el sistema difuso 1D de dos especies con elementos P1.

    Args:
        profile: perfil de diseño y parámetros

    Returns:
        Tupla (J entrante en x = 0, u1 barra en s - w/2, u2 barra en s + w/2)
    """
    j, _, u1_bar, u2_bar = _solucion_fem(profile)
    return j, u1_bar, u2_bar


def diffuse_flux_ends(profile: Profile1D) -> Tuple[float, float]:
    """Flujo entrante de la especie 1 en x = 0 y saliente de la especie 2 en x = 1."""
    j_entrada, j_salida, _, _ = _solucion_fem(profile)
    return j_entrada, j_salida


def diffuse_flux_fd(profile: Profile1D, n: int = N_ORACULO) -> Flujo1D:
    """
    Oráculo de volúmenes finitos centrados en nodos sobre una grilla fina.

    Difusividad en los puntos medios de las caras y reacción nodal concentrada.

    Args:
        profile: perfil (se usa su chi analítico, no su resolución)
        n: nodos de la grilla del oráculo

    Returns:
        Tupla (J, u1 barra, u2 barra) como diffuse_flux_1d
    """
    fino = Profile1D(n=n, s=profile.s, w=profile.w, params=profile.params)
    x = fino.x
    prm = fino.params
    caras = 0.5 * (x[:-1] + x[1:])
    chi_c = fino.chi_at(caras)
    volumen = np.zeros(n)
    h = np.diff(x)
    volumen[:-1] += h / 2
    volumen[1:] += h / 2
    chi_n = fino.chi_at(x)
    reaccion = prm.k_s * chi_n * (1.0 - chi_n) * volumen
    # reacción diagonal: se reparte como matriz local diagonal sobre el nodo izquierdo de cada celda
    locales = np.zeros((n - 1, 2, 2))
    locales[:, 0, 0] = reaccion[:-1]
    locales[-1, 1, 1] = reaccion[-1]
    filas, columnas, valores = _ensamblar_1d(x, prm.k1(chi_c), prm.k2(chi_c), locales)
    fijos, valores_fijos = _condiciones(n, prm)
    u, residuo = _resolver_interpolado(n, filas, columnas, valores, fijos, valores_fijos)
    j, _, u1_bar, u2_bar = _leer_flujo(fino, x, u, residuo)
    return j, u1_bar, u2_bar


def sharp_flux_analytic(K1: float, K2: float, k_s: float, s: float,
                        u1_star: float = 1.0, u2_star: float = 0.0) -> float:
    """
    Flujo exacto del sistema nítido 1D como resistencias en serie.

    J = (u1* - u2*) / (s/K1 + (1-s)/K2 + 1/k_s)
    """
    if K1 <= 0 or K2 <= 0 or k_s <= 0:
        raise ValueError("K1, K2 y k_s deben ser positivos")
    if not 0.0 < s < 1.0:
        raise ValueError(f"s debe estar en (0, 1) (recibido {s})")
    return (u1_star - u2_star) / (s / K1 + (1.0 - s) / K2 + 1.0 / k_s)


def sharp_flux_fd(K1: float, K2: float, k_s: float, s: float,
                  u1_star: float = 1.0, u2_star: float = 0.0, n: int = 1000) -> float:
    """
    Diferencias finitas del sistema nítido con condición de Robin en la interfaz.

    La especie 1 vive en [0, s] y la 2 en [s, 1]; ambas tienen un nodo en s.

    Args:
        K1, K2: difusividades de cada especie en su material
        k_s: conductancia interfacial
        s: posición de la interfaz
        u1_star, u2_star: valores de Dirichlet
        n: celdas totales

    Returns:
        Flujo entrante de la especie 1 en x = 0
    """
    n1 = max(1, int(round(s * n)))
    n2 = max(1, n - n1)
    h1 = s / n1
    h2 = (1.0 - s) / n2
    dim = n1 + n2 + 2
    a1 = K1 / h1
    a2 = K2 / h2
    banda = np.zeros((3, dim))  # filas: superdiagonal, diagonal, subdiagonal
    rhs = np.zeros(dim)

    def fijar(i, j, valor):
        banda[1 + i - j, j] += valor

    fijar(0, 0, 1.0)
    rhs[0] = u1_star
    for i in range(1, n1 + 1):
        fijar(i, i - 1, -a1)
        fijar(i, i, a1)
        if i < n1:
            fijar(i, i + 1, -a1)
            fijar(i, i, a1)
    # interfaz: u1_n1 <-> u2_0
    i1, i2 = n1, n1 + 1
    fijar(i1, i1, k_s)
    fijar(i1, i2, -k_s)
    fijar(i2, i1, -k_s)
    fijar(i2, i2, k_s)
    for j in range(0, n2):
        i = i2 + j
        if j > 0:
            fijar(i, i - 1, -a2)
            fijar(i, i, a2)
        fijar(i, i + 1, -a2)
        fijar(i, i, a2)
    ultimo = dim - 1
    fijar(ultimo, ultimo, 1.0)
    rhs[ultimo] = u2_star
    u = solve_banded((1, 1), banda, rhs)
    return float(a1 * (u[0] - u[1]))


def flux_condition_residual(profile: Profile1D) -> float:
    """
    Residuo relativo |J - kappa_eff (u1 barra - u2 barra)| / J.

    Raises:
        ValueError: si el perfil es un escalón (sin rampa no hay kappa_eff)
    """
    if profile.is_step:
        raise ValueError("La condición de flujo requiere un perfil con rampa (w > 0)")
    j, u1_bar, u2_bar = diffuse_flux_1d(profile)
    if j == 0:
        return 0.0
    return abs(j - profile.kappa_eff * (u1_bar - u2_bar)) / abs(j)


def convergence_table(
    widths: Iterable[float] = (0.08, 0.04, 0.02),
    ns: Iterable[int] = (256, 1024, 4096),
    kappa: float = 1.0,
    k1: float = 1.0,
    k2: float = 1.0,
    s: float = 0.5,
) -> pd.DataFrame:
    """
    Tabla de convergencia (w, n, J, residual) a conductancia efectiva fija.

    Las combinaciones con rampas de menos de 2 celdas se omiten.
    """
    filas = []
    for w in widths:
        for n in ns:
            if w < 2.0 / (n - 1):
                logger.debug("Se omite w=%.3g con n=%d: rampa no resuelta", w, n)
                continue
            perfil = Profile1D.rampa(n, w, kappa, k1, k2, s)
            j, _, _ = diffuse_flux_1d(perfil)
            filas.append({'w': w, 'n': n, 'J': j, 'residual': flux_condition_residual(perfil)})
    return pd.DataFrame(filas, columns=['w', 'n', 'J', 'residual'])
