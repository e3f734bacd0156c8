"""
Caracterización explícita del funcional relajado: mezcla óptima puntual,
densidad envolvente W barra con sus regiones, identidades de comparación y
mapas en grilla de (|xi1|, |xi2|).
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from ..config import ModelParams
from ..exceptions import DegenerateReactionError
from ..types import Region

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RelaxedPoint:
    """
    Punto (v, xi) con multiplicador fijo.

    Attributes:
        v: concentraciones (v1, v2)
        xi: gradientes (2, 2), una fila por especie
        lam: multiplicador de volumen
        params: difusividades y k_s
    """

    v: Tuple[float, float]
    xi: np.ndarray
    lam: float
    params: ModelParams

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float).reshape(2, 2)
        object.__setattr__(self, 'xi', xi)
        object.__setattr__(self, 'v', (float(self.v[0]), float(self.v[1])))

    @property
    def k_v(self) -> float:
        return self.params.k_s * (self.v[0] - self.v[1]) ** 2

    @property
    def xi_cuadrado(self) -> Tuple[float, float]:
        """(|xi1|^2, |xi2|^2)."""
        return float(self.xi[0] @ self.xi[0]), float(self.xi[1] @ self.xi[1])

    @property
    def s(self) -> float:
        """S = dk1 |xi1|^2 + dk2 |xi2|^2."""
        a1, a2 = self.xi_cuadrado
        return self.params.delta_k1 * a1 + self.params.delta_k2 * a2


@dataclass(frozen=True)
class IdentityResiduals:
    """Residuos de las identidades de comparación entre W(chi*), W(0) y W(1)."""

    first: float
    second: float
    third: float
    second_printed: float

    @property
    def max_abs(self) -> float:
        """Máximo de los tres residuos que deben anularse."""
        return max(abs(self.first), abs(self.second), abs(self.third))


def _w(params: ModelParams, a1, a2, k_v, lam, chi):
    """Integrando en función de |xi_i|^2; admite arreglos."""
    k1 = chi * params.k11 + (1.0 - chi) * params.k12
    k2 = chi * params.k21 + (1.0 - chi) * params.k22
    return 0.5 * (k1 * a1 + k2 * a2) + 0.5 * chi * (1.0 - chi) * k_v - lam * chi


def _regiones(margen, k_v) -> np.ndarray:
    """Etiquetas de región para margen = S - 2 lambda."""
    margen = np.asarray(margen, dtype=float)
    k_v = np.broadcast_to(np.asarray(k_v, dtype=float), margen.shape)
    # con k_v = 0 decide el signo; el empate cae en R0
    cero = np.where(margen > 0, Region.R1.value, Region.R0.value)
    positivo = np.where(
        margen <= -k_v, Region.R0.value,
        np.where(margen >= k_v, Region.R1.value, Region.R.value),
    )
    return np.where(k_v > 0, positivo, cero)


def _w_bar(params: ModelParams, a1, a2, k_v, lam):
    """max(W(0), W(1), W(clamp chi*)); con k_v = 0 solo los extremos."""
    w0 = _w(params, a1, a2, k_v, lam, 0.0)
    w1 = _w(params, a1, a2, k_v, lam, 1.0)
    extremos = np.maximum(w0, w1)
    k_v_arr = np.asarray(k_v, dtype=float)
    if np.all(k_v_arr == 0):
        return extremos
    s = params.delta_k1 * a1 + params.delta_k2 * a2
    with np.errstate(divide='ignore', invalid='ignore'):
        chi = np.clip((s + k_v_arr - 2.0 * lam) / (2.0 * k_v_arr), 0.0, 1.0)
    interior = _w(params, a1, a2, k_v, lam, np.where(k_v_arr > 0, chi, 0.0))
    return np.where(k_v_arr > 0, np.maximum(extremos, interior), extremos)


def w_pointwise(p: RelaxedPoint, chi):
    """
    W = 1/2 sum (chi k_i1 + (1-chi) k_i2)|xi_i|^2 + 1/2 chi(1-chi) k_v - lambda chi.

    Args:
        p: punto relajado
        chi: fracción de material 1 (escalar o arreglo)

    Returns:
        Valor del integrando, con la forma de chi
    """
    a1, a2 = p.xi_cuadrado
    valor = _w(p.params, a1, a2, p.k_v, p.lam, chi)
    return float(valor) if np.ndim(valor) == 0 else valor


def chi_star(p: RelaxedPoint) -> float:
    """
    Maximizador sin recortar chi* = (S + k_v - 2 lambda) / (2 k_v).

    Raises:
        DegenerateReactionError: si v1 = v2 (W lineal en chi)
    """
    k_v = p.k_v
    if k_v == 0:
        raise DegenerateReactionError("k_v = 0: W es lineal en chi y chi* no está definido")
    return (p.s + k_v - 2.0 * p.lam) / (2.0 * k_v)


def region_classify(p: RelaxedPoint) -> Region:
    """R0 si S - 2 lambda <= -k_v, R1 si >= k_v, R en otro caso."""
    return Region(str(_regiones(p.s - 2.0 * p.lam, p.k_v)))


def w_bar(p: RelaxedPoint) -> Tuple[float, Region]:
    """
    Densidad relajada W barra = max_chi W(p, chi) y su región.

    Args:
        p: punto relajado

    Returns:
        Tupla (valor, región)
    """
    a1, a2 = p.xi_cuadrado
    valor = float(_w_bar(p.params, a1, a2, p.k_v, p.lam))
    return valor, region_classify(p)


def w_bar_closed_form(p: RelaxedPoint) -> float:
    """
    Forma cerrada de W(chi*) válida en la región de mezcla.

    [S^2 + 2 sum |xi_i|^2 (k_v (k_i1 + k_i2) - 2 lambda dk_i) + (k_v - 2 lambda)^2] / (8 k_v)
    """
    k_v = p.k_v
    if k_v == 0:
        raise DegenerateReactionError("k_v = 0: la forma cerrada divide por k_v")
    prm = p.params
    a1, a2 = p.xi_cuadrado
    lam = p.lam
    suma = (
        a1 * (k_v * (prm.k11 + prm.k12) - 2.0 * lam * prm.delta_k1)
        + a2 * (k_v * (prm.k21 + prm.k22) - 2.0 * lam * prm.delta_k2)
    )
    return (p.s ** 2 + 2.0 * suma + (k_v - 2.0 * lam) ** 2) / (8.0 * k_v)


def verify_identities(p: RelaxedPoint) -> IdentityResiduals:
    """
    Residuos de las identidades de comparación.

    first:  W(chi*) - W(0) - (k_v/2) chi*^2
    second: W(chi*) - W(1) - (k_v/2)(chi* - 1)^2
    third:  W(1) - W(0) - (S - 2 lambda)/2
    second_printed: igual que second con el coeficiente 1/4 en lugar de k_v/2

    Raises:
        DegenerateReactionError: si k_v = 0
    """
    c = chi_star(p)
    k_v = p.k_v
    w_c = w_pointwise(p, c)
    w0 = w_pointwise(p, 0.0)
    w1 = w_pointwise(p, 1.0)
    return IdentityResiduals(
        first=w_c - w0 - 0.5 * k_v * c ** 2,
        second=w_c - w1 - 0.5 * k_v * (c - 1.0) ** 2,
        third=w1 - w0 - 0.5 * (p.s - 2.0 * p.lam),
        second_printed=w_c - w1 - 0.25 * (c - 1.0) ** 2,
    )


def wbar_map(
    params: ModelParams,
    v_pair: Tuple[float, float],
    lam: float,
    xi_max: float = 3.0,
    resolution: int = 121,
) -> pd.DataFrame:
    """
    Evalúa W barra en la grilla (|xi1|, |xi2|) en [0, xi_max]^2.

    Args:
        params: difusividades y k_s
        v_pair: concentraciones (v1, v2)
        lam: multiplicador
        xi_max: extremo de la grilla
        resolution: puntos por eje

    Returns:
        DataFrame con columnas xi1, xi2, wbar, region (xi1 varía más rápido)
    """
    if resolution < 2 or xi_max <= 0:
        raise ValueError("wbar_map requiere resolution >= 2 y xi_max > 0")
    eje = np.linspace(0.0, xi_max, resolution)
    xi2, xi1 = np.meshgrid(eje, eje, indexing='ij')
    xi1 = xi1.ravel()
    xi2 = xi2.ravel()
    a1 = xi1 ** 2
    a2 = xi2 ** 2
    k_v = params.k_s * (v_pair[0] - v_pair[1]) ** 2
    s = params.delta_k1 * a1 + params.delta_k2 * a2
    mapa = pd.DataFrame({
        'xi1': xi1,
        'xi2': xi2,
        'wbar': _w_bar(params, a1, a2, k_v, lam),
        'region': _regiones(s - 2.0 * lam, k_v),
    })
    logger.debug(
        "Mapa W barra: %d puntos, %d en la región de mezcla",
        len(mapa), int((mapa['region'] == Region.R.value).sum()),
    )
    return mapa
