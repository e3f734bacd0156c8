"""
Clase base abstracta para constructores de mallas estructuradas.
"""
import logging
from abc import ABC, abstractmethod
from typing import Callable, Optional, Tuple

import numpy as np

from ..contracts import IMeshBuilder
from ..types import BoundaryTag

logger = logging.getLogger(__name__)


class BaseMeshBuilder(IMeshBuilder, ABC):
    """
    Clase base para constructores de mallas.
    Implementa la grilla triangulada común a los tres escenarios y la
    verificación de invariantes de la malla resultante.
    """

    nombre = 'malla'

    def build(self):
        """
        Construye la malla del escenario.

        Returns:
            Mesh inmutable con bordes etiquetados
        """
        from .mesh import Mesh

        self.validar_parametros()
        nodos, elementos, aristas, etiquetas, pares = self._generar()
        malla = Mesh(
            nodes=nodos,
            elements=elementos,
            boundary_edges=aristas,
            boundary_tags=tuple(etiquetas),
            periodic_pairs=pares,
        )
        self._validar_malla(malla)
        logger.info(
            "Malla %s: %d nodos, %d incógnitas, %d triángulos, %d aristas de borde",
            self.nombre, malla.n_nodes, malla.n_dofs, malla.n_elements, len(malla.boundary_edges),
        )
        return malla

    @abstractmethod
    def _generar(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, list, Optional[np.ndarray]]:
        """Implementar en subclases: (nodos, elementos, aristas, etiquetas, pares)."""
        pass

    @staticmethod
    def _indice(i, j, ni: int):
        """Índice del nodo (i, j) en una grilla con ni celdas en la dirección i."""
        return j * (ni + 1) + i

    def _grilla(
        self,
        ni: int,
        nj: int,
        mapeo: Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]],
        paridad: Callable[[np.ndarray, np.ndarray], np.ndarray],
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Genera una grilla paramétrica (s, t) en [0,1]^2 dividida en triángulos.

        Args:
            ni, nj: celdas en cada dirección paramétrica
            mapeo: función (s, t) -> (x, y) que conserva la orientación
            paridad: función (i, j) -> bool; True divide la celda por la diagonal a-c

        Returns:
            Tupla (nodos (N,2), elementos (E,3)) en sentido antihorario
        """
        jj, ii = np.meshgrid(np.arange(nj + 1), np.arange(ni + 1), indexing='ij')
        s = ii.ravel() / ni
        t = jj.ravel() / nj
        x, y = mapeo(s, t)
        nodos = np.column_stack([x, y])

        cj, ci = np.meshgrid(np.arange(nj), np.arange(ni), indexing='ij')
        ci = ci.ravel()
        cj = cj.ravel()
        a = self._indice(ci, cj, ni)
        b = self._indice(ci + 1, cj, ni)
        c = self._indice(ci + 1, cj + 1, ni)
        d = self._indice(ci, cj + 1, ni)
        diagonal = paridad(ci, cj)[:, None]
        tri1 = np.where(diagonal, np.column_stack([a, b, c]), np.column_stack([a, b, d]))
        tri2 = np.where(diagonal, np.column_stack([a, c, d]), np.column_stack([b, c, d]))
        elementos = np.stack([tri1, tri2], axis=1).reshape(-1, 3)
        return nodos, elementos

    @staticmethod
    def _aristas_lado(indices: np.ndarray) -> np.ndarray:
        """Aristas consecutivas a lo largo de una lista ordenada de nodos."""
        return np.column_stack([indices[:-1], indices[1:]])

    def _validar_malla(self, malla) -> None:
        """Verifica que cada arista de borde pertenezca a exactamente un elemento."""
        n = malla.n_nodes
        lados = np.sort(malla.elements[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        claves, cuentas = np.unique(lados[:, 0] * n + lados[:, 1], return_counts=True)
        borde = np.sort(malla.boundary_edges, axis=1)
        claves_borde = borde[:, 0] * n + borde[:, 1]
        pos = np.searchsorted(claves, claves_borde)
        pos = np.minimum(pos, len(claves) - 1)
        if not np.all((claves[pos] == claves_borde) & (cuentas[pos] == 1)):
            raise ValueError(f"Malla {self.nombre}: hay aristas de borde que no pertenecen a un único elemento")


def etiquetas_iguales(cantidad: int, etiqueta: BoundaryTag) -> list:
    """Lista de etiquetas repetidas para un lado completo."""
    return [etiqueta] * cantidad
