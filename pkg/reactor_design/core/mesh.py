"""
Mallas trianguladas 2D etiquetadas para los escenarios del reactor:
cuadrado, anillo y celda periódica.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .base import BaseMeshBuilder, etiquetas_iguales
from ..types import BoundaryTag

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Malla de triángulos P1 inmutable.

    Attributes:
        nodes: coordenadas (N, 2)
        elements: triángulos (E, 3) en sentido antihorario
        boundary_edges: aristas de borde (B, 2)
        boundary_tags: una BoundaryTag por arista de borde
        periodic_pairs: pares (maestro, esclavo) identificados, o None
    """

    nodes: np.ndarray
    elements: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: Tuple[BoundaryTag, ...]
    periodic_pairs: Optional[np.ndarray] = None

    def __post_init__(self):
        """Congela los arreglos y verifica orientación y etiquetas."""
        nodos = np.array(self.nodes, dtype=float).reshape(-1, 2)
        elementos = np.array(self.elements, dtype=np.int64).reshape(-1, 3)
        aristas = np.array(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        etiquetas = tuple(BoundaryTag(e) for e in self.boundary_tags)
        pares = None
        if self.periodic_pairs is not None and len(self.periodic_pairs) > 0:
            pares = np.array(self.periodic_pairs, dtype=np.int64).reshape(-1, 2)
        for arreglo in (nodos, elementos, aristas) + ((pares,) if pares is not None else ()):
            arreglo.setflags(write=False)
        object.__setattr__(self, 'nodes', nodos)
        object.__setattr__(self, 'elements', elementos)
        object.__setattr__(self, 'boundary_edges', aristas)
        object.__setattr__(self, 'boundary_tags', etiquetas)
        object.__setattr__(self, 'periodic_pairs', pares)

        if len(etiquetas) != len(aristas):
            raise ValueError("Cada arista de borde necesita exactamente una etiqueta")
        if np.any(self.areas <= 0):
            raise ValueError("Hay elementos con área con signo no positiva")
        if pares is not None:
            # los pares deben coincidir salvo una traslación de la red
            delta = nodos[pares[:, 1]] - nodos[pares[:, 0]]
            if not np.allclose(delta, np.round(delta), atol=1e-9):
                raise ValueError("Los pares periódicos no coinciden salvo traslación de la red")

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def n_dofs(self) -> int:
        return int(self.node_dof.max()) + 1 if self.n_nodes else 0

    @cached_property
    def node_dof(self) -> np.ndarray:
        """Incógnita asociada a cada nodo (una por grupo de nodos identificados)."""
        if self.periodic_pairs is None:
            return np.arange(self.n_nodes)
        pares = self.periodic_pairs
        grafo = coo_matrix(
            (np.ones(len(pares)), (pares[:, 0], pares[:, 1])),
            shape=(self.n_nodes, self.n_nodes),
        )
        _, etiquetas = connected_components(grafo, directed=False)
        # renumerar por primera aparición para que el orden sea estable
        _, primero, inversa = np.unique(etiquetas, return_index=True, return_inverse=True)
        orden = np.argsort(np.argsort(primero))
        return orden[inversa]

    @cached_property
    def element_dofs(self) -> np.ndarray:
        """Incógnitas de cada elemento (E, 3)."""
        return self.node_dof[self.elements]

    @cached_property
    def dof_coordinates(self) -> np.ndarray:
        """Coordenadas del primer nodo de cada grupo identificado."""
        _, primero = np.unique(self.node_dof, return_index=True)
        return self.nodes[primero]

    @cached_property
    def areas(self) -> np.ndarray:
        """Área con signo de cada triángulo."""
        p = self.nodes[self.elements]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @cached_property
    def gradients(self) -> np.ndarray:
        """Gradientes constantes de las funciones base P1, forma (E, 3, 2)."""
        p = self.nodes[self.elements]
        x, y = p[..., 0], p[..., 1]
        dos_a = 2.0 * self.areas
        gx = np.column_stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]])
        gy = np.column_stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]])
        return np.stack([gx, gy], axis=-1) / dos_a[:, None, None]

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def edges_with_tag(self, tag: BoundaryTag) -> np.ndarray:
        """Aristas de borde con la etiqueta dada."""
        mascara = np.array([t == tag for t in self.boundary_tags], dtype=bool)
        return self.boundary_edges[mascara]

    def tagged_nodes(self, tag: BoundaryTag) -> np.ndarray:
        """Nodos (sin identificar) sobre aristas con la etiqueta dada."""
        return np.unique(self.edges_with_tag(tag).ravel())

    def dirichlet_dofs(self, tag: BoundaryTag) -> np.ndarray:
        """Incógnitas distintas sobre el borde etiquetado."""
        return np.unique(self.node_dof[self.tagged_nodes(tag)])

    def expand(self, campo: np.ndarray) -> np.ndarray:
        """Lleva un campo por incógnita a todos los nodos geométricos."""
        return np.asarray(campo)[self.node_dof]


class RectangleBuilder(BaseMeshBuilder):
    """Cuadrado unitario: fuente a la izquierda, sumidero a la derecha."""

    nombre = 'cuadrado'

    def __init__(self, nx: int, ny: int):
        self.nx = nx
        self.ny = ny

    def validar_parametros(self) -> None:
        for nombre in ('nx', 'ny'):
            valor = getattr(self, nombre)
            if not isinstance(valor, (int, np.integer)) or valor < 2:
                raise ValueError(f"'{nombre}' debe ser un entero >= 2 (recibido {valor})")

    def _generar(self):
        nx, ny = self.nx, self.ny
        nodos, elementos = self._grilla(
            nx, ny,
            mapeo=lambda s, t: (s, t),
            paridad=lambda i, j: (i + j) % 2 == 0,
        )
        idx = self._indice
        abajo = self._aristas_lado(idx(np.arange(nx + 1), 0, nx))
        arriba = self._aristas_lado(idx(np.arange(nx + 1), ny, nx))
        izquierda = self._aristas_lado(idx(0, np.arange(ny + 1), nx))
        derecha = self._aristas_lado(idx(nx, np.arange(ny + 1), nx))
        aristas = np.vstack([izquierda, derecha, abajo, arriba])
        etiquetas = (
            etiquetas_iguales(ny, BoundaryTag.SOURCE1)
            + etiquetas_iguales(ny, BoundaryTag.SINK2)
            + etiquetas_iguales(2 * nx, BoundaryTag.INSULATED)
        )
        return nodos, elementos, aristas, etiquetas, None


class AnnulusBuilder(BaseMeshBuilder):
    """Anillo r_in < r < r_out, periódico en theta; fuente interior, sumidero exterior."""

    nombre = 'anillo'

    def __init__(self, nr: int, ntheta: int, r_in: float, r_out: float):
        self.nr = nr
        self.ntheta = ntheta
        self.r_in = r_in
        self.r_out = r_out

    def validar_parametros(self) -> None:
        if not 0 < self.r_in < self.r_out:
            raise ValueError(f"Radios degenerados: se requiere 0 < r_in < r_out (r_in={self.r_in}, r_out={self.r_out})")
        if not isinstance(self.nr, (int, np.integer)) or self.nr < 1:
            raise ValueError(f"'nr' debe ser un entero positivo (recibido {self.nr})")
        if not isinstance(self.ntheta, (int, np.integer)) or self.ntheta < 8:
            raise ValueError(f"'ntheta' debe ser un entero >= 8 (recibido {self.ntheta})")

    def _generar(self):
        nr, nt = self.nr, self.ntheta
        r_in, r_out = self.r_in, self.r_out

        def mapeo(s, t):
            r = r_in + (r_out - r_in) * s
            theta = 2.0 * math.pi * t
            return r * np.cos(theta), r * np.sin(theta)

        # alternancia solo radial: la rotación en una celda es simetría exacta
        nodos, elementos = self._grilla(nr, nt, mapeo=mapeo, paridad=lambda i, j: i % 2 == 0)
        idx = self._indice
        interior = self._aristas_lado(idx(0, np.arange(nt + 1), nr))
        exterior = self._aristas_lado(idx(nr, np.arange(nt + 1), nr))
        aristas = np.vstack([interior, exterior])
        etiquetas = etiquetas_iguales(nt, BoundaryTag.SOURCE1) + etiquetas_iguales(nt, BoundaryTag.SINK2)
        radios = np.arange(nr + 1)
        pares = np.column_stack([idx(radios, 0, nr), idx(radios, nt, nr)])
        # la costura theta = 2 pi se identifica exactamente con theta = 0
        nodos[pares[:, 1]] = nodos[pares[:, 0]]
        return nodos, elementos, aristas, etiquetas, pares


class PeriodicCellBuilder(BaseMeshBuilder):
    """
    Celda unitaria periódica con fuentes en las esquinas y sumidero central.
    Los discos se aproximan en escalera eliminando elementos.
    """

    nombre = 'celda periódica'
    celdas_minimas_por_radio = 4

    def __init__(self, n: int, r_source: float, r_sink: float):
        self.n = n
        self.r_source = r_source
        self.r_sink = r_sink

    def validar_parametros(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 16:
            raise ValueError(f"'n' debe ser un entero >= 16 (recibido {self.n})")
        if self.r_source <= 0 or self.r_sink <= 0:
            raise ValueError("Los radios de fuente y sumidero deben ser positivos")
        if self.r_source + self.r_sink >= 0.5:
            raise ValueError(
                f"Discos superpuestos: r_source + r_sink = {self.r_source + self.r_sink} >= 0.5"
            )
        if min(self.r_source, self.r_sink) * self.n < self.celdas_minimas_por_radio:
            raise ValueError(
                f"Malla demasiado gruesa: se requieren al menos {self.celdas_minimas_por_radio} "
                f"celdas por radio (n={self.n})"
            )

    def _generar(self):
        n = self.n
        nodos, elementos = self._grilla(
            n, n,
            mapeo=lambda s, t: (s, t),
            paridad=lambda i, j: (i + j) % 2 == 0,
        )
        centroides = nodos[elementos].mean(axis=1)
        cx, cy = centroides[:, 0], centroides[:, 1]
        d_esquina = np.hypot(np.minimum(cx, 1.0 - cx), np.minimum(cy, 1.0 - cy))
        en_fuente = d_esquina < self.r_source
        en_sumidero = np.hypot(cx - 0.5, cy - 0.5) < self.r_sink
        removidos = en_fuente | en_sumidero

        n_nodos = len(nodos)
        lados = np.sort(elementos[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 3, 2), axis=2)
        claves = lados[..., 0] * n_nodos + lados[..., 1]

        # aristas de elementos removidos -> etiqueta del disco
        claves_rem = claves[removidos].ravel()
        tags_rem = np.repeat(np.where(en_fuente[removidos], 0, 1), 3)
        claves_rem, primero = np.unique(claves_rem, return_index=True)
        tags_rem = tags_rem[primero]

        kept = elementos[~removidos]
        lados_kept = lados[~removidos].reshape(-1, 2)
        claves_kept = claves[~removidos].ravel()
        expuestas = np.isin(claves_kept, claves_rem)
        aristas = lados_kept[expuestas]
        codigos = tags_rem[np.searchsorted(claves_rem, claves_kept[expuestas])]
        etiquetas = [BoundaryTag.SOURCE1 if c == 0 else BoundaryTag.SINK2 for c in codigos]

        idx = self._indice
        k = np.arange(n + 1)
        pares = np.vstack([
            np.column_stack([idx(0, k, n), idx(n, k, n)]),
            np.column_stack([idx(k, 0, n), idx(k, n, n)]),
        ])

        # compactar: descartar nodos que solo tocan elementos removidos
        usados = np.unique(kept.ravel())
        nuevo = np.full(n_nodos, -1, dtype=np.int64)
        nuevo[usados] = np.arange(len(usados))
        pares = pares[(nuevo[pares[:, 0]] >= 0) & (nuevo[pares[:, 1]] >= 0)]
        return nodos[usados], nuevo[kept], nuevo[aristas], etiquetas, nuevo[pares]


def build_rectangle(nx: int, ny: int) -> Mesh:
    """
    Construye el cuadrado unitario (0,1)^2 con nx x ny celdas cruzadas.

    Args:
        nx, ny: celdas en x e y (>= 2)

    Returns:
        Mesh con (nx+1)(ny+1) nodos y 2 nx ny triángulos
    """
    return RectangleBuilder(nx, ny).build()


def build_annulus(nr: int, ntheta: int, r_in: float, r_out: float) -> Mesh:
    """
    Construye el anillo r_in < r < r_out, periódico en theta.

    Args:
        nr: celdas radiales
        ntheta: celdas angulares (>= 8)
        r_in, r_out: radios interior (fuente) y exterior (sumidero)

    Returns:
        Mesh con la costura identificada por periodic_pairs
    """
    return AnnulusBuilder(nr, ntheta, r_in, r_out).build()


def build_periodic_cell(n: int, r_source: float, r_sink: float) -> Mesh:
    """
    Construye la celda periódica con fuentes en las esquinas y sumidero central.

    Args:
        n: celdas por lado (>= 16)
        r_source: radio de los cuartos de disco de las esquinas
        r_sink: radio del disco central

    Returns:
        Mesh totalmente periódica con bordes de disco en escalera
    """
    return PeriodicCellBuilder(n, r_source, r_sink).build()


def build_scenario(escenario: str, config) -> Mesh:
    """Malla del escenario con la resolución de un MeshConfig."""
    if escenario == 'square':
        return build_rectangle(config.nx, config.ny)
    if escenario == 'annulus':
        return build_annulus(config.nr, config.ntheta, config.r_in, config.r_out)
    if escenario == 'periodic':
        return build_periodic_cell(config.n, config.r_source, config.r_sink)
    raise ValueError(f"Escenario '{escenario}' no válido")
