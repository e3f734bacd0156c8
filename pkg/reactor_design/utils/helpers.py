"""
Funciones auxiliares de entrada/salida: VTK legado, CSV y JSON deterministas.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FORMATO_FLOTANTE = '%.9g'


def _formatear(valores) -> str:
    return '\n'.join(FORMATO_FLOTANTE % v for v in np.ravel(valores))


def escribir_vtk(
    ruta: Union[str, Path],
    mesh,
    campos: Dict[str, np.ndarray],
    titulo: str = 'reactor_design',
) -> Path:
    """
    Escribe una malla con datos nodales en formato VTK legado ASCII.

    Args:
        ruta: archivo de salida
        mesh: malla triangular
        campos: nombre -> valores por incógnita (se expanden a nodos)
        titulo: línea de encabezado

    Returns:
        Ruta escrita
    """
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    puntos = np.column_stack([mesh.nodes, np.zeros(mesh.n_nodes)])
    partes = [
        '# vtk DataFile Version 3.0',
        titulo,
        'ASCII',
        'DATASET UNSTRUCTURED_GRID',
        f'POINTS {mesh.n_nodes} double',
        '\n'.join(' '.join(FORMATO_FLOTANTE % c for c in p) for p in puntos),
        f'CELLS {mesh.n_elements} {4 * mesh.n_elements}',
        '\n'.join(f'3 {a} {b} {c}' for a, b, c in mesh.elements),
        f'CELL_TYPES {mesh.n_elements}',
        '\n'.join(['5'] * mesh.n_elements),
        f'POINT_DATA {mesh.n_nodes}',
    ]
    for nombre, valores in campos.items():
        partes.append(f'SCALARS {nombre} double 1')
        partes.append('LOOKUP_TABLE default')
        partes.append(_formatear(mesh.expand(np.asarray(valores))))
    ruta.write_text('\n'.join(partes) + '\n', encoding='utf-8')
    logger.info("VTK escrito: %s", ruta)
    return ruta


def _primer_nodo_por_incognita(mesh) -> np.ndarray:
    _, primeros = np.unique(mesh.node_dof, return_index=True)
    return primeros


def leer_chi_vtk(ruta: Union[str, Path], mesh, nombre: str = 'chi') -> np.ndarray:
    """
    Lee el campo escalar 'chi' de un VTK escrito por escribir_vtk.

    Raises:
        ValueError: si el archivo no existe, no contiene el campo o no coincide con la malla
    """
    ruta = Path(ruta).expanduser()
    try:
        lineas = ruta.read_text(encoding='utf-8').split('\n')
    except OSError as exc:
        raise ValueError(f"No se pudo leer el VTK '{ruta}': {exc}") from exc
    cabecera = f'SCALARS {nombre} '
    inicio = next((i for i, linea in enumerate(lineas) if linea.startswith(cabecera)), None)
    if inicio is None:
        raise ValueError(f"El VTK '{ruta}' no contiene el campo '{nombre}'")
    datos = lineas[inicio + 2:inicio + 2 + mesh.n_nodes]
    try:
        valores = np.array([float(v) for v in datos])
    except ValueError as exc:
        raise ValueError(f"Valores no numéricos en el campo '{nombre}' de '{ruta}'") from exc
    if valores.size != mesh.n_nodes:
        raise ValueError(
            f"El VTK '{ruta}' tiene {valores.size} valores y la malla {mesh.n_nodes} nodos"
        )
    return valores[_primer_nodo_por_incognita(mesh)]


def leer_chi_csv(ruta: Union[str, Path], mesh) -> np.ndarray:
    """
    Muestrea un CSV tipo imagen (fila 0 arriba) en las incógnitas de la malla.

    Cada incógnita toma el píxel que contiene su coordenada dentro de la caja
    envolvente de la malla.

    Raises:
        ValueError: si el archivo no se puede leer o tiene valores fuera de [0, 1]
    """
    ruta = Path(ruta).expanduser()
    try:
        imagen = pd.read_csv(ruta, header=None).to_numpy(dtype=float)
    except (OSError, ValueError, pd.errors.ParserError) as exc:
        raise ValueError(f"No se pudo leer el CSV de diseño '{ruta}': {exc}") from exc
    if imagen.size == 0 or np.isnan(imagen).any():
        raise ValueError(f"El CSV de diseño '{ruta}' está vacío o incompleto")
    if imagen.min() < 0 or imagen.max() > 1:
        raise ValueError(f"El CSV de diseño '{ruta}' tiene valores fuera de [0, 1]")
    filas, columnas = imagen.shape
    minimo = mesh.nodes.min(axis=0)
    extension = mesh.nodes.max(axis=0) - minimo
    coords = mesh.dof_coordinates
    sx = (coords[:, 0] - minimo[0]) / extension[0]
    sy = (coords[:, 1] - minimo[1]) / extension[1]
    col = np.clip((sx * columnas).astype(int), 0, columnas - 1)
    fila = np.clip(((1.0 - sy) * filas).astype(int), 0, filas - 1)
    return imagen[fila, col]


def chi_desde_entrada(entrada: Union[float, str, None], mesh) -> np.ndarray:
    """
    Diseño desde una constante, un CSV tipo imagen o un VTK previo.

    Raises:
        ValueError: si la entrada falta o no se puede interpretar
    """
    if entrada is None:
        raise ValueError("El modo 'solve' requiere 'chi': constante, CSV o VTK")
    if isinstance(entrada, (int, float)):
        return np.full(mesh.n_dofs, float(entrada))
    ruta = Path(entrada)
    sufijo = ruta.suffix.lower()
    if sufijo == '.csv':
        return leer_chi_csv(ruta, mesh)
    if sufijo == '.vtk':
        return leer_chi_vtk(ruta, mesh)
    raise ValueError(f"Entrada de diseño '{entrada}' no reconocida (use .csv o .vtk)")


def escribir_json(ruta: Union[str, Path], datos: dict) -> Path:
    """JSON con claves ordenadas para reejecuciones idénticas byte a byte."""
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    ruta.write_text(json.dumps(datos, sort_keys=True, indent=2) + '\n', encoding='utf-8')
    logger.info("JSON escrito: %s", ruta)
    return ruta


def escribir_csv(ruta: Union[str, Path], df: pd.DataFrame) -> Path:
    """CSV separado por comas, una línea de encabezado y flotantes con 9 cifras."""
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(ruta, index=False, float_format=FORMATO_FLOTANTE, lineterminator='\n')
    logger.info("CSV escrito: %s (%d filas)", ruta, len(df))
    return ruta
