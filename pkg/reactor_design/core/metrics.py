"""
Métricas de morfología del diseño y comparación entre corridas.
"""
from typing import Dict, Optional

import numpy as np
import pandas as pd

from ..types import DesignField, EnergyReport
from .fem import lumped_mass


def contraste_lateral(mesh, chi: DesignField, corte: float = 0.5) -> float:
    """
    Media de chi en x < corte menos la media en x > corte, ponderada por área.

    Args:
        mesh: malla (se usan las coordenadas de las incógnitas)
        chi: diseño nodal
        corte: abscisa de separación

    Returns:
        Contraste; positivo si el material 1 está a la izquierda
    """
    x = mesh.dof_coordinates[:, 0]
    pesos = lumped_mass(mesh)
    izquierda = x < corte
    derecha = x > corte
    if not izquierda.any() or not derecha.any():
        return 0.0
    return float(
        np.average(chi[izquierda], weights=pesos[izquierda])
        - np.average(chi[derecha], weights=pesos[derecha])
    )


def posicion_interfaz(mesh, chi: DesignField, nivel: float = 0.5) -> Optional[float]:
    """
    Abscisa donde el promedio por columna de chi cruza el nivel dado.

    Returns:
        x del primer cruce descendente (interpolado linealmente) o None
    """
    coords = mesh.dof_coordinates
    columnas = pd.DataFrame({'x': np.round(coords[:, 0], 12), 'chi': chi})
    perfil = columnas.groupby('x')['chi'].mean().sort_index()
    x = perfil.index.to_numpy()
    valores = perfil.to_numpy() - nivel
    cruces = np.nonzero((valores[:-1] >= 0) & (valores[1:] < 0))[0]
    if cruces.size == 0:
        return None
    i = cruces[0]
    t = valores[i] / (valores[i] - valores[i + 1])
    return float(x[i] + t * (x[i + 1] - x[i]))


def area_mezcla(mesh, chi: DesignField, bajo: float = 0.05, alto: float = 0.95) -> float:
    """Medida (masa concentrada) del conjunto bajo < chi < alto."""
    pesos = lumped_mass(mesh)
    mezcla = (chi > bajo) & (chi < alto)
    return float(pesos[mezcla].sum())


def varianza_angular(mesh, campo: np.ndarray, decimales: int = 9) -> float:
    """
    Máxima varianza de un campo sobre cada anillo r = constante.

    Útil en el anillo, donde un diseño uniforme produce campos radiales.
    """
    coords = mesh.dof_coordinates
    radios = np.round(np.hypot(coords[:, 0], coords[:, 1]), decimales)
    anillos = pd.DataFrame({'r': radios, 'u': campo})
    return float(anillos.groupby('r')['u'].var(ddof=0).max())


def discrepancia_flujos(reporte: EnergyReport) -> Dict[str, float]:
    """
    Diferencias relativas entre flujo de fuente, sumidero y reacción total.

    Returns:
        Diccionario con 'sink' = |J1 - J2|/R y 'reaction' = |J1 - R|/R
    """
    referencia = abs(reporte.total_reaction)
    if referencia == 0:
        return {'sink': 0.0, 'reaction': 0.0}
    return {
        'sink': abs(reporte.j1_in - reporte.j2_out) / referencia,
        'reaction': abs(reporte.j1_in - reporte.total_reaction) / referencia,
    }


def fila_tabla(etiqueta: Dict[str, float], reporte: EnergyReport, chi: DesignField, mesh) -> Dict[str, float]:
    """Fila de tabla de resultados: parámetros, flujos y morfología."""
    fila = dict(etiqueta)
    fila.update({
        'j1_in': reporte.j1_in,
        'j2_out': reporte.j2_out,
        'total_reaction': reporte.total_reaction,
        'objective': reporte.objective,
        'contrast': contraste_lateral(mesh, chi),
        'interface_x': posicion_interfaz(mesh, chi),
        'mixed_area': area_mezcla(mesh, chi),
    })
    return fila
