"""
Fachada principal ReactorDesigner.
Proporciona una interfaz unificada para resolver, optimizar y exportar diseños.
"""
import logging
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .config import RunConfig
from .core import metrics
from .core.mesh import build_scenario
from .core.optimizer import run
from .core.state import energy_report, solve_state
from .types import DesignField, DesignResult, EnergyReport, StateField
from .utils.helpers import chi_desde_entrada, escribir_csv, escribir_json, escribir_vtk

logger = logging.getLogger(__name__)


class ReactorDesigner:
    """
    Fachada principal para el diseño de reactores multimaterial.

    Construye la malla del escenario una sola vez y expone la resolución del
    estado, la optimización del diseño y la exportación de resultados.

    Example:
        >>> config = RunConfig(scenario='square', mesh=MeshConfig(nx=32, ny=32))
        >>> designer = ReactorDesigner(config)
        >>> resultado = designer.optimizar()
        >>> designer.exportar_resultado(resultado)
    """

    def __init__(self, config: RunConfig, mesh=None):
        """
        Inicializa el diseñador.

        Args:
            config: configuración de la corrida
            mesh: malla ya construida (opcional)
        """
        self.config = config
        self._mesh = mesh

    @property
    def mesh(self):
        if self._mesh is None:
            self._mesh = build_scenario(self.config.scenario, self.config.mesh)
        return self._mesh

    @property
    def carpeta(self) -> Path:
        return Path(self.config.output_dir)

    def diseno_de_entrada(self, entrada: Union[float, str, None] = None) -> DesignField:
        """Diseño desde la entrada dada o desde config.chi."""
        return chi_desde_entrada(self.config.chi if entrada is None else entrada, self.mesh)

    def resolver(self, chi: DesignField) -> Tuple[StateField, EnergyReport]:
        """
        Resuelve el estado para un diseño fijo y calcula su reporte.

        Args:
            chi: diseño nodal en [0, 1]

        Returns:
            Tupla (estado, reporte de energías y flujos)
        """
        pf = self.config.phase_field
        modelo = self.config.model
        estado = solve_state(self.mesh, chi, modelo)
        reporte = energy_report(self.mesh, chi, estado, modelo, pf.alpha, pf.beta, lam=modelo.lam)
        logger.info(
            "Estado resuelto: J1_in=%.6g J2_out=%.6g reacción=%.6g",
            reporte.j1_in, reporte.j2_out, reporte.total_reaction,
        )
        return estado, reporte

    def optimizar(
        self,
        chi0: Optional[DesignField] = None,
        callback: Optional[Callable[[int, DesignField, StateField], None]] = None,
    ) -> DesignResult:
        """
        Ejecuta la evolución del diseño, con instantáneas VTK si se configuraron.

        Args:
            chi0: diseño inicial explícito (opcional)
            callback: función adicional llamada tras cada paso aceptado

        Returns:
            DesignResult con historial
        """
        cada = self.config.snapshot_every

        def observar(paso: int, chi: DesignField, estado: StateField) -> None:
            if cada and paso % cada == 0:
                self.exportar_campos(self.carpeta / f'snapshot_{paso:05d}.vtk', chi, estado)
            if callback is not None:
                callback(paso, chi, estado)

        return run(self.config, mesh=self.mesh, chi0=chi0, callback=observar)

    def campos(self, chi: DesignField, estado: StateField) -> Dict[str, np.ndarray]:
        """Campos nodales a exportar: chi, u1, u2 y densidad de reacción."""
        reaccion = self.config.model.k_s * chi * (1.0 - chi) * (estado.u1 - estado.u2)
        return {'chi': chi, 'u1': estado.u1, 'u2': estado.u2, 'reaction': reaccion}

    def exportar_campos(self, ruta: Union[str, Path], chi: DesignField, estado: StateField) -> Path:
        return escribir_vtk(ruta, self.mesh, self.campos(chi, estado))

    def metricas(self, chi: DesignField, reporte: EnergyReport) -> Dict[str, Optional[float]]:
        """Morfología del diseño y discrepancia de flujos."""
        discrepancia = metrics.discrepancia_flujos(reporte)
        return {
            'contrast': metrics.contraste_lateral(self.mesh, chi),
            'interface_x': metrics.posicion_interfaz(self.mesh, chi),
            'mixed_area': metrics.area_mezcla(self.mesh, chi),
            'sink_discrepancy': discrepancia['sink'],
            'reaction_discrepancy': discrepancia['reaction'],
        }

    def exportar_estado(self, chi: DesignField, estado: StateField, reporte: EnergyReport) -> Dict[str, Path]:
        """Escribe state.vtk y report.json de una resolución directa."""
        archivos = {
            'vtk': self.exportar_campos(self.carpeta / 'state.vtk', chi, estado),
            'report': escribir_json(self.carpeta / 'report.json', {
                'config': self.config.to_dict(),
                'report': reporte.to_dict(),
                'metrics': self.metricas(chi, reporte),
            }),
        }
        return archivos

    def exportar_resultado(self, resultado: DesignResult) -> Dict[str, Path]:
        """
        Escribe design.vtk, history.csv y report.json de una optimización.

        Returns:
            Diccionario con las rutas escritas
        """
        historial = pd.DataFrame(
            [h.to_dict() for h in resultado.history],
            columns=['step', 'residual', 'functional', 'lambda', 'dt'],
        )
        configuracion = self.config.to_dict()
        configuracion['model'] = (resultado.model or self.config.model).to_dict()
        archivos = {
            'vtk': self.exportar_campos(self.carpeta / 'design.vtk', resultado.chi, resultado.state),
            'history': escribir_csv(self.carpeta / 'history.csv', historial),
            'report': escribir_json(self.carpeta / 'report.json', {
                'config': configuracion,
                'report': resultado.report.to_dict(),
                'converged': resultado.converged,
                'steps': resultado.steps,
                'metrics': self.metricas(resultado.chi, resultado.report),
            }),
        }
        return archivos
