"""
Interfaces y contratos para Reactor Design.
Define los contratos que deben cumplir los constructores de mallas.
"""
from abc import ABC, abstractmethod


class IMeshBuilder(ABC):
    """Interfaz para constructores de mallas etiquetadas."""

    @abstractmethod
    def validar_parametros(self) -> None:
        """Verifica los parámetros de construcción; lanza ValueError si fallan."""
        pass

    @abstractmethod
    def build(self):
        """Construye y retorna la malla."""
        pass
