# -*- coding: utf-8 -*-
"""
Hiérarchie d'exceptions commune aux modules du cœur.

La CLI traduit ``ConfigError``/``DomainError`` en code de sortie 2 et
``NumericError``/``SingularityError`` en code de sortie 3.
"""


class ReceptorLabError(Exception):
    """Classe de base de toutes les erreurs de receptorlab."""


class DomainError(ReceptorLabError, ValueError):
    """Argument hors de son domaine (concentration négative, ratio hors de [0, 1]...)."""


class ScenarioError(DomainError):
    """Scénario de canal incohérent ou impossible à tirer."""


class SaturationError(DomainError):
    """Récepteur jamais observé libre : le temps libre total est nul."""


class SingularityError(ReceptorLabError, ArithmeticError):
    """Matrice de binning non inversible (ligands indiscernables par leur taux de dissociation)."""


class NumericError(ReceptorLabError, ArithmeticError):
    """Une procédure numérique n'a pas convergé ou a produit une valeur invalide."""


class SteadyStateTimeout(NumericError):
    """Le réseau de réactions n'a pas atteint l'état stationnaire avant ``t_end``."""


class NetworkError(ReceptorLabError):
    """Réseau de réactions mal formé ou design de récepteur inconnu."""


class ConfigError(ReceptorLabError):
    """Configuration rejetée par la validation."""

    def __init__(self, message: str, errors=None):
        super().__init__(message)
        self.errors = list(errors or [])
