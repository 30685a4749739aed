# -*- coding: utf-8 -*-
"""
Réseaux de réactions en action de masse.

Un réseau est une liste d'espèces avec leurs comptes initiaux et une liste
de réactions d'ordre au plus deux. Le même objet alimente les équations
cinétiques déterministes (``derivative``) et le simulateur stochastique (``propensities``).

Une réaction peut porter un déclencheur rectangulaire ``Pulse`` : son taux
vaut alors ``rate_constant / width`` dans l'impulsion et zéro ailleurs ;
une réaction déclenchée d'ordre zéro libère donc en moyenne
``rate_constant`` molécules par impulsion.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from src.core.errors import NetworkError

logger = logging.getLogger(__name__)

EMPTY = "0"


@dataclass(frozen=True)
class Species:
    name: str
    initial_count: float = 0.0


@dataclass(frozen=True)
class Pulse:
    """Impulsion rectangulaire sur [start, start + width)."""
    start: float
    width: float

    def __post_init__(self):
        if self.width <= 0 or not math.isfinite(self.width):
            raise NetworkError(f"pulse width must be > 0, got {self.width}")

    @property
    def end(self) -> float:
        return self.start + self.width

    def factor(self, t: float) -> float:
        return 1.0 / self.width if self.start <= t < self.end else 0.0


@dataclass
class Reaction:
    """
    Une réaction en action de masse.

    Attributes:
        reactants: Stœchiométrie des espèces consommées
        products: Stœchiométrie des espèces produites
        rate_constant: Constante de vitesse (> 0)
        trigger: Impulsion optionnelle qui conditionne le taux
        label: Étiquette libre reprise dans les logs
    """
    reactants: Dict[str, int]
    products: Dict[str, int]
    rate_constant: float
    trigger: Optional[Pulse] = None
    label: str = ""

    def __post_init__(self):
        if not math.isfinite(self.rate_constant) or self.rate_constant <= 0:
            raise NetworkError(f"rate constant must be > 0, got {self.rate_constant}")
        if any(n <= 0 for n in list(self.reactants.values()) + list(self.products.values())):
            raise NetworkError("stoichiometric coefficients must be positive")
        if self.order > 2:
            raise NetworkError(f"reaction order {self.order} exceeds 2")

    @property
    def order(self) -> int:
        return sum(self.reactants.values())

    def format(self) -> str:
        def side(terms: Mapping[str, int]) -> str:
            if not terms:
                return EMPTY
            return " + ".join(name if n == 1 else f"{n} {name}" for name, n in terms.items())

        text = f"{side(self.reactants)} -> {side(self.products)} @ {self.rate_constant!r}"
        if self.trigger is not None:
            text += f" pulse({self.trigger.start!r}, {self.trigger.width!r})"
        return text


def _as_terms(spec) -> Dict[str, int]:
    if spec is None:
        return {}
    if isinstance(spec, str):
        spec = [spec]
    if isinstance(spec, Mapping):
        return {str(k): int(v) for k, v in spec.items()}
    terms: Dict[str, int] = {}
    for name in spec:
        terms[name] = terms.get(name, 0) + 1
    return terms


class ReactionNetwork:
    """Espèces et réactions en action de masse."""

    def __init__(self, name: str = "network"):
        self.name = name
        self._species: Dict[str, Species] = {}
        self.reactions: List[Reaction] = []

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    def add_species(self, name: str, initial_count: float = 0.0) -> Species:
        if name in self._species:
            raise NetworkError(f"duplicate species: {name}")
        if initial_count < 0 or not math.isfinite(initial_count):
            raise NetworkError(f"initial count of {name} must be finite and >= 0")
        species = Species(name, float(initial_count))
        self._species[name] = species
        return species

    def add_reaction(
        self,
        reactants,
        products,
        rate_constant: float,
        trigger: Optional[Pulse] = None,
        label: str = "",
    ) -> Reaction:
        """
        Ajoute une réaction ; chaque côté est un nom d'espèce, une liste de noms ou un dict nom->compte.

        Raises:
            NetworkError: Si une espèce est inconnue ou la réaction invalide
        """
        reaction = Reaction(_as_terms(reactants), _as_terms(products), float(rate_constant), trigger, label)
        for name in list(reaction.reactants) + list(reaction.products):
            if name not in self._species:
                raise NetworkError(f"unknown species {name!r} in {reaction.format()}")
        self.reactions.append(reaction)
        return reaction

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------

    @property
    def species(self) -> List[Species]:
        return list(self._species.values())

    @property
    def species_names(self) -> List[str]:
        return list(self._species)

    def index(self, name: str) -> int:
        try:
            return self.species_names.index(name)
        except ValueError:
            raise NetworkError(f"unknown species: {name}") from None

    def initial_state(self) -> np.ndarray:
        return np.array([s.initial_count for s in self._species.values()], dtype=float)

    def set_initial(self, name: str, count: float) -> None:
        if name not in self._species:
            raise NetworkError(f"unknown species: {name}")
        self._species[name] = Species(name, float(count))

    def stoichiometry(self) -> np.ndarray:
        """Matrice des variations nettes, de forme (n_reactions, n_species)."""
        names = self.species_names
        matrix = np.zeros((len(self.reactions), len(names)))
        for r, reaction in enumerate(self.reactions):
            for name, n in reaction.reactants.items():
                matrix[r, names.index(name)] -= n
            for name, n in reaction.products.items():
                matrix[r, names.index(name)] += n
        return matrix

    def pulse_edges(self) -> List[float]:
        edges = set()
        for reaction in self.reactions:
            if reaction.trigger is not None:
                edges.update((reaction.trigger.start, reaction.trigger.end))
        return sorted(edges)

    def _reactant_indices(self) -> List[List[tuple]]:
        names = self.species_names
        return [[(names.index(name), n) for name, n in r.reactants.items()] for r in self.reactions]

    # ------------------------------------------------------------------
    # Kinetics
    # ------------------------------------------------------------------

    def rates(self, state: Sequence[float], t: float = 0.0) -> np.ndarray:
        """Taux déterministes en action de masse."""
        values = np.empty(len(self.reactions))
        for r, (reaction, terms) in enumerate(zip(self.reactions, self._reactant_indices())):
            rate = reaction.rate_constant
            for idx, n in terms:
                rate *= state[idx] ** n
            if reaction.trigger is not None:
                rate *= reaction.trigger.factor(t)
            values[r] = rate
        return values

    def propensities(self, counts: Sequence[int], t: float = 0.0) -> np.ndarray:
        """Propensions stochastiques (combinatoires pour les réactifs homodimères)."""
        values = np.empty(len(self.reactions))
        for r, (reaction, terms) in enumerate(zip(self.reactions, self._reactant_indices())):
            a = reaction.rate_constant
            for idx, n in terms:
                x = counts[idx]
                a *= x if n == 1 else x * (x - 1)
            if reaction.trigger is not None:
                a *= reaction.trigger.factor(t)
            values[r] = a
        return values

    def derivative(self, t: float, state: Sequence[float]) -> np.ndarray:
        return self.rates(state, t) @ self.stoichiometry()

    def compile(self):
        """Renvoie un ``f(t, y)`` rapide à stœchiométrie précalculée."""
        stoich = self.stoichiometry()
        terms = self._reactant_indices()
        constants = np.array([r.rate_constant for r in self.reactions])
        triggers = [r.trigger for r in self.reactions]

        def f(t: float, y: np.ndarray) -> np.ndarray:
            rates = constants.copy()
            for r, reactants in enumerate(terms):
                for idx, n in reactants:
                    rates[r] *= y[idx] ** n
                if triggers[r] is not None:
                    rates[r] *= triggers[r].factor(t)
            return rates @ stoich

        return f

    # ------------------------------------------------------------------
    # Output
    # ------------------------------------------------------------------

    def dump(self) -> str:
        """Une réaction par ligne : ``reactants -> products @ rate``."""
        return "\n".join(r.format() for r in self.reactions) + ("\n" if self.reactions else "")

    def counts_dict(self, state: Iterable[float]) -> Dict[str, float]:
        return dict(zip(self.species_names, (float(v) for v in state)))

    def __len__(self) -> int:
        return len(self.reactions)

    def __repr__(self) -> str:
        return f"ReactionNetwork({self.name!r}, species={len(self._species)}, reactions={len(self.reactions)})"
