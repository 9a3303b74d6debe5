"""
Registro das rodadas de uma execução.

Cada RoundLog guarda o estado no início da rodada t (iterados x_t e
conjuntos S_t) e o passo que cada jogador deu a partir dele.
"""
from dataclasses import dataclass, field

import numpy as np

# tipos de passo que aparecem na coluna step_kind
SET_MOVER = "set-mover"
INTERIOR = "interior"
FROZEN = "frozen"
PROJECTED = "projected"
IDLE = "idle"
OGD = "ogd"


@dataclass(frozen=True, eq=False)
class PlayerRound:
    x: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    step_kind: str
    # norma do deslocamento aplicado ao iterado
    step_len: float = 0.0
    iota: float = np.nan
    eta_bar: float = np.nan
    loss: float = np.nan
    dist_to_u: float = np.nan


@dataclass(frozen=True, eq=False)
class RoundLog:
    t: int
    phase_k: int
    players: tuple
    feasible: bool
    sets_feasible: bool = True
    tc_fired: bool = False
    shrink_applied: bool = False
    # translação do produto dos conjuntos nesta rodada
    movement: float = 0.0

    @property
    def joint_x(self):
        return np.concatenate([p.x for p in self.players])


@dataclass(eq=False)
class RunTrace:
    algorithm: str
    problem_name: str
    dims: tuple
    rounds: list = field(default_factory=list)
    u: np.ndarray = None
    final_x: np.ndarray = None
    phase_ends: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    @property
    def T(self):
        return len(self.rounds)

    @property
    def n(self):
        return len(self.dims)

    def iterates(self):
        """Matriz T x d com o iterado conjunto de cada rodada."""
        if not self.rounds:
            return np.zeros((0, sum(self.dims)))
        return np.vstack([r.joint_x for r in self.rounds])

    def player_iterates(self, i):
        return np.vstack([r.players[i].x for r in self.rounds])

    def distances(self):
        """||x_t - u|| por rodada (vazio quando u não é conhecido)."""
        if self.u is None:
            return np.zeros(0)
        return np.linalg.norm(self.iterates() - self.u, axis=1)

    def step_kinds(self, i):
        return [r.players[i].step_kind for r in self.rounds]

    def set_diameters(self, i):
        return np.array([float(np.linalg.norm(r.players[i].upper - r.players[i].lower)) for r in self.rounds])

    @property
    def all_feasible(self):
        return all(r.feasible and r.sets_feasible for r in self.rounds)
