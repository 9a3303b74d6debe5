"""
Método de ponto viável online com coordenação alternada.

A cada rodada t exatamente um jogador, o de índice (t - 1) mod n, é o
"set-mover": desloca o próprio conjunto desejado junto com o iterado,
limitado pela distância ι até a fronteira de C. Os demais só andam dentro
do conjunto que anunciaram. Quando ninguém progride o bastante (ou a fase
passou de 2^k rodadas) o critério de término congela os iterados e encolhe
todos os conjuntos pela metade.
"""
import logging
from collections import deque
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from game.problems import PlayerStart, gradient, joint_value
from geometry.boxes import (
    BoxSet,
    box_diameter,
    box_product,
    box_relint_contains,
    box_shrink_around,
    box_translate,
    max_step_inside,
    support_min,
)
from geometry.polytopes import dist_box_boundary, ray_step_box
from simulador_gnep.conf import gnep_setting

from .exceptions import FeasibilityAuditFailed, InvalidEngineConfig, InvalidInitialization
from .trace import FROZEN, INTERIOR, SET_MOVER, PlayerRound, RoundLog, RunTrace

logger = logging.getLogger(__name__)

ETA_RULES = ("sqrtT", "theorem", "fixed")
IOTA_MODES = ("euclidean", "directional")


@dataclass(frozen=True)
class EngineConfig:
    T: int
    eta_rule: str = None
    eta: float = None
    iota_mode: str = None
    seed: int = None
    audit_tol: float = None

    def __post_init__(self):
        padroes = {
            "eta_rule": "ETA_RULE",
            "iota_mode": "IOTA_MODE",
            "seed": "SEED",
            "audit_tol": "AUDIT_TOL",
        }
        for campo, chave in padroes.items():
            if getattr(self, campo) is None:
                object.__setattr__(self, campo, gnep_setting(chave))
        if int(self.T) < 1:
            raise InvalidEngineConfig(f"T precisa ser >= 1, recebeu {self.T}.")
        object.__setattr__(self, "T", int(self.T))
        if self.eta_rule not in ETA_RULES:
            raise InvalidEngineConfig(f"Regra de passo '{self.eta_rule}' desconhecida. Use {', '.join(ETA_RULES)}.")
        if self.eta_rule == "fixed":
            if self.eta is None or not np.isfinite(self.eta) or self.eta <= 0:
                raise InvalidEngineConfig(f"Passo fixo precisa ser positivo e finito, recebeu {self.eta}.")
            object.__setattr__(self, "eta", float(self.eta))
        if self.iota_mode not in IOTA_MODES:
            raise InvalidEngineConfig(f"Modo de ι '{self.iota_mode}' desconhecido. Use {', '.join(IOTA_MODES)}.")
        if self.audit_tol < 0:
            raise InvalidEngineConfig("audit_tol não pode ser negativa.")
        object.__setattr__(self, "seed", int(self.seed))

    def as_dict(self):
        return asdict(self)


def step_size(problem, config):
    """η da execução inteira, conforme a regra configurada."""
    if config.eta_rule == "fixed":
        return config.eta
    eta = problem.diameter / (problem.gradient_bound * np.sqrt(config.T))
    if config.eta_rule == "theorem":
        faltando = [nome for nome in ("delta", "L") if getattr(problem, nome) is None]
        if faltando:
            raise InvalidEngineConfig(
                f"Regra 'theorem' exige as constantes {', '.join(faltando)} em {problem.name}."
            )
        eta = min(eta, problem.delta / problem.L)
    return float(eta)


# ---------------------------------------------------------------------
# Estado do protocolo
# ---------------------------------------------------------------------

@dataclass(eq=False)
class ProtocolState:
    x: list
    sets: list
    # D do problema; define o limiar do critério de término
    diameter: float
    t: int = 1
    k: int = 1
    phase_start: int = 1
    window: deque = None
    phase_ends: list = field(default_factory=list)

    def __post_init__(self):
        if self.window is None:
            self.window = deque(maxlen=len(self.x))

    @property
    def n(self):
        return len(self.x)

    @property
    def mover(self):
        return (self.t - 1) % self.n

    def joint_x(self):
        return np.concatenate(self.x)

    def product(self, i=None, box=None):
        """Produto dos conjuntos, com o do jogador i trocado por `box` se dado."""
        caixas = list(self.sets)
        if i is not None:
            caixas[i] = box
        return box_product(caixas)


@dataclass(frozen=True, eq=False)
class PlayerStep:
    x: np.ndarray
    box: BoxSet
    step_kind: str
    step_len: float = 0.0
    iota: float = np.nan
    eta_bar: float = np.nan
    movement: float = 0.0


def initial_state(problem, init, config):
    if len(init) != problem.n:
        raise InvalidInitialization(f"{len(init)} inicializações para {problem.n} jogadores.")
    inicio = [p if isinstance(p, PlayerStart) else PlayerStart(*p) for p in init]
    for i, (d, p) in enumerate(zip(problem.dims, inicio)):
        if p.x.size != d or p.box.dim != d:
            raise InvalidInitialization(f"Jogador {i}: iterado/conjunto com dimensão diferente de {d}.")
        if not box_relint_contains(p.box, p.x):
            raise InvalidInitialization(f"Jogador {i}: x1={p.x} não está no interior relativo de {p.box!r}.")
    if not problem.constraint.contains_box(box_product([p.box for p in inicio]), config.audit_tol):
        raise InvalidInitialization("O produto dos conjuntos iniciais não está contido em C.")
    return ProtocolState(
        x=[np.array(p.x) for p in inicio],
        sets=[p.box for p in inicio],
        diameter=problem.diameter,
    )


# ---------------------------------------------------------------------
# Passos de cada jogador (funções puras do estado da rodada)
# ---------------------------------------------------------------------

def step_set_mover(state, problem, i, config, eta=None):
    eta = step_size(problem, config) if eta is None else eta
    x, S = state.x[i], state.sets[i]
    g = gradient(problem, i, state.joint_x())
    norma = float(np.linalg.norm(g))
    if norma == 0.0:
        return PlayerStep(x, S, SET_MOVER, iota=np.inf)

    direcao = np.zeros(problem.total_dim)
    direcao[problem.block(i)] = -g
    if config.iota_mode == "euclidean":
        pior = state.product(i, support_min(S, g))
        iota = dist_box_boundary(pior, problem.constraint, config.audit_tol)
        s = min(eta, iota / norma)
        if problem.dims[i] > 1:
            s = min(s, ray_step_box(state.product(), problem.constraint, direcao))
    else:
        alcance = ray_step_box(state.product(), problem.constraint, direcao)
        iota = alcance * norma
        s = min(eta, alcance)

    # iterado e conjunto andam pelo mesmo vetor
    v = -s * g
    novo_x = x + v
    deslocamento = float(np.linalg.norm(v))
    return PlayerStep(
        novo_x, box_translate(S, v), SET_MOVER,
        step_len=deslocamento, iota=float(iota), movement=deslocamento,
    )


def step_interior(state, problem, i, config, eta=None):
    eta = step_size(problem, config) if eta is None else eta
    x, S = state.x[i], state.sets[i]
    g = gradient(problem, i, state.joint_x())
    eta_bar = max_step_inside(S, x, g, config.audit_tol)
    if not np.any(g):
        return PlayerStep(x, S, INTERIOR, eta_bar=eta_bar)
    s = min(eta, eta_bar / 2.0)
    novo_x = x - s * g
    return PlayerStep(novo_x, S, INTERIOR, step_len=float(np.linalg.norm(novo_x - x)), eta_bar=eta_bar)


def tc_check(state, config):
    decorridos = state.t - state.phase_start
    if decorridos >= 2 ** state.k:
        return True
    if decorridos < state.n or len(state.window) < state.n:
        return False
    return max(state.window) <= state.diameter / np.sqrt(config.T)


def on_termination(state, config):
    """Congela os iterados, encolhe os conjuntos e abre a fase k + 1."""
    fator = gnep_setting("SHRINK_FACTOR")
    limite = gnep_setting("NEAR_POINT_RATIO") * state.diameter
    novos = []
    for i, (x, S) in enumerate(zip(state.x, state.sets)):
        if box_diameter(S) < limite:
            logger.debug("Rodada %d: conjunto do jogador %d já é quase um ponto, sem encolher.", state.t, i)
            novos.append(S)
        else:
            novos.append(box_shrink_around(S, x, fator, config.audit_tol))
    state.sets = novos
    state.phase_ends.append(state.t)
    logger.debug("Rodada %d: fim da fase %d.", state.t, state.k)
    state.k += 1
    state.phase_start = state.t + 1
    state.window.clear()
    return state


# ---------------------------------------------------------------------
# Auditoria
# ---------------------------------------------------------------------

def audit_state(state, problem, config, trace=None):
    """(iterado conjunto em C, produto dos conjuntos em C); relint é obrigatório."""
    for i, (x, S) in enumerate(zip(state.x, state.sets)):
        if not box_relint_contains(S, x):
            raise FeasibilityAuditFailed(
                f"Rodada {state.t}: x do jogador {i} saiu do interior relativo do seu conjunto.",
                round=state.t, player=i, trace=trace,
            )
    return (
        problem.constraint.contains(state.joint_x(), config.audit_tol),
        problem.constraint.contains_box(state.product(), config.audit_tol),
    )


def _registro(state, problem, passos, **eventos):
    x = state.joint_x()
    jogadores = []
    for i, passo in enumerate(passos):
        bloco = problem.block(i)
        dist = np.nan if problem.u is None else float(np.linalg.norm(state.x[i] - problem.u[bloco]))
        jogadores.append(PlayerRound(
            x=state.x[i],
            lower=state.sets[i].lower,
            upper=state.sets[i].upper,
            step_kind=passo.step_kind,
            step_len=passo.step_len,
            iota=passo.iota,
            eta_bar=passo.eta_bar,
            loss=joint_value(problem, i, x),
            dist_to_u=dist,
        ))
    return RoundLog(t=state.t, phase_k=state.k, players=tuple(jogadores), **eventos)


def fpm_run(problem, init, config):
    state = initial_state(problem, init, config)
    eta = step_size(problem, config)
    trace = RunTrace(
        algorithm="fpm",
        problem_name=problem.name,
        dims=problem.dims,
        u=problem.u,
        config={**config.as_dict(), "eta": eta},
    )
    logger.info("FPM em %s: T=%d, η=%.6g, ι=%s.", problem.name, config.T, eta, config.iota_mode)

    for t in range(1, config.T + 1):
        state.t = t
        viavel, conjuntos_ok = audit_state(state, problem, config, trace)
        if not (viavel and conjuntos_ok):
            logger.error("Auditoria falhou na rodada %d de %s.", t, problem.name)
            raise FeasibilityAuditFailed(f"Rodada {t}: iterado ou conjuntos fora de C.", round=t, trace=trace)

        if tc_check(state, config):
            congelados = [PlayerStep(x, S, FROZEN) for x, S in zip(state.x, state.sets)]
            antes = [box_diameter(S) for S in state.sets]
            registro = dict(feasible=viavel, sets_feasible=conjuntos_ok, tc_fired=True)
            log = _registro(state, problem, congelados, **registro)
            on_termination(state, config)
            encolheu = any(box_diameter(S) < d for S, d in zip(state.sets, antes))
            trace.rounds.append(replace(log, shrink_applied=encolheu))
            continue

        # todos os passos saem do mesmo retrato da rodada
        mover = state.mover
        passos = [
            step_set_mover(state, problem, i, config, eta) if i == mover
            else step_interior(state, problem, i, config, eta)
            for i in range(state.n)
        ]
        movimento = passos[mover].movement
        trace.rounds.append(_registro(
            state, problem, passos, feasible=viavel, sets_feasible=conjuntos_ok, movement=movimento,
        ))
        state.x = [p.x for p in passos]
        state.sets = [p.box for p in passos]
        state.window.append(movimento)

    state.t = config.T + 1
    viavel, conjuntos_ok = audit_state(state, problem, config, trace)
    if not (viavel and conjuntos_ok):
        raise FeasibilityAuditFailed("Iterado final fora de C.", round=state.t, trace=trace)
    trace.final_x = state.joint_x()
    trace.phase_ends = list(state.phase_ends)
    trace.summary["phases"] = state.k
    trace.summary["final_sets"] = [(S.lower.tolist(), S.upper.tolist()) for S in state.sets]
    return trace
