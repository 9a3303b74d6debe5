"""
Algoritmos de comparação.

- altgd_run: descida de gradiente alternada, cada jogador projeta o passo
  na própria fatia de C quando chega a sua vez.
- naive_wait_run: "espere a sua vez"; o conjunto anunciado é o próprio
  ponto, e o jogador da vez projeta na fatia. Mesma trajetória do altgd.
- ogd_side_info_run: um único jogador com conjuntos S_t conhecidos de
  antemão (descida de gradiente online projetada em S_{t+1}).
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from game.problems import PlayerStart, gradient, join, joint_value, others
from geometry.boxes import BoxSet, as_vector, box_contains, box_diameter, project_box
from geometry.polytopes import project_polytope, slice_constraint

from .engine import step_size
from .exceptions import EmptyMovingSet, FeasibilityAuditFailed, InvalidEngineConfig, InvalidInitialization
from .trace import IDLE, OGD, PROJECTED, PlayerRound, RoundLog, RunTrace

logger = logging.getLogger(__name__)


def _pontos_iniciais(problem, init):
    if len(init) != problem.n:
        raise InvalidInitialization(f"{len(init)} inicializações para {problem.n} jogadores.")
    pontos = [as_vector(p.x if isinstance(p, PlayerStart) else p, "x1") for p in init]
    for i, (d, x) in enumerate(zip(problem.dims, pontos)):
        if x.size != d:
            raise InvalidInitialization(f"Jogador {i}: x1 com dimensão {x.size}, esperado {d}.")
    return pontos


def _rodadas_projetadas(problem, init, config, algorithm, anuncia_ponto):
    x = _pontos_iniciais(problem, init)
    if not problem.constraint.contains(join(x), config.audit_tol):
        raise InvalidInitialization("Ponto inicial fora de C.")
    eta = step_size(problem, config)
    trace = RunTrace(
        algorithm=algorithm,
        problem_name=problem.name,
        dims=problem.dims,
        u=problem.u,
        config={**config.as_dict(), "eta": eta},
    )
    vazio = [np.full(d, np.nan) for d in problem.dims]
    for t in range(1, config.T + 1):
        conjunto = join(x)
        if not problem.constraint.contains(conjunto, config.audit_tol):
            raise FeasibilityAuditFailed(f"Rodada {t}: iterado fora de C.", round=t, trace=trace)
        mover = (t - 1) % problem.n
        g = gradient(problem, mover, conjunto)
        fatia = slice_constraint(
            problem.constraint, mover, others(problem, conjunto, mover), problem.dims,
            witness=x[mover], tol=config.audit_tol,
        )
        novo = project_polytope(x[mover] - eta * g, fatia)

        jogadores = []
        for i in range(problem.n):
            dist = np.nan if problem.u is None else float(np.linalg.norm(x[i] - problem.u[problem.block(i)]))
            jogadores.append(PlayerRound(
                x=x[i],
                lower=x[i] if anuncia_ponto else vazio[i],
                upper=x[i] if anuncia_ponto else vazio[i],
                step_kind=PROJECTED if i == mover else IDLE,
                step_len=float(np.linalg.norm(novo - x[i])) if i == mover else 0.0,
                loss=joint_value(problem, i, conjunto),
                dist_to_u=dist,
            ))
        movimento = float(np.linalg.norm(novo - x[mover]))
        trace.rounds.append(RoundLog(
            t=t, phase_k=1, players=tuple(jogadores), feasible=True, movement=movimento,
        ))
        x = list(x)
        x[mover] = novo

    if not problem.constraint.contains(join(x), config.audit_tol):
        raise FeasibilityAuditFailed("Iterado final fora de C.", round=config.T + 1, trace=trace)
    trace.final_x = join(x)
    return trace


def altgd_run(problem, init, config):
    return _rodadas_projetadas(problem, init, config, "altgd", anuncia_ponto=False)


def naive_wait_run(problem, init, config):
    return _rodadas_projetadas(problem, init, config, "naive", anuncia_ponto=True)


# ---------------------------------------------------------------------
# OGD com conjuntos móveis conhecidos
# ---------------------------------------------------------------------

def _desvio_maximo(S, S_seguinte):
    """max_{a em S} dist(S_seguinte, a), separável por eixo para caixas."""
    por_eixo = np.maximum.reduce([
        S_seguinte.lower - S.lower, S.upper - S_seguinte.upper, np.zeros(S.dim),
    ])
    return float(np.linalg.norm(por_eixo))


@dataclass(frozen=True, eq=False)
class MovingSetInstance:
    """
    Sequência de caixas S_1, ..., S_{T+1} e perdas convexas f_t.

    `value_fn(t, x)` e `gradient_fn(t, x)` recebem t a partir de 1. G
    limita as normas dos gradientes em S_t; mu > 0 só quando as perdas são
    fortemente convexas.
    """
    sets: tuple
    value_fn: object
    gradient_fn: object
    u: np.ndarray
    G: float
    mu: float = None
    D: float = None

    def __post_init__(self):
        if len(self.sets) < 2:
            raise EmptyMovingSet("A instância precisa de pelo menos dois conjuntos (S_1 e S_2).")
        dims = {S.dim for S in self.sets}
        if len(dims) != 1:
            raise EmptyMovingSet(f"Conjuntos com dimensões diferentes: {sorted(dims)}.")
        u = as_vector(self.u, "u")
        if u.size != self.sets[0].dim:
            raise EmptyMovingSet(f"u com dimensão {u.size}, conjuntos com {self.sets[0].dim}.")
        object.__setattr__(self, "sets", tuple(self.sets))
        object.__setattr__(self, "u", u)
        if self.D is None:
            object.__setattr__(self, "D", max(box_diameter(S) for S in self.sets))

    @property
    def T(self):
        return len(self.sets) - 1

    @property
    def dim(self):
        return self.sets[0].dim

    @cached_property
    def dists(self):
        """dist(S_t, u) para t = 1..T+1."""
        return np.array([float(np.linalg.norm(self.u - project_box(self.u, S))) for S in self.sets])

    @cached_property
    def omegas(self):
        """omegas[t-1] = ω_{t+1}, para t = 1..T."""
        return np.array([_desvio_maximo(a, b) for a, b in zip(self.sets[:-1], self.sets[1:])])

    @cached_property
    def c(self):
        t = np.arange(1, self.T + 2)
        return float(np.max(self.dists * np.sqrt(t)))

    @cached_property
    def c_prime(self):
        """Menor c' com ω_{t+1} <= c' G η_t para η_t = (D + c)/(G sqrt(t))."""
        t = np.arange(1, self.T + 1)
        if self.D + self.c == 0:
            return 0.0
        return float(np.max(self.omegas * np.sqrt(t) / (self.D + self.c)))

    def etas(self, strongly_convex=False):
        t = np.arange(1, self.T + 1)
        if strongly_convex:
            if not self.mu:
                raise InvalidEngineConfig("Passo 1/(t mu) exige perdas fortemente convexas (mu > 0).")
            return 1.0 / (t * self.mu)
        return (self.D + self.c) / (self.G * np.sqrt(t))


def shrinking_box_instance(T, d=2, D=1.0, c=1.0, theta_max=1.0, lam=0.0, seed=0):
    """
    Instância conforme: caixas de diâmetro D cujo canto mais próximo de u
    fica a c/sqrt(t) de u, perdas <θ_t, x> + λ/2 |x - u|^2.
    """
    if T < 1 or d < 1 or D <= 0 or c < 0 or theta_max < 0 or lam < 0:
        raise InvalidEngineConfig("Parâmetros inválidos para a instância de conjuntos móveis.")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=d)
    direcao = np.abs(rng.standard_normal(d))
    direcao /= np.linalg.norm(direcao)
    largura = D / np.sqrt(d)
    conjuntos = []
    for t in range(1, T + 2):
        canto = u + (c / np.sqrt(t)) * direcao
        conjuntos.append(BoxSet(canto, canto + largura))
    thetas = rng.standard_normal((T + 1, d))
    thetas *= (theta_max * rng.uniform(0.0, 1.0, size=(T + 1, 1))) / np.linalg.norm(thetas, axis=1, keepdims=True)

    def value_fn(t, x):
        r = x - u
        return float(thetas[t - 1] @ x + 0.5 * lam * (r @ r))

    def gradient_fn(t, x):
        return thetas[t - 1] + lam * (x - u)

    return MovingSetInstance(
        sets=conjuntos,
        value_fn=value_fn,
        gradient_fn=gradient_fn,
        u=u,
        G=theta_max + lam * (D + c),
        mu=lam if lam > 0 else None,
        D=D,
    )


def ogd_side_info_run(instance, config=None, strongly_convex=False):
    """
    x_{t+1} = Π_{S_{t+1}}(x_t - η_t ∇f_t(x_t)), partindo do centro de S_1.

    config.T, quando dado, encurta o horizonte da instância.
    """
    T = instance.T if config is None else min(config.T, instance.T)
    tol = 1e-9 if config is None else config.audit_tol
    etas = instance.etas(strongly_convex)
    trace = RunTrace(
        algorithm="ogd-sideinfo",
        problem_name="moving_sets",
        dims=(instance.dim,),
        u=instance.u,
        config={"T": T, "strongly_convex": strongly_convex},
    )
    x = instance.sets[0].center.copy()
    regret = 0.0
    violacoes = 0
    for t in range(1, T + 1):
        S = instance.sets[t - 1]
        dentro = box_contains(S, x, tol)
        if not dentro:
            violacoes += 1
        perda = instance.value_fn(t, x)
        regret += perda - instance.value_fn(t, instance.u)
        g = instance.gradient_fn(t, x)
        seguinte = project_box(x - etas[t - 1] * g, instance.sets[t])
        passo = float(np.linalg.norm(seguinte - x))
        trace.rounds.append(RoundLog(
            t=t, phase_k=1, feasible=dentro, movement=passo,
            players=(PlayerRound(
                x=x, lower=S.lower, upper=S.upper, step_kind=OGD, step_len=passo,
                eta_bar=float(etas[t - 1]), loss=perda,
                dist_to_u=float(np.linalg.norm(x - instance.u)),
            ),),
        ))
        x = seguinte
    if violacoes:
        logger.warning("OGD com conjuntos móveis: %d rodadas fora de S_t.", violacoes)
    trace.final_x = x
    trace.summary.update({"reg_f": regret, "violations": violacoes, "T": T})
    return trace
