"""
Cotas teóricas: convergência do método de ponto viável (regimes
fortemente benigno e benigno), regret do OGD com conjuntos móveis e as
taxas da descida de gradiente inexata.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import InvalidParameter, MissingConstants

STRONGLY_BENIGN = "strongly-benign"
BENIGN = "benign"
REGIMES = (STRONGLY_BENIGN, BENIGN)

EXIGIDAS = {
    STRONGLY_BENIGN: ("delta", "phi", "dmin", "mu", "L"),
    BENIGN: ("delta", "phi", "dmin", "Delta"),
}


@dataclass(frozen=True)
class TheoreticalBound:
    regime: str
    T: int
    n: int
    t0: int
    Xi: float
    rho: float
    start_distance: float
    # parcela que sobra quando t -> infinito
    tail: float
    proof_tail: float
    D: float
    G: float
    delta: float
    mu: float = None
    eps: float = None

    def value(self, t):
        return self.Xi * self.start_distance * self.rho ** ((t + 1) / self.n) + self.tail

    @property
    def rounds(self):
        return np.arange(self.t0, self.T + 1)

    @property
    def values(self):
        t = self.rounds
        return self.Xi * self.start_distance * self.rho ** ((t + 1) / self.n) + self.tail

    @property
    def regret_bound(self):
        """Cota de reg_f de cada jogador no regime fortemente benigno."""
        if self.mu is None:
            raise MissingConstants(["mu"])
        raiz = math.sqrt(self.T)
        return self.D * self.G * (
            raiz * (2.0 * self.Xi * self.n * self.G / (self.mu * self.D) + 2.0 / self.delta) + self.t0
        )

    def as_dict(self):
        return asdict(self)


def convergence_bound(problem, T, regime=STRONGLY_BENIGN, eps=None, x1=None):
    """
    Cota de |x_t - u| para t0 <= t <= T. Sem x1, a distância inicial é
    limitada por D.
    """
    if regime not in REGIMES:
        raise InvalidParameter(f"Regime '{regime}' desconhecido. Use {', '.join(REGIMES)}.")
    if int(T) < 1:
        raise InvalidParameter(f"T precisa ser >= 1, recebeu {T}.")
    T = int(T)
    faltando = [nome for nome in EXIGIDAS[regime] if getattr(problem, nome) is None]
    if faltando:
        raise MissingConstants(faltando, problem.name)

    D, G = problem.diameter, problem.gradient_bound
    delta, phi, dmin = problem.delta, problem.phi, problem.dmin
    raiz = math.sqrt(T)
    termos = [4.0 * D / phi + 1.0, (D / (2.0 * dmin)) ** 2]

    if regime == STRONGLY_BENIGN:
        termos.append((D * problem.L / (2.0 * G * delta)) ** 2)
        rho = 1.0 - problem.mu * delta * D / (4.0 * G * raiz)
        tail = proof_tail = 2.0 * D / (delta * raiz)
        eps = None
    else:
        eps = D / raiz if eps is None else float(eps)
        if not eps > 0:
            raise InvalidParameter(f"eps precisa ser positivo, recebeu {eps}.")
        termos.append((D / (2.0 * eps * delta)) ** 2)
        rho = 1.0 - delta * problem.Delta * D / (2.0 * G * raiz)
        tail = (2.0 * D / raiz + 2.0 * eps) / delta
        proof_tail = 4.0 * G * D / (delta ** 2 * raiz) + 2.0 * eps / delta

    if not 0.0 < rho < 1.0:
        raise InvalidParameter(f"Fator de contração {rho} fora de (0, 1); aumente T.")
    t0 = math.ceil(max(termos))

    if x1 is None:
        inicio = D
    else:
        if problem.u is None:
            raise MissingConstants(["u"], problem.name)
        inicio = float(np.linalg.norm(np.asarray(x1, dtype=float) - problem.u))

    return TheoreticalBound(
        regime=regime,
        T=T,
        n=problem.n,
        t0=t0,
        Xi=rho ** (-t0 / problem.n),
        rho=rho,
        start_distance=inicio,
        tail=tail,
        proof_tail=proof_tail,
        D=D,
        G=G,
        delta=delta,
        mu=problem.mu,
        eps=eps,
    )


# ---------------------------------------------------------------------
# OGD com conjuntos móveis
# ---------------------------------------------------------------------

def ogd_regret_bound(D, G, c, c_prime, T):
    """(3D + (6 + 4c')c)/2 * G * sqrt(T)."""
    if not (D > 0 and G > 0 and T > 0):
        raise InvalidParameter(f"D, G e T precisam ser positivos: D={D}, G={G}, T={T}.")
    if c < 0 or c_prime < 0:
        raise InvalidParameter(f"c e c' não podem ser negativos: c={c}, c'={c_prime}.")
    return (3.0 * D + (6.0 + 4.0 * c_prime) * c) / 2.0 * G * math.sqrt(T)


def _correcao(instance, etas):
    # sum_{t=1}^{T-1} (ω_{t+1}/η_t + G) dist(S_{t+1}, u)
    T = instance.T
    omegas = instance.omegas[:T - 1]
    return float(np.sum((omegas / etas[:T - 1] + instance.G) * instance.dists[1:T]))


def ogd_general_bound(instance, etas=None):
    """Cota para uma sequência arbitrária de passos (padrão: os da instância)."""
    etas = instance.etas() if etas is None else np.asarray(etas, dtype=float)
    if etas.shape != (instance.T,) or np.any(etas <= 0):
        raise InvalidParameter(f"Esperados {instance.T} passos positivos.")
    alcance = instance.D + float(np.max(instance.dists))
    return (
        alcance ** 2 / (2.0 * etas[-1])
        + instance.G ** 2 * float(np.sum(etas)) / 2.0
        + _correcao(instance, etas)
    )


def ogd_strongly_convex_bound(instance):
    """(G^2/mu) log T + correção, com passos 1/(t mu)."""
    if not instance.mu:
        raise MissingConstants(["mu"])
    if instance.T < 3:
        raise InvalidParameter(f"A cota logarítmica exige T >= 3, recebeu {instance.T}.")
    etas = instance.etas(strongly_convex=True)
    return instance.G ** 2 / instance.mu * math.log(instance.T) + _correcao(instance, etas)


# ---------------------------------------------------------------------
# Descida de gradiente inexata
# ---------------------------------------------------------------------

def inexact_gd_rate(regime, delta, C, G, T, mu_tilde=None, L=None, Delta=None, eps=None):
    """Fator q da contração (1 - q)^(t-1) de f(x_t) - f(u)."""
    if not (delta > 0 and C > 0 and G > 0 and T > 0):
        raise InvalidParameter("delta, C, G e T precisam ser positivos.")
    raiz = math.sqrt(T)
    if regime == STRONGLY_BENIGN:
        faltando = [nome for nome, v in (("mu_tilde", mu_tilde), ("L", L)) if v is None]
        if faltando:
            raise MissingConstants(faltando)
        q = min(mu_tilde * delta * C / (2.0 * G * raiz), delta ** 2 * mu_tilde / L)
    elif regime == BENIGN:
        faltando = [nome for nome, v in (("Delta", Delta), ("eps", eps)) if v is None]
        if faltando:
            raise MissingConstants(faltando)
        q = min(Delta * delta * C / (2.0 * G * raiz), delta ** 2 * Delta * eps / G)
    else:
        raise InvalidParameter(f"Regime '{regime}' desconhecido. Use {', '.join(REGIMES)}.")
    if not 0.0 < q <= 1.0:
        raise InvalidParameter(f"q={q} fora de (0, 1].")
    return float(q)


def inexact_gd_bound(q, t, initial_gap, C, delta, T, eps=None):
    """(1 - q)^(t-1) (f(x_1) - f(u)) + C/(delta^2 sqrt(T)) [+ 2 eps/delta]."""
    valor = (1.0 - q) ** (t - 1) * initial_gap + C / (delta ** 2 * math.sqrt(T))
    if eps is not None:
        valor += 2.0 * eps / delta
    return valor
