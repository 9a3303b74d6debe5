"""
Estimadores por amostragem das constantes de um GNEP benigno.

Todas as estimativas são mínimos sobre pontos sorteados de C, portanto
cotas superiores das constantes verdadeiras; mais amostras com a mesma
semente só podem diminuir o valor.
"""
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from game.problems import gradient
from geometry.polytopes import slice_constraint
from simulador_gnep.conf import gnep_setting

from .exceptions import InvalidParameter, MissingConstants, NoValidSamples

logger = logging.getLogger(__name__)

# normas abaixo disso contam como zero (gradiente nulo ou x^(i) = u^(i))
LIMIAR_NULO = 1e-12
# sorteios extras por ponto na estimativa de D_min
PONTOS_NA_BOLA = 32


@dataclass(frozen=True)
class BenignReport:
    problem: str
    delta_hat: float
    dmin_hat: dict
    monotonicity_hat: float
    samples: int
    seed: int
    relations: dict = field(default_factory=dict)

    def as_dict(self):
        dados = asdict(self)
        dados["dmin_hat"] = {str(phi): valor for phi, valor in self.dmin_hat.items()}
        return dados


@dataclass(frozen=True)
class RelationsReport:
    """Valor amostrado e valor previsto pelas relações entre as classes."""
    angular_hat: float
    angular_predicted: float = None
    growth_hat: float = None
    growth_predicted: float = None
    monotonicity_hat: float = None
    monotonicity_predicted: float = None
    tol: float = 1e-9

    def _confere(self, amostrado, previsto):
        if previsto is None or amostrado is None:
            return None
        return amostrado >= previsto - self.tol * (1.0 + abs(previsto))

    @property
    def angular_ok(self):
        return self._confere(self.angular_hat, self.angular_predicted)

    @property
    def benign_ok(self):
        return self._confere(self.growth_hat, self.growth_predicted)

    @property
    def monotone_ok(self):
        return self._confere(self.monotonicity_hat, self.monotonicity_predicted)

    def as_dict(self):
        return {
            **asdict(self),
            "angular_ok": self.angular_ok,
            "benign_ok": self.benign_ok,
            "monotone_ok": self.monotone_ok,
        }


def _parametros(samples, seed):
    samples = gnep_setting("SAMPLES") if samples is None else int(samples)
    seed = gnep_setting("SEED") if seed is None else int(seed)
    if samples < 1:
        raise InvalidParameter(f"samples precisa ser >= 1, recebeu {samples}.")
    return samples, seed


def _amostras(problem, samples, seed):
    return problem.constraint.sample(np.random.default_rng(seed), samples)


def _equilibrio(problem, u):
    if u is None:
        u = problem.u
    if u is None:
        raise MissingConstants(["u"], problem.name)
    u = np.array(u, dtype=float, ndmin=1)
    if u.size != problem.total_dim:
        raise InvalidParameter(f"u com dimensão {u.size}, o jogo tem dimensão {problem.total_dim}.")
    return u


def _cossenos(problem, u, pontos):
    """Cosseno entre o gradiente e x^(i) - u^(i), por ponto e jogador."""
    for x in pontos:
        for i in range(problem.n):
            bloco = problem.block(i)
            g = gradient(problem, i, x)
            v = x[bloco] - u[bloco]
            ng, nv = np.linalg.norm(g), np.linalg.norm(v)
            if ng <= LIMIAR_NULO or nv <= LIMIAR_NULO:
                continue
            yield i, float(g @ v / (ng * nv)), float(ng / nv)


def check_angular(problem, u=None, samples=None, seed=None):
    """Menor cosseno amostrado; cota superior de delta."""
    samples, seed = _parametros(samples, seed)
    u = _equilibrio(problem, u)
    cossenos = [c for _, c, _ in _cossenos(problem, u, _amostras(problem, samples, seed))]
    if not cossenos:
        raise NoValidSamples(f"Nenhuma amostra válida para a condição angular em {problem.name}.")
    pulados = samples * problem.n - len(cossenos)
    if pulados:
        logger.info("Condição angular: %d pares (ponto, jogador) ignorados.", pulados)
    return float(np.clip(min(cossenos), -1.0, 1.0))


def _recorta(fatia, p, destinos):
    """Leva cada destino de volta pelo segmento a partir de p até caber na fatia."""
    direcoes = destinos - p
    taxa = direcoes @ fatia.A.T
    folga = np.maximum(fatia.h - fatia.A @ p, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        razoes = np.where(taxa > LIMIAR_NULO, folga / taxa, np.inf)
    passo = np.minimum(1.0, razoes.min(axis=1, initial=np.inf))
    return p + passo[:, None] * direcoes


def _pontos_da_regiao(fatia, p, phi, rng):
    """
    Pontos de B(p, phi) ∩ fatia: maximizadores de cada <a_j, .> na bola,
    na bola restrita a cada hiperplano que a corta, e sorteios na bola.
    """
    uteis = fatia.norms > LIMIAR_NULO
    unit = fatia.A[uteis] / fatia.norms[uteis, None]
    distancia = np.maximum(fatia.h[uteis] - fatia.A[uteis] @ p, 0.0) / fatia.norms[uteis]
    destinos = [p[None, :], p + phi * unit]
    for k in np.flatnonzero(distancia < phi):
        centro = p + distancia[k] * unit[k]
        raio = np.sqrt(phi * phi - distancia[k] ** 2)
        perp = unit - np.outer(unit @ unit[k], unit[k])
        normas = np.linalg.norm(perp, axis=1)
        validos = normas > LIMIAR_NULO
        destinos.append(centro + raio * perp[validos] / normas[validos, None])
    d = p.size
    direcoes = rng.standard_normal((PONTOS_NA_BOLA, d))
    direcoes /= np.maximum(np.linalg.norm(direcoes, axis=1, keepdims=True), LIMIAR_NULO)
    raios = phi * rng.random(PONTOS_NA_BOLA) ** (1.0 / d)
    destinos.append(p + raios[:, None] * direcoes)
    return _recorta(fatia, p, np.vstack(destinos))


def dmin_at_point(problem, x, i, phi, rng=None):
    """
    Maior deslocamento de B(x^(i), phi) ∩ fatia ao longo do gradiente
    normalizado que ainda cabe na fatia. None com gradiente nulo.

    O máximo de cada <a_j, .> é tomado sobre pontos da própria região, logo
    fica abaixo do verdadeiro e o deslocamento devolvido é uma cota superior.
    Exato quando o maximizador de cada restrição ativa tem no máximo uma
    outra restrição ativa (jogadores de uma coordenada e fatias em caixa,
    entre outros).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    g = gradient(problem, i, x)
    ng = np.linalg.norm(g)
    if ng <= LIMIAR_NULO:
        return None
    direcao = g / ng
    bloco = problem.block(i)
    proprio = x[bloco]
    resto = np.concatenate([x[:bloco.start], x[bloco.stop:]])
    fatia = slice_constraint(problem.constraint, i, resto, problem.dims, witness=proprio)
    # transladar por -alpha*direcao aumenta <a_j, z> em alpha * (-<a_j, direcao>)
    avanco = -(fatia.A @ direcao)
    ativos = avanco > LIMIAR_NULO
    if not np.any(ativos):
        return np.inf
    pontos = _pontos_da_regiao(fatia, proprio, phi, rng)
    topo = (pontos @ fatia.A.T).max(axis=0)
    folga = np.maximum(fatia.h - topo, 0.0)
    return float(np.min(folga[ativos] / avanco[ativos]))


def estimate_dmin(problem, phi, samples=None, seed=None):
    """Cota superior amostrada de D_min(phi)."""
    if not phi > 0:
        raise InvalidParameter(f"phi precisa ser positivo, recebeu {phi}.")
    samples, seed = _parametros(samples, seed)
    rng = np.random.default_rng([seed, 1])
    menor = np.inf
    validos = 0
    for x in _amostras(problem, samples, seed):
        for i in range(problem.n):
            valor = dmin_at_point(problem, x, i, phi, rng)
            if valor is None:
                continue
            validos += 1
            menor = min(menor, valor)
    if not validos:
        raise NoValidSamples(f"Gradiente nulo em todas as amostras de {problem.name}.")
    return float(menor)


def check_monotonicity(problem, samples=None, seed=None):
    """
    Menor quociente sum_i <F_i(x) - F_i(y), x^(i) - y^(i)> / |x - y|^2
    sobre pares sorteados.
    """
    samples, seed = _parametros(samples, seed)
    pontos = _amostras(problem, 2 * samples, seed)
    menor = np.inf
    for x, y in zip(pontos[:samples], pontos[samples:]):
        dist2 = float((x - y) @ (x - y))
        if dist2 <= LIMIAR_NULO ** 2:
            continue
        produto = 0.0
        for i in range(problem.n):
            bloco = problem.block(i)
            produto += float((gradient(problem, i, x) - gradient(problem, i, y)) @ (x[bloco] - y[bloco]))
        menor = min(menor, produto / dist2)
    if not np.isfinite(menor):
        raise NoValidSamples(f"Nenhum par de pontos distintos em {problem.name}.")
    return float(menor)


def check_relations(problem, u=None, samples=None, seed=None):
    """
    Confere nas amostras as relações entre as hipóteses:

    - perdas mu-fortemente convexas e L-suaves com gradiente nulo em u
      satisfazem a condição angular com delta = mu/L;
    - fortemente benigno implica benigno com Delta = mu;
    - fortemente benigno com gradientes L-bi-Lipschitz é
      (delta/L)-fortemente monótono.
    """
    samples, seed = _parametros(samples, seed)
    u = _equilibrio(problem, u)
    cossenos, razoes = [], []
    for _, cosseno, razao in _cossenos(problem, u, _amostras(problem, samples, seed)):
        cossenos.append(cosseno)
        razoes.append(razao)
    if not cossenos:
        raise NoValidSamples(f"Nenhuma amostra válida em {problem.name}.")
    mu, L, delta = problem.mu, problem.L, problem.delta
    return RelationsReport(
        angular_hat=float(min(cossenos)),
        angular_predicted=mu / L if mu and L else None,
        growth_hat=float(min(razoes)),
        growth_predicted=mu,
        monotonicity_hat=check_monotonicity(problem, samples, seed),
        monotonicity_predicted=delta / L if delta and L else None,
    )


def benign_report(problem, phis=None, samples=None, seed=None):
    samples, seed = _parametros(samples, seed)
    if phis is None:
        phis = (problem.phi,) if problem.phi else (0.5,)
    dmin = {float(phi): estimate_dmin(problem, phi, samples, seed) for phi in phis}
    relacoes = {}
    if problem.u is not None:
        delta_hat = check_angular(problem, samples=samples, seed=seed)
        relacoes = check_relations(problem, samples=samples, seed=seed).as_dict()
    else:
        delta_hat = None
        logger.warning("%s não declara u; condição angular não verificada.", problem.name)
    return BenignReport(
        problem=problem.name,
        delta_hat=delta_hat,
        dmin_hat=dmin,
        monotonicity_hat=check_monotonicity(problem, samples, seed),
        samples=samples,
        seed=seed,
        relations=relacoes,
    )
