"""
Oráculos de perda por jogador.

Cada oráculo recebe a ação do próprio jogador (`own`) e a ação conjunta
dos demais (`others`, concatenada na ordem dos jogadores, sem o bloco do
próprio) e devolve valor ou gradiente em relação a `own`.
"""
import numpy as np

from geometry.boxes import as_vector

from .exceptions import InvalidProblem


def _matriz(valor, nome):
    M = np.array(valor, dtype=float, ndmin=2)
    if M.ndim != 2:
        raise InvalidProblem(f"{nome} deveria ser uma matriz, recebeu shape {M.shape}.")
    M.setflags(write=False)
    return M


def _confere(M, linhas, colunas, nome):
    if M.shape != (linhas, colunas):
        raise InvalidProblem(f"{nome} deveria ser {linhas}x{colunas}, recebeu {M.shape}.")


class LossOracle:
    kind = None

    def value(self, own, others):
        raise NotImplementedError

    def gradient(self, own, others):
        raise NotImplementedError

    def bind(self, d_own, d_others):
        """Confere formatos contra as dimensões do jogo; devolve o próprio oráculo."""
        return self

    @property
    def mu(self):
        """Constante de convexidade forte no próprio argumento, quando conhecida."""
        return None

    def to_dict(self):
        raise InvalidProblem(f"Perda do tipo '{self.kind}' não pode ser serializada.")


class QuadraticBilinearLoss(LossOracle):
    """
    nu(x, o) = 1/2 x'Qx + x'A o + b'x + 1/2 o'R o

    O termo em R só depende dos oponentes: não entra no gradiente, serve
    para relatar valores (regret, perdas registradas).
    """

    kind = "quadratic-bilinear"

    def __init__(self, Q, A, b=None, R=None):
        self.Q = _matriz(Q, "Q")
        if self.Q.shape[0] != self.Q.shape[1] or not np.allclose(self.Q, self.Q.T, rtol=0, atol=1e-12):
            raise InvalidProblem("Q precisa ser quadrada e simétrica.")
        if np.linalg.eigvalsh(self.Q).min() <= 0:
            raise InvalidProblem("Q precisa ser definida positiva (perda fortemente convexa).")
        d_own = self.Q.shape[0]
        self.A = _matriz(A, "A")
        d_others = self.A.shape[1]
        self.b = np.zeros(d_own) if b is None else as_vector(b, "b")
        self.R = _matriz(np.zeros((d_others, d_others)) if R is None else R, "R")

    def bind(self, d_own, d_others):
        _confere(self.Q, d_own, d_own, "Q")
        _confere(self.A, d_own, d_others, "A")
        _confere(self.R, d_others, d_others, "R")
        if self.b.size != d_own:
            raise InvalidProblem(f"b deveria ter dimensão {d_own}, recebeu {self.b.size}.")
        return self

    @property
    def mu(self):
        return float(np.linalg.eigvalsh(self.Q).min())

    @property
    def smoothness(self):
        return float(np.linalg.eigvalsh(self.Q).max())

    def value(self, own, others):
        own, others = as_vector(own), as_vector(others)
        return float(
            0.5 * own @ self.Q @ own + own @ self.A @ others + self.b @ own
            + 0.5 * others @ self.R @ others
        )

    def gradient(self, own, others):
        return self.Q @ as_vector(own) + self.A @ as_vector(others) + self.b

    def to_dict(self):
        return {
            "kind": self.kind,
            "Q": self.Q.tolist(),
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "R": self.R.tolist(),
        }


class SaddleQuarticLoss(LossOracle):
    """
    Jogo de dois jogadores em torno de f(x, y) = |x|^2 - |y|^2 + (x'Py)^2.

    role="min": o jogador x minimiza f; role="max": o jogador y minimiza -f.
    """

    kind = "saddle-quartic"

    def __init__(self, P, role):
        if role not in ("min", "max"):
            raise InvalidProblem(f"role deve ser 'min' ou 'max', recebeu {role!r}.")
        self.P = _matriz(P, "P")
        self.role = role

    def bind(self, d_own, d_others):
        if self.role == "min":
            _confere(self.P, d_own, d_others, "P")
        else:
            _confere(self.P, d_others, d_own, "P")
        return self

    def _xy(self, own, others):
        own, others = as_vector(own), as_vector(others)
        return (own, others) if self.role == "min" else (others, own)

    def value(self, own, others):
        x, y = self._xy(own, others)
        f = x @ x - y @ y + (x @ self.P @ y) ** 2
        return float(f if self.role == "min" else -f)

    def gradient(self, own, others):
        x, y = self._xy(own, others)
        acoplamento = x @ self.P @ y
        if self.role == "min":
            return 2.0 * x + 2.0 * acoplamento * (self.P @ y)
        return 2.0 * y - 2.0 * acoplamento * (self.P.T @ x)

    def to_dict(self):
        return {"kind": self.kind, "P": self.P.tolist(), "role": self.role}


class CustomLoss(LossOracle):
    """Valor e gradiente fornecidos por funções externas (precisam ser puras)."""

    kind = "custom"

    def __init__(self, value_fn, gradient_fn, mu=None):
        self._value_fn = value_fn
        self._gradient_fn = gradient_fn
        self._mu = mu

    @property
    def mu(self):
        return self._mu

    def value(self, own, others):
        return float(self._value_fn(as_vector(own), np.asarray(others, dtype=float)))

    def gradient(self, own, others):
        return as_vector(self._gradient_fn(as_vector(own), np.asarray(others, dtype=float)))


def loss_from_dict(dados):
    kind = dados.get("kind")
    if kind == QuadraticBilinearLoss.kind:
        return QuadraticBilinearLoss(dados["Q"], dados["A"], dados.get("b"), dados.get("R"))
    if kind == SaddleQuarticLoss.kind:
        return SaddleQuarticLoss(dados["P"], dados["role"])
    raise InvalidProblem(f"Tipo de perda desconhecido ou não serializável: {kind!r}.")
