"""
Envelope de Moreau de f(x) = a|x - u| com parâmetro gamma.
"""
import numpy as np

from geometry.boxes import as_vector

from .exceptions import InvalidParameter


def _checa(a, gamma, u, x):
    if not a > 0 or not gamma > 0:
        raise InvalidParameter(f"a e gamma precisam ser positivos, recebeu a={a}, gamma={gamma}.")
    u, x = as_vector(u, "u"), as_vector(x, "x")
    if u.size != x.size:
        raise InvalidParameter(f"u com dimensão {u.size}, x com {x.size}.")
    return x - u


def moreau_norm(a, gamma, u, x):
    r = float(np.linalg.norm(_checa(a, gamma, u, x)))
    if a * gamma <= r:
        return a * r - 0.5 * gamma * a * a
    return r * r / (2.0 * gamma)


def moreau_norm_grad(a, gamma, u, x):
    """Gradiente (1/gamma)-Lipschitz do envelope."""
    v = _checa(a, gamma, u, x)
    r = float(np.linalg.norm(v))
    if a * gamma <= r:
        return a * v / r
    return v / gamma
