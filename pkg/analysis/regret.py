"""
Regret de cada jogador contra um comparador fixo u.

reg_f soma ν^(i)(x_t) - ν^(i)(u^(i), x_t^(-i)) nas rodadas registradas;
reg_c vale 0 se x_t^(i) esteve sempre na própria fatia e +inf caso
contrário.
"""
import logging
from dataclasses import dataclass

import numpy as np

from simulador_gnep.conf import gnep_setting

from .exceptions import InvalidParameter, MissingConstants

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegretReport:
    reg_f: tuple
    reg_c: tuple
    first_violation: tuple
    u: tuple
    T: int

    @property
    def feasible(self):
        return all(r == 0 for r in self.reg_c)

    def as_dict(self):
        return {
            "reg_f": list(self.reg_f),
            "reg_c": list(self.reg_c),
            "first_violation": list(self.first_violation),
            "u": list(self.u),
            "T": self.T,
        }


def regret(trace, problem, u=None, tol=None):
    if u is None:
        u = problem.u
    if u is None:
        raise MissingConstants(["u"], problem.name)
    u = np.array(u, dtype=float, ndmin=1)
    if u.size != problem.total_dim:
        raise InvalidParameter(f"u com dimensão {u.size}, o jogo tem dimensão {problem.total_dim}.")
    if tuple(trace.dims) != tuple(problem.dims):
        raise InvalidParameter(f"Trace com dimensões {trace.dims}, problema com {problem.dims}.")
    tol = gnep_setting("AUDIT_TOL") if tol is None else tol

    reg_f = np.zeros(problem.n)
    primeira = None
    for log in trace.rounds:
        x = log.joint_x
        if primeira is None and not problem.constraint.contains(x, tol):
            primeira = log.t
        for i in range(problem.n):
            bloco = problem.block(i)
            perda = problem.losses[i]
            resto = np.concatenate([x[:bloco.start], x[bloco.stop:]])
            reg_f[i] += perda.value(x[bloco], resto) - perda.value(u[bloco], resto)

    if primeira is not None:
        logger.warning("%s: primeira violação de C na rodada %d.", trace.algorithm, primeira)
    # x_t fora de C <=> x_t^(i) fora da fatia, para todo i
    return RegretReport(
        reg_f=tuple(float(r) for r in reg_f),
        reg_c=tuple(0.0 if primeira is None else np.inf for _ in range(problem.n)),
        first_violation=tuple(primeira for _ in range(problem.n)),
        u=tuple(u.tolist()),
        T=trace.T,
    )
