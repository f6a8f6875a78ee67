import numpy as np

from models.simulation import LyapunovParams
from service.potential import Potential
from utils.errors import DomainError


def lyapunov_params(gamma: float, u: float, R: np.ndarray, kappa0: float) -> LyapunovParams:
    """
    lambda = min(1/8, kappa0 u / (2 gamma^2)),
    A = u R / gamma^2 + (1 - 2 lambda)^2 Id / 2, B = (1 - 2 lambda) Id / gamma, C = Id / gamma^2
    """
    if min(gamma, u, kappa0) <= 0:
        raise DomainError("gamma, u and kappa0 must be positive")
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    identity = np.eye(R.shape[0])
    lam = min(0.125, kappa0 * u / gamma**2 / 2)
    return LyapunovParams(
        lam=lam,
        gamma=gamma,
        u=u,
        A=u * R / gamma**2 + 0.5 * (1 - 2 * lam) ** 2 * identity,
        B=(1 - 2 * lam) / gamma * identity,
        C=identity / gamma**2,
    )


def lyapunov_distance_sq(p: LyapunovParams, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """r^2 = Z.AZ + Z.BW + W.CW; z and w may carry leading batch axes."""
    return (
        np.einsum("...i,ij,...j->...", z, p.A, z)
        + np.einsum("...i,ij,...j->...", z, p.B, w)
        + np.einsum("...i,ij,...j->...", w, p.C, w)
    )


def lyapunov_distance_sq_expanded(
    p: LyapunovParams, R: np.ndarray, z: np.ndarray, w: np.ndarray
) -> np.ndarray:
    """Same distance written as a sum of three nonnegative terms."""
    g = p.gamma
    mixed = (1 - 2 * p.lam) * z + w / g
    return (
        p.u / g**2 * np.einsum("...i,ij,...j->...", z, R, z)
        + 0.5 * np.sum(mixed**2, axis=-1)
        + 0.5 / g**2 * np.sum(w**2, axis=-1)
    )


def gamma_form(
    p: LyapunovParams,
    pot: Potential,
    x: np.ndarray,
    x_tilde: np.ndarray,
    v: np.ndarray,
    v_tilde: np.ndarray,
) -> np.ndarray:
    """(2AZ + BW).W + (BZ + 2CW).(-gamma W - u (grad U(x) - grad U(x~)))"""
    z = x - x_tilde
    w = v - v_tilde
    drift = -p.gamma * w - p.u * (pot.gradient(x) - pot.gradient(x_tilde))
    first = np.sum((2 * z @ p.A.T + w @ p.B.T) * w, axis=-1)
    second = np.sum((z @ p.B.T + 2 * w @ p.C.T) * drift, axis=-1)
    return first + second
