import asyncio
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from kernels.base import BaseKernel
from models.simulation import (
    CoupledEnsemble,
    Ensemble,
    NoiseKey,
    Order,
    SimConfig,
    Trajectory,
)
from service.noise import brownian_increments, initial_normals
from service.potential import Potential
from service.volterra import build_memory
from utils.errors import DivergenceError, DomainError
from utils.logger import logger


def _initial_state(cfg: SimConfig, batch: int, size: int) -> np.ndarray:
    return cfg.init.sample(size, initial_normals(cfg.seed, batch, size))


def _check_finite(state: np.ndarray, step: int, batch: int) -> None:
    if not np.all(np.isfinite(state)):
        raise DivergenceError(f"Batch {batch} left the finite range at step {step}", step=step)


def simulate_first_order(cfg: SimConfig, kernel: BaseKernel, batch: int = 0) -> Trajectory:
    """
    Euler-Maruyama for dV = -gamma V dt - int_0^t K(t, s) V_s ds dt + sigma dB.

    The memory integral is the trapezoid sum over all past states, including the
    current one with weight 1/2.
    """
    if kernel.dim != cfg.dim:
        raise DomainError(f"Kernel dim {kernel.dim} does not match config dim {cfg.dim}")
    grid = cfg.grid
    dt = grid.dt
    noise = brownian_increments(cfg.seed, batch, grid.n_steps, cfg.dim, dt) @ cfg.sigma.T
    memory = build_memory(kernel, grid, fast=cfg.fast)

    v = np.empty((grid.size, cfg.dim))
    v[0] = _initial_state(cfg, batch, cfg.dim)
    memory.commit(0, v[0])
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(grid.n_steps):
            v[i + 1] = v[i] + dt * (-cfg.gamma * v[i] - memory.at(i, v[i])) + noise[i]
            _check_finite(v[i + 1], i + 1, batch)
            memory.commit(i + 1, v[i + 1])
    return Trajectory(grid=grid, states=v, order=Order.first, batch=batch)


def simulate_second_order(
    cfg: SimConfig, kernel: BaseKernel, pot: Potential, batch: int = 0
) -> Trajectory:
    """
    Euler-Maruyama for dX = V dt,
    dV = -gamma V dt - u grad U(X) dt - int_0^t K(t, s) V_s ds dt + sigma dB.
    """
    if not kernel.dim == pot.dim == cfg.dim:
        raise DomainError(
            f"Dimensions disagree: kernel {kernel.dim}, potential {pot.dim}, config {cfg.dim}"
        )
    grid = cfg.grid
    dt = grid.dt
    d = cfg.dim
    noise = brownian_increments(cfg.seed, batch, grid.n_steps, d, dt) @ cfg.sigma.T
    memory = build_memory(kernel, grid, fast=cfg.fast)

    states = np.empty((grid.size, 2 * d))
    states[0] = _initial_state(cfg, batch, 2 * d)
    x, v = states[:, :d], states[:, d:]
    memory.commit(0, v[0])
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(grid.n_steps):
            force = -cfg.gamma * v[i] - pot.u * pot.gradient(x[i]) - memory.at(i, v[i])
            x[i + 1] = x[i] + dt * v[i]
            v[i + 1] = v[i] + dt * force + noise[i]
            _check_finite(states[i + 1], i + 1, batch)
            memory.commit(i + 1, v[i + 1])
    return Trajectory(grid=grid, states=states, order=Order.second, batch=batch)


def simulate_batch(
    cfg: SimConfig,
    kernel: BaseKernel,
    order: Order,
    batch: int,
    pot: Optional[Potential] = None,
) -> Trajectory:
    if order == Order.second:
        if pot is None:
            raise DomainError("Second-order simulation needs a potential")
        return simulate_second_order(cfg, kernel, pot, batch)
    return simulate_first_order(cfg, kernel, batch)


async def _run_batches(
    cfg: SimConfig,
    kernels: List[BaseKernel],
    order: Order,
    pot: Optional[Potential],
    threads: int,
    desc: str,
) -> List[List[Trajectory]]:
    """All (batch, kernel) paths; results are ordered by batch, never by completion."""
    pbar = tqdm(total=cfg.batches * len(kernels), desc=desc, leave=False)
    sem = asyncio.Semaphore(max(1, threads))

    async def run(batch: int, kernel: BaseKernel) -> Trajectory:
        async with sem:
            try:
                path = await asyncio.to_thread(simulate_batch, cfg, kernel, order, batch, pot)
                pbar.update()
                return path
            except DivergenceError as e:
                logger.error(f"Batch {batch} of {kernel!r} diverged: {e}")
                raise

    tasks = [run(b, k) for b in range(cfg.batches) for k in kernels]
    paths = await asyncio.gather(*tasks)
    pbar.close()
    return [paths[i :: len(kernels)] for i in range(len(kernels))]


async def simulate_ensemble(
    cfg: SimConfig,
    kernel: BaseKernel,
    order: Order = Order.first,
    pot: Optional[Potential] = None,
    threads: int = 1,
) -> Ensemble:
    desc = f"{order.value}-order batches"
    (paths,) = await _run_batches(cfg, [kernel], order, pot, threads, desc)
    ledger = [NoiseKey(seed=cfg.seed, batch=b) for b in range(cfg.batches)]
    return Ensemble(paths=paths, ledger=ledger)


async def simulate_coupled(
    cfg: SimConfig,
    kernel_true: BaseKernel,
    kernel_pert: BaseKernel,
    order: Order = Order.first,
    pot: Optional[Potential] = None,
    threads: int = 1,
) -> CoupledEnsemble:
    """
    Synchronized coupling: batch b of both systems reads the same initial state
    and the same Brownian increments, regenerated from (seed, b).
    """
    if kernel_true.dim != kernel_pert.dim:
        raise DomainError("True and perturbed kernels must share the dimension")
    true_paths, pert_paths = await _run_batches(
        cfg, [kernel_true, kernel_pert], order, pot, threads, "Coupled batches"
    )
    return CoupledEnsemble(
        true_paths=true_paths,
        pert_paths=pert_paths,
        ledger=[NoiseKey(seed=cfg.seed, batch=b) for b in range(cfg.batches)],
    )


def couple(true_ensemble: Ensemble, pert_ensemble: Ensemble) -> CoupledEnsemble:
    """Pair two ensembles simulated from the same noise ledger."""
    if true_ensemble.ledger != pert_ensemble.ledger:
        raise DomainError("Ensembles were driven by different noise and cannot be coupled")
    return CoupledEnsemble(
        true_paths=true_ensemble.paths,
        pert_paths=pert_ensemble.paths,
        ledger=true_ensemble.ledger,
    )
