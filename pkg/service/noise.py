import numpy as np

NOISE_STREAM = 0
INITIAL_STREAM = 1


def _uniforms(seed: int, batch: int, stream: int, count: int) -> np.ndarray:
    """
    Uniforms on (0, 1] from a Philox counter-based generator.

    The key packs (seed, batch) and the top counter word selects the stream, so
    every batch owns independent, order-free sequences.
    """
    key = (int(seed) & (2**64 - 1)) | (int(batch) << 64)
    bit_generator = np.random.Philox(key=key, counter=[0, 0, 0, stream])
    return 1.0 - np.random.Generator(bit_generator).random(count)


def standard_normals(seed: int, batch: int, shape, stream: int = NOISE_STREAM) -> np.ndarray:
    """Box-Muller transform of paired uniforms: sqrt(-2 ln u1) (cos 2 pi u2, sin 2 pi u2)."""
    count = int(np.prod(shape))
    pairs = (count + 1) // 2
    u = _uniforms(seed, batch, stream, 2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log(u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    normals = np.column_stack((radius * np.cos(angle), radius * np.sin(angle))).ravel()
    return normals[:count].reshape(shape)


def brownian_increments(seed: int, batch: int, n_steps: int, dim: int, dt: float) -> np.ndarray:
    """dB_i = sqrt(dt) xi_i, shape (n_steps, dim)."""
    return np.sqrt(dt) * standard_normals(seed, batch, (n_steps, dim))


def initial_normals(seed: int, batch: int, size: int) -> np.ndarray:
    return standard_normals(seed, batch, (size,), stream=INITIAL_STREAM)
