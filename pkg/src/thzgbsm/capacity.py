"""MIMO capacity experiments over generated drops.

Equal-power capacity of the sampled wideband channel: per drop the
transfer function is evaluated on a tone grid, the per-tone Gram
eigenvalues are kept, the whole experiment is normalized to a mean
squared Frobenius norm of rx*tx elements (so SNR means per-receive-
antenna SNR, not a per-drop gain equalization), and capacity is
averaged over tones and drops per SNR point.

Transmit power splits evenly across transmit elements; no waterfilling
anywhere. Every drop's capacity is checked to be nondecreasing in SNR.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clusters import build_drop, place_user
from .coeffs import AntennaArray, assemble_cir, cir_to_ctf, ura
from .lsp import draw_lsp_iid
from .params import ScenarioParamSet


def mimo_capacity(h, rho_linear: float, m_t: int | None = None) -> float:
    """Equal-power capacity log2 det(I + rho/M_t H H^H) in bit/s/Hz.

    Computed from the Gram eigenvalues of the smaller channel side, which
    is numerically cheaper and better conditioned than the determinant
    for wide matrices.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim == 0:
        h = h.reshape(1, 1)
    if h.ndim != 2:
        raise ValueError("h must be a 2-D channel matrix")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel matrix contains non-finite entries")
    if rho_linear < 0:
        raise ValueError("rho_linear must be nonnegative")
    u, s = h.shape
    if m_t is None:
        m_t = s
    gram = h @ h.conj().T if u <= s else h.conj().T @ h
    eig = np.linalg.eigvalsh(gram)
    return float(np.log2(1.0 + rho_linear * np.clip(eig, 0.0, None) / m_t).sum())


def mimo_capacity_det(h, rho_linear: float, m_t: int | None = None) -> float:
    """Same capacity through the determinant; cross-check path."""
    h = np.asarray(h, dtype=complex)
    u, s = h.shape
    if m_t is None:
        m_t = s
    gram = h @ h.conj().T if u <= s else h.conj().T @ h
    sign, logdet = np.linalg.slogdet(np.eye(gram.shape[0]) + rho_linear * gram / m_t)
    return float(logdet / np.log(2.0))


def capacity_from_eigs(eigs, rho_linear: float, m_t: int) -> np.ndarray:
    """Capacity per eigenvalue row; eigs has shape (..., n_eigs)."""
    lam = np.clip(np.asarray(eigs, dtype=float), 0.0, None)
    return np.log2(1.0 + rho_linear * lam / m_t).sum(axis=-1)


def normalize_channel(h_set) -> np.ndarray:
    """Scale a set of channel matrices so mean ||H||_F^2 = rx*tx."""
    h = np.asarray(h_set, dtype=complex)
    u, s = h.shape[-2:]
    mean_sq = (np.abs(h) ** 2).sum(axis=(-2, -1)).mean()
    if mean_sq <= 0:
        raise ValueError("cannot normalize an all-zero channel set")
    return h * np.sqrt(u * s / mean_sq)


# ---------------------------------------------------------------------------
# experiments


@dataclass
class CapacityExperiment:
    """Mean capacity curve plus the per-drop data behind it."""
    snr_db: np.ndarray
    capacity_bpshz: np.ndarray          # mean over drops and tones
    per_drop: np.ndarray                # (n_drops, n_snr)
    scenario: str
    condition: str
    source: str
    n_drops: int
    mode: str
    seed: int
    normalization: str
    meta: dict = field(default_factory=dict)


def _drop_payload(args):
    (params, params_nlos, seed_seq, mode, n_tones, bandwidth_hz,
     rx, tx, los_fraction) = args
    rng = np.random.default_rng(seed_seq)
    p = params
    if los_fraction is not None:
        # condition flip is the drop's first draw so the rest of the
        # stream stays aligned with the pure-condition runs
        if rng.random() >= los_fraction:
            p = params_nlos
    geom = place_user(p, rng)
    lsp = draw_lsp_iid(p, 1, rng).row(0)
    cs = build_drop(p, rng, geometry=geom, lsp_vals=lsp)
    c_ds = p.clusters.c_ds_ns * 1e-9 if mode == "standard" else None
    cr = assemble_cir(cs, rx, tx, p.wavelength_m, mode=mode, c_ds_s=c_ds)
    freqs = np.linspace(-bandwidth_hz / 2.0, bandwidth_hz / 2.0, n_tones)
    h = cir_to_ctf(cr, freqs)[..., 0]                     # (F, U, S)
    gram = h @ h.conj().transpose(0, 2, 1)
    return np.linalg.eigvalsh(gram)                        # (F, U)


def run_capacity_experiment(params: ScenarioParamSet, snr_db,
                            n_drops: int = 100, seed: int = 0,
                            mode: str = "thz-simplified",
                            rx_array: AntennaArray | None = None,
                            tx_array: AntennaArray | None = None,
                            n_tones: int = 64, bandwidth_hz: float = 1e9,
                            los_fraction: float | None = None,
                            params_nlos: ScenarioParamSet | None = None,
                            normalization: str = "experiment",
                            workers: int = 1) -> CapacityExperiment:
    """Generate drops and average equal-power capacity per SNR point.

    Default geometry: 16x16 transmit and 2x2 receive half-wavelength
    rectangular arrays of vertical isotropic elements. Per-drop seeds
    are spawned from one root sequence and results are reduced in
    submission order, so the outcome is independent of worker count.

    normalization "experiment" (default) scales all drops by one common
    factor; "per-drop" equalizes every drop's mean tone power (kept
    behind this flag since it hides the scenario's gain spread).
    """
    if normalization not in ("experiment", "per-drop"):
        raise ValueError(f"unknown normalization {normalization!r}")
    if los_fraction is not None:
        if params_nlos is None:
            raise ValueError("los_fraction needs params_nlos for the NLoS share")
        if not 0.0 <= los_fraction <= 1.0:
            raise ValueError("los_fraction must lie in [0, 1]")
    snr_db = np.atleast_1d(np.asarray(snr_db, dtype=float))
    if snr_db.size == 0:
        raise ValueError("snr_db must contain at least one point")
    wl = params.wavelength_m
    if tx_array is None:
        tx_array = ura(16, 16, wl / 2.0, name="bs16x16")
    if rx_array is None:
        rx_array = ura(2, 2, wl / 2.0, name="mu2x2")

    seeds = np.random.SeedSequence(seed).spawn(n_drops)
    # arrays and seed sequences ride along whole (both pickle); patterns
    # must be module-level functions for workers > 1 (the bundled
    # isotropic patterns are)
    jobs = [(params, params_nlos, ss, mode, n_tones, bandwidth_hz,
             rx_array, tx_array, los_fraction)
            for ss in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            eigs = list(ex.map(_drop_payload, jobs, chunksize=max(1, n_drops // (workers * 4))))
    else:
        eigs = [_drop_payload(j) for j in jobs]
    eigs = np.stack(eigs)                                  # (drops, F, U)

    m_t = tx_array.n_elements
    m_r = rx_array.n_elements
    if normalization == "experiment":
        scale = (m_t * m_r) / eigs.sum(axis=-1).mean()
        eigs = eigs * scale
    else:
        per = (m_t * m_r) / eigs.sum(axis=-1).mean(axis=-1)   # (drops,)
        eigs = eigs * per[:, None, None]

    rho = 10.0 ** (snr_db / 10.0)
    per_drop = np.empty((n_drops, snr_db.size))
    for i, r in enumerate(rho):
        per_drop[:, i] = capacity_from_eigs(eigs, r, m_t).mean(axis=1)

    order = np.argsort(snr_db)
    diffs = np.diff(per_drop[:, order], axis=1)
    if np.any(diffs < -1e-9):
        raise RuntimeError("capacity decreased with SNR on at least one drop; "
                           "numerical failure in the eigenvalue path")

    return CapacityExperiment(
        snr_db=snr_db, capacity_bpshz=per_drop.mean(axis=0),
        per_drop=per_drop, scenario=params.scenario,
        condition=params.condition if los_fraction is None
        else f"mixed(p_los={los_fraction})",
        source=params.source, n_drops=n_drops, mode=mode, seed=seed,
        normalization=normalization,
        meta={"n_tones": n_tones, "bandwidth_hz": bandwidth_hz,
              "m_t": m_t, "m_r": m_r},
    )


def crossover_snr(snr_db, curve_a, curve_b) -> float | None:
    """First SNR where curve_a - curve_b changes sign, linearly
    interpolated; None when the difference keeps one sign on the grid."""
    snr = np.asarray(snr_db, dtype=float)
    d = np.asarray(curve_a, dtype=float) - np.asarray(curve_b, dtype=float)
    sign = np.sign(d)
    for i in range(1, d.size):
        if sign[i] != 0 and sign[i - 1] != 0 and sign[i] != sign[i - 1]:
            frac = d[i - 1] / (d[i - 1] - d[i])
            return float(snr[i - 1] + frac * (snr[i] - snr[i - 1]))
    return None
