"""Scenario geometry, large/small-scale fading, and noise normalization.

Produces noise-normalized channel sets: every channel carries the
sqrt(pathloss / noise power) scaling so AWGN has unit variance and solver
powers are in mW directly.  Channels are a pure function of (Scenario, seed).
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

SPEED_OF_LIGHT = 299792458.0
REFERENCE_DISTANCE_M = 100.0


@dataclass(frozen=True)
class Scenario:
    """Full experiment description; see README for field semantics."""

    n_cells: int = 2
    n_users_per_cell: int = 2
    n_bs_antennas: int = 8
    adc_dac_bits: float | None = None  # None = infinite resolution
    n_subcarriers: int = 1  # 1 = narrowband
    n_taps: int = 1
    inter_site_distance: float = 2000.0
    min_bs_user_distance: float = 100.0
    carrier_hz: float = 2.4e9
    bandwidth_hz: float = 1e7
    noise_figure_db: float = 5.0
    shadowing_sigma_db: float = 8.7
    pathloss_exponent: float = 3.8
    delay_profile: str = "exponential"  # or "uniform"
    target_sinr_db: object = 0.0  # scalar or nested per-(cell,user[,subcarrier])
    seed: int = 0

    def __post_init__(self):
        if min(self.n_cells, self.n_users_per_cell, self.n_bs_antennas) < 1:
            raise ValueError("all counts must be >= 1")
        if self.n_taps > self.n_subcarriers:
            raise ValueError("n_taps must not exceed n_subcarriers")
        if min(self.inter_site_distance, self.min_bs_user_distance) <= 0:
            raise ValueError("distances must be positive")
        if self.n_bs_antennas < self.n_users_per_cell:
            raise ValueError("need at least as many BS antennas as users per cell")
        if self.n_bs_antennas < 4 * self.n_users_per_cell:
            warnings.warn(
                "n_bs_antennas < 4 * n_users_per_cell; the massive-array "
                "assumption behind the models is weak here",
                stacklevel=2,
            )
        if self.delay_profile not in ("exponential", "uniform"):
            raise ValueError(f"unknown delay profile {self.delay_profile!r}")

    @property
    def wideband(self):
        return self.n_subcarriers > 1

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def target_sinr_linear(self):
        """Targets broadcast to (n_cells, n_users[, K]) in linear units."""
        shape = (self.n_cells, self.n_users_per_cell)
        if self.wideband:
            shape = shape + (self.n_subcarriers,)
        g = np.broadcast_to(np.asarray(self.target_sinr_db, dtype=float), shape)
        return 10.0 ** (g / 10.0)


@dataclass(frozen=True)
class ChannelSet:
    """Noise-normalized channels for every (receiving cell, transmitting cell).

    narrowband: h[i, j] is the N_b x N_u matrix between BS i and the users of
    cell j.  wideband: taps[i, j, l] holds the l-th tap matrix instead.  The
    TDD downlink channel is the conjugate transpose view of the same object.
    """

    scenario: Scenario
    h: np.ndarray | None = None  # (N_c, N_c, N_b, N_u)
    taps: np.ndarray | None = None  # (N_c, N_c, L, N_b, N_u)
    bs_xy: np.ndarray = field(default=None, repr=False)
    user_xy: np.ndarray = field(default=None, repr=False)

    def stacked(self, i):
        """H_i = [H_{i,1}, ..., H_{i,Nc}] of shape (N_b, N_c*N_u)."""
        n_c, _, n_b, n_u = self.h.shape
        return self.h[i].transpose(1, 0, 2).reshape(n_b, n_c * n_u)


def hexagon_vertices(center, circumradius):
    """Vertices of a hexagon with a flat side facing +x (tessellation layout)."""
    ang = np.deg2rad(30.0 + 60.0 * np.arange(6))
    return center + circumradius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _in_hexagon(point, center, circumradius):
    # Flat side toward +x: the apothem constraint along the six edge normals.
    p = point - center
    apothem = circumradius * math.sqrt(3.0) / 2.0
    for deg in range(0, 360, 60):
        n = np.array([math.cos(math.radians(deg)), math.sin(math.radians(deg))])
        if p @ n > apothem + 1e-9:
            return False
    return True


def hex_centers(n_cells, inter_site_distance):
    """BS positions: adjacent pair for 2 cells, center plus ring for 7,
    and the nearest points of the hexagonal lattice otherwise."""
    d = inter_site_distance
    if n_cells == 1:
        return np.zeros((1, 2))
    if n_cells == 2:
        return np.array([[0.0, 0.0], [d, 0.0]])
    # Hexagonal lattice generated ring by ring around the origin.
    pts = [np.array([0.0, 0.0])]
    ring = 1
    while len(pts) < n_cells:
        for k in range(6):
            ang = math.radians(60.0 * k)
            start = ring * d * np.array([math.cos(ang), math.sin(ang)])
            step_ang = math.radians(60.0 * k + 120.0)
            step = d * np.array([math.cos(step_ang), math.sin(step_ang)])
            for s in range(ring):
                pts.append(start + s * step)
        ring += 1
    pts = np.array(pts)
    order = np.lexsort((np.arctan2(pts[:, 1], pts[:, 0]), np.linalg.norm(pts, axis=1)))
    return pts[order][:n_cells]


def build_geometry(scenario, rng):
    """BS and user positions; users are uniform in their hexagon and at
    least min_bs_user_distance from every BS (rejection sampled)."""
    bs = hex_centers(scenario.n_cells, scenario.inter_site_distance)
    radius = scenario.inter_site_distance / math.sqrt(3.0)
    users = np.zeros((scenario.n_cells, scenario.n_users_per_cell, 2))
    for j in range(scenario.n_cells):
        for u in range(scenario.n_users_per_cell):
            while True:
                cand = bs[j] + radius * (2.0 * rng.random(2) - 1.0)
                if not _in_hexagon(cand, bs[j], radius):
                    continue
                if np.min(np.linalg.norm(bs - cand, axis=1)) >= scenario.min_bs_user_distance:
                    users[j, u] = cand
                    break
    return bs, users


def free_space_pathloss_db(distance_m, carrier_hz):
    return (
        20.0 * math.log10(distance_m)
        + 20.0 * math.log10(carrier_hz)
        + 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT)
    )


def link_gain_db(distance_m, rng, scenario):
    """Log-distance channel gain in dB (negative of pathloss), with one
    lognormal shadowing draw.  Distances below the 100 m anchor are clamped."""
    d = max(float(distance_m), REFERENCE_DISTANCE_M)
    pl = free_space_pathloss_db(REFERENCE_DISTANCE_M, scenario.carrier_hz)
    pl += 10.0 * scenario.pathloss_exponent * math.log10(d / REFERENCE_DISTANCE_M)
    if scenario.shadowing_sigma_db > 0:
        pl += rng.normal(0.0, scenario.shadowing_sigma_db)
    return -pl


def noise_power_dbm(bandwidth_hz, noise_figure_db):
    """Thermal noise power: -174 dBm/Hz + 10 log10(BW) + NF."""
    return -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def delay_profile_weights(scenario):
    """Per-tap power weights, normalized to sum to one."""
    l = scenario.n_taps
    if scenario.delay_profile == "uniform":
        p = np.ones(l)
    else:
        p = np.exp(-0.5 * np.arange(l))
    return p / p.sum()


def rayleigh_block(rng, shape):
    """I.i.d. CN(0, 1) entries."""
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2.0)


def draw_channels(scenario, rng=None):
    """One noise-normalized ChannelSet realization.

    Deterministic in (scenario, scenario.seed) when rng is not supplied.
    """
    if rng is None:
        rng = np.random.default_rng(scenario.seed)
    bs, users = build_geometry(scenario, rng)
    n_c, n_u, n_b = scenario.n_cells, scenario.n_users_per_cell, scenario.n_bs_antennas
    noise_dbm = noise_power_dbm(scenario.bandwidth_hz, scenario.noise_figure_db)

    # Amplitude scale per (receiving BS i, user (j, u)).
    amp = np.zeros((n_c, n_c, n_u))
    for j in range(n_c):
        for u in range(n_u):
            for i in range(n_c):
                dist = np.linalg.norm(users[j, u] - bs[i])
                gain_db = link_gain_db(dist, rng, scenario)
                amp[i, j, u] = 10.0 ** ((gain_db - noise_dbm) / 20.0)

    if not scenario.wideband:
        h = rayleigh_block(rng, (n_c, n_c, n_b, n_u)) * amp[:, :, None, :]
        return ChannelSet(scenario=scenario, h=h, bs_xy=bs, user_xy=users)

    p = delay_profile_weights(scenario)
    taps = rayleigh_block(rng, (n_c, n_c, scenario.n_taps, n_b, n_u))
    taps = taps * np.sqrt(p)[None, None, :, None, None] * amp[:, :, None, None, :]
    return ChannelSet(scenario=scenario, taps=taps, bs_xy=bs, user_xy=users)
