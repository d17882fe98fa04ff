"""Stochastic terahertz channel simulator and analysis toolkit.

Generates geometry-based stochastic channel drops parameterized by
measured 100 GHz indoor-office and 132 GHz urban-microcell statistics
(or the matching 3GPP defaults), re-extracts channel characteristics
from power-delay data, and runs equal-power MIMO capacity comparisons
between the two parameter sources.
"""

__version__ = "0.1.0"

from .analysis import (InfiniteKFactorError, KPowerMeans, MpcSet, Pdp, asa,
                       cluster_stats, correlation_distance, cross_corr,
                       fit_lognormal, fit_normal, k_factor, kpower_means,
                       lsp_cross_corr, rms_ds, select_n_clusters, synth_omni,
                       threshold)
from .capacity import (CapacityExperiment, crossover_snr, mimo_capacity,
                       mimo_capacity_det, normalize_channel,
                       run_capacity_experiment)
from .clusters import (ClusterSet, LinkGeometry, apply_in_cluster_k,
                       build_drop, extract_drop_stats, gen_angles, gen_delays,
                       gen_powers, gen_xpr_and_phases, geometry_for,
                       place_user, rescale_azimuth, rescale_delays,
                       rescale_zenith)
from .coeffs import (AntennaArray, ChannelRealization, assemble_cir,
                     cir_to_ctf, isotropic_horizontal, isotropic_vertical,
                     los_coeff, nlos_ray_coeff, single_antenna,
                     spherical_unit, ura)
from .constants import RAY_OFFSETS, SPEED_OF_LIGHT, c_phi, c_theta, ray_offsets, wrap_deg
from .fields import GaussianField, generate_field
from .lsp import LspRealization, draw_lsp_iid, generate_lsp, mixing_matrix
from .params import (LogNormalSpec, NormalSpec, ParamValidationError,
                     ScenarioParamSet, available_sets, load_params,
                     load_params_file, nearest_psd)
from .pathloss import (CiFit, PathLossSample, ci_pl_db, fit_ci, fspl_db,
                       pathloss_db, pl_best_direction, pl_from_pdp,
                       umi_nlos_3gpp_pl_db)

__all__ = [k for k in dir() if not k.startswith("_")]
